"""Echo phase matching for the standard beam geometries.

The primary echo would be emitted while the medium is inverted and must be
silenced; the secondary echo carries the retrieved signal.  Collinear
setups keep everything forward; the pi/3 fan geometries send the secondary
echo backward while pushing the primary far off the light cone.
"""

import math

import numpy as np

from chirpecho import phasematch as pm

K = 2.0 * math.pi / 580e-6  # rad/mm at 580 nm
L = 1.0  # mm


def show(label, ws, sign):
    print(f"\n{label} ({sign} chirp):")
    for stage, k_e in sorted(pm.echo_wavevectors(ws, sign).items(), reverse=True):
        verdict = pm.is_silenced(k_e, ws.k_s_mag, ws.L)
        kind = "secondary" if stage == 3 else "primary"
        direction = ""
        if not verdict.silenced:
            direction = "forward" if k_e @ ws.k_s > 0 else "backward"
        print(
            f"  after pulse {stage} ({kind}): |k_e|/k_s = "
            f"{np.linalg.norm(k_e) / ws.k_s_mag:.3f}, mismatch*L/pi = "
            f"{verdict.mismatch / math.pi:.3g} -> "
            + ("SILENCED" if verdict.silenced else f"emitted {direction}")
        )


k_s = np.array([K, 0.0, 0.0])
show(
    "all beams collinear forward",
    pm.WaveVectorSet(k_s=k_s, k_1=k_s, k_2=k_s, k_3=k_s, L=L),
    "negative",
)
show(
    "controls counterpropagating",
    pm.WaveVectorSet(k_s=k_s, k_1=-k_s, k_2=-k_s, k_3=-k_s, L=L),
    "negative",
)
show(
    "pi/3 fan preset",
    pm.geometry_preset("backward_negative", k_mag=K, L=L),
    "negative",
)
show(
    "pi/3 fan preset",
    pm.geometry_preset("backward_positive", k_mag=K, L=L),
    "positive",
)
