"""Echo phase-matching: spatial-modulation wavevectors and silencing.

After each control pulse the rephased polarization carries a spatial
modulation built from the signal and control wavevectors.  Collective
emission needs that modulation to match a free optical wavevector; a
mismatch much larger than pi over the medium length silences the echo.
This is what suppresses the noisy primary echo from the inverted medium
when the control beams are chosen appropriately.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "WaveVectorSet",
    "SilencingVerdict",
    "echo_wavevectors",
    "is_silenced",
    "geometry_preset",
    "GEOMETRY_PRESETS",
]


@dataclass(frozen=True)
class WaveVectorSet:
    """Signal and control wavevectors [rad/length] with the medium length.

    All magnitudes are assumed (approximately) equal; a difference with
    L*dk comparable to pi breaks the bookkeeping and triggers a warning.
    """

    k_s: np.ndarray
    k_1: np.ndarray
    k_2: np.ndarray
    k_3: np.ndarray
    L: float

    def __post_init__(self):
        for name in ("k_s", "k_1", "k_2", "k_3"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, v)
        if self.L <= 0.0:
            raise ValueError("medium length L must be positive")
        ks = np.linalg.norm(self.k_s)
        spread = max(
            abs(np.linalg.norm(v) - ks) for v in (self.k_1, self.k_2, self.k_3)
        )
        if spread * self.L >= math.pi:
            warnings.warn(
                "control/signal wavevector magnitudes differ by more than "
                "pi/L; the equal-magnitude bookkeeping is unreliable",
                stacklevel=2,
            )

    @property
    def k_s_mag(self) -> float:
        return float(np.linalg.norm(self.k_s))


class SilencingVerdict(NamedTuple):
    silenced: bool
    mismatch: float  # | |k_e| - k_s | * L  [rad]


def echo_wavevectors(ws: WaveVectorSet, chirp_sign: str) -> dict[int, np.ndarray]:
    """Spatial-modulation wavevectors of the rephased coherences, keyed by
    the control pulse after which the (partial) rephasing occurs.

    Negative chirp: stage 3 (secondary echo) 2k3 - k2 - k1 + ks and
    stage 2 (primary) k1 + k2 - ks.  Positive chirp: stage 3
    k3 + k2 - 2k1 + ks and stage 1 (primary) 2k1 - ks.
    """
    if chirp_sign == "negative":
        return {
            3: 2.0 * ws.k_3 - ws.k_2 - ws.k_1 + ws.k_s,
            2: ws.k_1 + ws.k_2 - ws.k_s,
        }
    if chirp_sign == "positive":
        return {
            3: ws.k_3 + ws.k_2 - 2.0 * ws.k_1 + ws.k_s,
            1: 2.0 * ws.k_1 - ws.k_s,
        }
    raise ValueError("chirp_sign must be 'negative' or 'positive'")


def is_silenced(
    k_e: np.ndarray, k_s_mag: float, L: float, threshold: float = 1.0
) -> SilencingVerdict:
    """Decide whether an echo with modulation wavevector k_e is silenced.

    The mismatch is ||k_e| - k_s| * L; emission is treated as silenced
    when it exceeds threshold * pi.  The raw mismatch is always returned
    so callers can apply stricter criteria.
    """
    if L <= 0.0:
        raise ValueError("medium length L must be positive")
    mismatch = abs(float(np.linalg.norm(k_e)) - k_s_mag) * L
    return SilencingVerdict(silenced=bool(mismatch > threshold * math.pi), mismatch=mismatch)


# Backward-echo beam layouts: three distinct directions fanned at pi/3,
# with the doubled control beam chosen so the secondary echo leaves at
# -k_s while the primary modulation is far off the light cone.
_SIN60 = math.sqrt(3.0) / 2.0


def geometry_preset(name: str, k_mag: float = 1.0, L: float = 1.0) -> WaveVectorSet:
    """Named control-beam geometry.

    ``backward_negative``: k1 = k2 at 60 deg, k3 at 120 deg from the
    signal; ``backward_positive``: k1 at 60 deg, k2 = k3 at 120 deg.
    Both send the secondary echo backward along -k_s.
    """
    e0 = np.array([1.0, 0.0, 0.0])
    e60 = np.array([0.5, _SIN60, 0.0])
    e120 = np.array([-0.5, _SIN60, 0.0])
    if name == "backward_negative":
        k1 = k2 = k_mag * e60
        k3 = k_mag * e120
    elif name == "backward_positive":
        k1 = k_mag * e60
        k2 = k3 = k_mag * e120
    else:
        raise ValueError(f"unknown geometry preset {name!r}")
    return WaveVectorSet(k_s=k_mag * e0, k_1=k1, k_2=k2, k_3=k3, L=L)


GEOMETRY_PRESETS = ("backward_negative", "backward_positive")
