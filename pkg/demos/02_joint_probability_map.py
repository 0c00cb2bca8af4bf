"""Joint permutation probability over pulse length and chirp range.

Scans P_joint = |U_12 U_23 U_31|^2 on a (tau_p, chirp range) grid with the
standard normalization A0 = 20/tau_p and the sweep centered between the
two resonances.  The adiabatic plateau appears once tau_p * omega_R >> 1
and the chirp range clears both transitions.

A full 81 x 81 map takes a few minutes; pass --quick for a coarse one.
"""

import sys

import numpy as np

from chirpecho.ensemble import joint_probability_map

quick = "--quick" in sys.argv
n = 21 if quick else 81
tau_grid = np.linspace(0.5, 20.0, n)
rate_grid = np.linspace(-4.0, -0.1, n)  # chirp range mu/tau_p in omega_R units

rows = []
for rate in rate_grid:
    m = joint_probability_map(tau_grid, rate * tau_grid, omega_R=1.0, n_t=2048)
    rows.append(np.diagonal(m.p_joint))
p = np.array(rows)  # p[i_rate, i_tau]

with open("joint_probability_map.csv", "w") as fh:
    fh.write("# tau_p in 1/omega_R; mu dimensionless; p_joint in [0, 1]\n")
    fh.write("tau_p_us,mu,p_joint\n")
    for i, rate in enumerate(rate_grid):
        for j, tau in enumerate(tau_grid):
            fh.write(f"{tau:.9g},{rate * tau:.9g},{p[i, j]:.9g}\n")
print("wrote joint_probability_map.csv")
print(f"max P_joint = {p.max():.4f}")
print("line cut at chirp range -2 omega_R:")
i2 = int(np.argmin(np.abs(rate_grid + 2.0)))
for tau, pj in list(zip(tau_grid, p[i2]))[:: max(1, n // 8)]:
    print(f"  tau_p*omega_R = {tau:5.1f}:  P_joint = {pj:.4f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.contourf(tau_grid, rate_grid, p, levels=np.linspace(0, 1, 21), cmap="viridis")
    fig.colorbar(im, ax=ax, label="P_joint")
    ax.set_xlabel("tau_p [1/omega_R]")
    ax.set_ylabel("chirp range mu/tau_p [omega_R]")
    fig.savefig("joint_probability_map.png", dpi=150, bbox_inches="tight")
    print("wrote joint_probability_map.png")
except ImportError:
    print("matplotlib not available; skipped the figure")
