"""Instantaneous adiabatic eigensystem and analytic permutation propagators.

In the frame co-rotating with the chirp, one atom driven by a pulse of
amplitude A(t) and effective detuning d(t) = inst_detuning(t) - Delta sees
the real symmetric matrix

    H(t) = (1/2) [[0, A, 0], [A, 2 d, D A], [0, D A, -2 omega_R]].

For omega_R > 0 and A > 0 its three eigenvalues are strictly ordered; the
time integrals of the ordered branches are the phases the atom picks up
when it follows the eigenstates adiabatically.  A sweep that crosses both
optical resonances permutes the populations cyclically, and the
corresponding propagator is a phase-decorated permutation matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .dynamics import AtomParams, IntegrationError
from .pulses import ChirpedPulse, rephasable_window

__all__ = [
    "AdiabaticFrame",
    "PhaseIntegrals",
    "NotAdiabaticWindow",
    "instantaneous_eigensystem",
    "eigenvalues_grid",
    "eigensystem_along",
    "phase_integrals",
    "analytic_propagator",
    "joint_probability",
]


class NotAdiabaticWindow(ValueError):
    """The requested offset is outside the pulse's rephasable window."""


@dataclass(frozen=True)
class AdiabaticFrame:
    """Ordered instantaneous eigensystem at one point in time.

    ``values`` holds (lam_minus, lam_zero, lam_plus) ascending and the
    columns of ``vectors`` are the matching orthonormal eigenvectors.
    ``degenerate`` marks the diabatic crossings at A = 0 where the
    ordering is arbitrary.
    """

    values: np.ndarray
    vectors: np.ndarray
    degenerate: bool = False

    @property
    def lam_minus(self) -> float:
        return float(self.values[0])

    @property
    def lam_zero(self) -> float:
        return float(self.values[1])

    @property
    def lam_plus(self) -> float:
        return float(self.values[2])


@dataclass(frozen=True)
class PhaseIntegrals:
    """Accumulated adiabatic phases over one pulse window [rad]."""

    lam_plus: float
    lam_zero: float
    lam_minus: float


def _hamiltonian(a: float, delta: float, omega_r: float, d_ratio: float) -> np.ndarray:
    return 0.5 * np.array(
        [
            [0.0, a, 0.0],
            [a, 2.0 * delta, d_ratio * a],
            [0.0, d_ratio * a, -2.0 * omega_r],
        ]
    )


def _char_coeffs(h: np.ndarray) -> tuple[float, float, float]:
    """det(H - x I) = -x^3 + a x^2 - b x + c."""
    a = h[0, 0] + h[1, 1] + h[2, 2]
    b = (
        h[0, 0] * h[1, 1]
        - h[0, 1] ** 2
        + h[0, 0] * h[2, 2]
        - h[0, 2] ** 2
        + h[1, 1] * h[2, 2]
        - h[1, 2] ** 2
    )
    c = float(np.linalg.det(h))
    return a, b, c


def _eigvals_trig(h: np.ndarray) -> np.ndarray:
    """Closed-form ascending eigenvalues of a real symmetric 3x3 matrix."""
    q = (h[0, 0] + h[1, 1] + h[2, 2]) / 3.0
    p1 = h[0, 1] ** 2 + h[0, 2] ** 2 + h[1, 2] ** 2
    p2 = (h[0, 0] - q) ** 2 + (h[1, 1] - q) ** 2 + (h[2, 2] - q) ** 2 + 2.0 * p1
    if p2 <= 0.0:
        return np.array([q, q, q])
    p = math.sqrt(p2 / 6.0)
    b = (h - q * np.eye(3)) / p
    r = float(np.linalg.det(b)) / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    hi = q + 2.0 * p * math.cos(phi)
    lo = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    mid = 3.0 * q - hi - lo
    lam = np.array([lo, mid, hi])
    # one Newton polish per root on the characteristic polynomial
    ca, cb, cc = _char_coeffs(h)
    for _ in range(1):
        pv = -lam**3 + ca * lam**2 - cb * lam + cc
        dv = -3.0 * lam**2 + 2.0 * ca * lam - cb
        safe = np.abs(dv) > 1e-30
        lam = np.where(safe, lam - pv / np.where(safe, dv, 1.0), lam)
    return np.sort(lam)


def _eigvec_for(h: np.ndarray, lam: float) -> np.ndarray:
    m = h - lam * np.eye(3)
    cands = [
        np.cross(m[0], m[1]),
        np.cross(m[0], m[2]),
        np.cross(m[1], m[2]),
    ]
    norms = [np.linalg.norm(v) for v in cands]
    k = int(np.argmax(norms))
    if norms[k] < 1e-14:
        return np.zeros(3)
    return cands[k] / norms[k]


def instantaneous_eigensystem(
    a: float, delta: float, omega_R: float, d_ratio: float = 1.0
) -> AdiabaticFrame:
    """Ordered eigensystem of H for one (amplitude, detuning) sample.

    At a = 0 the diabatic levels {0, delta, -omega_R} can cross; exact
    crossings are returned with a consistent ordering but flagged
    degenerate.
    """
    if a < 0.0:
        raise ValueError("amplitude must be non-negative")
    if omega_R <= 0.0:
        raise ValueError("omega_R must be positive")
    h = _hamiltonian(a, delta, omega_R, d_ratio)
    lam = _eigvals_trig(h)
    scale = max(abs(delta), omega_R, a, 1e-300)
    degenerate = bool(
        a == 0.0 and (min(abs(delta), abs(delta + omega_R)) < 1e-12 * scale)
    )
    # Gram-Schmidt with a canonical-axis fallback: at (near-)degeneracies
    # the cross-product candidates can coincide, in which case the axis
    # closest to the eigenspace completes the orthonormal triple.
    vecs = np.zeros((3, 3))
    for j in range(3):
        v = _eigvec_for(h, lam[j])
        for i in range(j):
            v = v - (vecs[:, i] @ v) * vecs[:, i]
        nrm = np.linalg.norm(v)
        if nrm < 1e-8:
            m = h - lam[j] * np.eye(3)
            residuals = np.linalg.norm(m, axis=0)
            for k in np.argsort(residuals, kind="stable"):
                trial = np.zeros(3)
                trial[k] = 1.0
                for i in range(j):
                    trial -= (vecs[:, i] @ trial) * vecs[:, i]
                tn = np.linalg.norm(trial)
                if tn > 0.5:
                    v = trial / tn
                    break
        else:
            v = v / nrm
        vecs[:, j] = v
    # deterministic sign: largest-magnitude component positive
    for j in range(3):
        k = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[k, j] < 0.0:
            vecs[:, j] = -vecs[:, j]
    return AdiabaticFrame(values=lam, vectors=vecs, degenerate=degenerate)


def eigenvalues_grid(a, delta, omega_R: float, d_ratio: float = 1.0) -> np.ndarray:
    """Vectorized ascending eigenvalues for arrays of (amplitude, detuning).

    Returns an array of shape broadcast(a, delta).shape + (3,).
    """
    a = np.asarray(a, dtype=float)
    delta = np.asarray(delta, dtype=float)
    a, delta = np.broadcast_arrays(a, delta)
    q2 = 1.0 + d_ratio * d_ratio
    # characteristic polynomial x^3 - c2 x^2 + c1 x - c0 = 0
    c2 = delta - omega_R
    c1 = -delta * omega_R - 0.25 * q2 * a * a
    c0 = 0.25 * a * a * omega_R
    q = c2 / 3.0
    p = np.sqrt(np.maximum(c2 * c2 / 9.0 - c1 / 3.0, 0.0))
    f_q = q**3 - c2 * q**2 + c1 * q - c0
    r = np.where(p > 0.0, -f_q / (2.0 * np.where(p > 0.0, p, 1.0) ** 3), 0.0)
    r = np.clip(r, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    mid = c2 - hi - lo
    lam = np.stack([lo, mid, hi], axis=-1)
    return np.sort(lam, axis=-1)


def eigensystem_along(
    pulse: ChirpedPulse, params: AtomParams, t: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalue and eigenvector traces along a pulse.

    Eigenvector signs are fixed by maximizing overlap with the previous
    time sample so the traces are continuous.

    Returns
    -------
    values : (n, 3) ascending eigenvalues
    vectors : (n, 3, 3) eigenvector columns matching ``values``
    """
    t = np.asarray(t, dtype=float)
    values = np.empty((t.size, 3))
    vectors = np.empty((t.size, 3, 3))
    prev = None
    for i, ti in enumerate(t):
        a = pulse.amplitude(ti)
        d_eff = pulse.inst_detuning(ti) - params.Delta
        frame = instantaneous_eigensystem(a, d_eff, params.omega_R, params.D)
        v = frame.vectors.copy()
        if prev is not None:
            for j in range(3):
                if prev[:, j] @ v[:, j] < 0.0:
                    v[:, j] = -v[:, j]
        values[i] = frame.values
        vectors[i] = v
        prev = v
    return values, vectors


def phase_integrals(
    pulse: ChirpedPulse,
    params: AtomParams,
    epsabs: float = 1e-9,
) -> PhaseIntegrals:
    """Time integrals of the three ordered eigenvalue branches over the
    pulse window, each accurate to well below 1e-6 rad."""
    t_lo, t_hi = pulse.window

    def branch(k):
        def f(ti):
            a = pulse.amplitude(ti)
            d_eff = pulse.inst_detuning(ti) - params.Delta
            h = _hamiltonian(a, d_eff, params.omega_R, params.D)
            return _eigvals_trig(h)[k]

        val, err = quad(f, t_lo, t_hi, epsabs=epsabs, epsrel=1e-11, limit=400)
        if err > 1e-6:
            raise IntegrationError(
                f"eigenvalue quadrature did not converge (err={err:.2e})"
            )
        return val

    return PhaseIntegrals(lam_plus=branch(2), lam_zero=branch(1), lam_minus=branch(0))


# canonical basis axis each branch asymptotes to, indexed (minus, zero, plus)
_AXES_BELOW = (1, 2, 0)  # effective detuning < -omega_R
_AXES_ABOVE = (2, 0, 1)  # effective detuning > 0


def branch_signs(
    pulse: ChirpedPulse, params: AtomParams, n_samples: int = 512
) -> tuple[int, int, int]:
    """Orientation of each continuously-tracked eigenvector branch.

    An eigenvector followed continuously through the sweep may end up
    antiparallel to the canonical basis axis it asymptotes to.  The
    resulting sign of each branch multiplies the corresponding phase
    factor of the permutation propagator (a pi phase the populations
    never see, but element-wise phases do).  For D > 0 the pattern is
    (+1, -1, -1) for (plus, zero, minus); it is computed here by
    tracking rather than assumed.

    Returns (sign_plus, sign_zero, sign_minus).
    """
    t = np.linspace(*pulse.window, n_samples)
    _, vecs = eigensystem_along(pulse, params, t)
    if pulse.mu < 0.0:
        start_axes, end_axes = _AXES_ABOVE, _AXES_BELOW
    else:
        start_axes, end_axes = _AXES_BELOW, _AXES_ABOVE
    signs = []
    for branch in range(3):
        s0 = vecs[0, start_axes[branch], branch]
        s1 = vecs[-1, end_axes[branch], branch]
        signs.append(int(np.sign(s0) * np.sign(s1)))
    return signs[2], signs[1], signs[0]


def analytic_propagator(pulse: ChirpedPulse, params: AtomParams) -> np.ndarray:
    """Adiabatic-limit propagator over the pulse window.

    For a blue-to-red sweep (mu < 0) the nonzero pattern is
    (1,2), (2,3), (3,1); for red-to-blue it is the transpose pattern.
    Element phases carry the eigenvalue integrals, the pulse-edge chirp
    phases and the branch orientation signs.  Raises
    :class:`NotAdiabaticWindow` when the sweep does not cross both
    resonances of this atom.
    """
    lo, hi = rephasable_window(pulse, params.omega_R)
    if pulse.mu == 0.0 or lo >= hi or not (lo <= params.Delta <= hi):
        raise NotAdiabaticWindow(
            f"Delta={params.Delta} outside rephasable window [{lo}, {hi}]"
        )
    lams = phase_integrals(pulse, params)
    s_plus, s_zero, s_minus = branch_signs(pulse, params)
    t_lo, t_hi = pulse.window
    phi_lo = pulse.phase(t_lo)
    phi_hi = pulse.phase(t_hi)
    u = np.zeros((3, 3), dtype=complex)
    if pulse.mu < 0.0:
        u[0, 1] = s_plus * np.exp(1j * (lams.lam_plus + phi_lo))
        u[1, 2] = s_minus * np.exp(1j * (lams.lam_minus - phi_hi))
        u[2, 0] = s_zero * np.exp(1j * lams.lam_zero)
    else:
        u[1, 0] = s_plus * np.exp(1j * (lams.lam_plus - phi_hi))
        u[2, 1] = s_minus * np.exp(1j * (lams.lam_minus + phi_lo))
        u[0, 2] = s_zero * np.exp(1j * lams.lam_zero)
    return u


def joint_probability(u: np.ndarray) -> float:
    """|U_12 U_23 U_31|^2, the probability that one pulse permutes all
    three populations cyclically.  Invariant under global phases."""
    return float(np.abs(u[0, 1] * u[1, 2] * u[2, 0]) ** 2)
