"""Ensemble scans: final populations over offset grids and joint-probability
maps over pulse-parameter grids.

All scans integrate the full three-level dynamics with the fixed-step
unitary kernel, vectorized over the scan grid, so a 1601-point offset
scan of the three-pulse sequence runs in seconds.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dynamics
from .pulses import ChirpedPulse

__all__ = [
    "EnsembleSpec",
    "PopulationScan",
    "JointProbabilityMap",
    "final_populations_scan",
    "joint_probability_map",
    "bandwidth_margin",
]


@dataclass(frozen=True)
class EnsembleSpec:
    """Spectral distribution g(Delta) of the inhomogeneous ensemble.

    Kinds: ``uniform`` (constant on [delta_lo, delta_hi]), ``gaussian``
    (std sigma_delta, support truncated at 8 sigma), ``tabulated``
    (piecewise-linear, renormalized at construction).  ``sigma_s`` is a
    bookkeeping bound on the signal bandwidth; ``grid`` optionally pins
    the offset sample points used by scans.
    """

    kind: str
    delta_lo: float = 0.0
    delta_hi: float = 0.0
    sigma_delta: float = 0.0
    nodes: np.ndarray | None = None
    values: np.ndarray | None = None
    sigma_s: float = 0.0
    grid: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "uniform":
            if not self.delta_hi > self.delta_lo:
                raise ValueError("uniform window needs delta_hi > delta_lo")
        elif self.kind == "gaussian":
            if self.sigma_delta <= 0.0:
                raise ValueError("gaussian spectrum needs sigma_delta > 0")
        elif self.kind == "tabulated":
            nodes = np.asarray(self.nodes, dtype=float)
            vals = np.asarray(self.values, dtype=float)
            if nodes.ndim != 1 or nodes.size < 2 or vals.shape != nodes.shape:
                raise ValueError("tabulated spectrum needs matching 1-d nodes/values")
            if np.any(np.diff(nodes) <= 0):
                raise ValueError("tabulated nodes must be strictly increasing")
            if np.any(vals < 0):
                raise ValueError("tabulated values must be non-negative")
            norm = np.trapezoid(vals, nodes)
            if norm <= 0.0:
                raise ValueError("tabulated spectrum has zero mass")
            object.__setattr__(self, "nodes", nodes)
            object.__setattr__(self, "values", vals / norm)
        else:
            raise ValueError(f"unknown spectrum kind {self.kind!r}")

    @classmethod
    def uniform(cls, delta_lo: float, delta_hi: float, **kw) -> "EnsembleSpec":
        return cls(kind="uniform", delta_lo=delta_lo, delta_hi=delta_hi, **kw)

    @classmethod
    def gaussian(cls, sigma_delta: float, **kw) -> "EnsembleSpec":
        return cls(kind="gaussian", sigma_delta=sigma_delta, **kw)

    @classmethod
    def tabulated(cls, nodes, values, **kw) -> "EnsembleSpec":
        return cls(kind="tabulated", nodes=nodes, values=values, **kw)

    def support(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return (self.delta_lo, self.delta_hi)
        if self.kind == "gaussian":
            return (-8.0 * self.sigma_delta, 8.0 * self.sigma_delta)
        return (float(self.nodes[0]), float(self.nodes[-1]))

    def g(self, delta):
        """Normalized spectral density, vectorized over delta."""
        delta = np.asarray(delta, dtype=float)
        if self.kind == "uniform":
            inside = (delta >= self.delta_lo) & (delta <= self.delta_hi)
            return np.where(inside, 1.0 / (self.delta_hi - self.delta_lo), 0.0)
        if self.kind == "gaussian":
            s = self.sigma_delta
            return np.exp(-0.5 * (delta / s) ** 2) / (s * np.sqrt(2.0 * np.pi))
        return np.interp(delta, self.nodes, self.values, left=0.0, right=0.0)

    @property
    def g0(self) -> float:
        return float(self.g(0.0))

    def normalization_residual(self, n: int = 20001) -> float:
        """|integral g - 1| on a fine grid over the support."""
        lo, hi = self.support()
        x = np.linspace(lo, hi, n)
        return abs(float(np.trapezoid(self.g(x), x)) - 1.0)

    def quadrature(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes and weights of g(x)dx over the support."""
        x, w = np.polynomial.legendre.leggauss(n)
        lo, hi = self.support()
        nodes = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
        weights = 0.5 * (hi - lo) * w * self.g(nodes)
        return nodes, weights


@dataclass(frozen=True)
class PopulationScan:
    """Final populations after the three-pulse sequence per offset."""

    delta: np.ndarray
    populations: np.ndarray  # (n, 3)
    flags: np.ndarray  # True where the row is unreliable

    @property
    def p1(self):
        return self.populations[:, 0]

    @property
    def p2(self):
        return self.populations[:, 1]

    @property
    def p3(self):
        return self.populations[:, 2]


def _stage_fields(pulse: ChirpedPulse, n_t: int):
    t_lo, t_hi = pulse.window
    dt = (t_hi - t_lo) / n_t
    offs = np.asarray(dynamics.stage_offsets())
    tt = t_lo + (np.arange(n_t)[:, None] + offs[None, :]) * dt
    return pulse.complex_amplitude(tt), dt


def final_populations_scan(
    pulse: ChirpedPulse,
    centers: tuple[float, float, float],
    delta_grid: np.ndarray,
    omega_R: float,
    D: float = 1.0,
    n_t: int = 4096,
) -> PopulationScan:
    """Populations after three identical control pulses, atoms starting in
    the ground state, for every offset of the grid."""
    delta_grid = np.asarray(delta_grid, dtype=float)
    n = delta_grid.size
    states = np.zeros((n, 3), dtype=complex)
    states[:, 0] = 1.0
    prev_end = None
    for tc in centers:
        p = pulse.at_center(tc)
        t_lo, t_hi = p.window
        if prev_end is not None:
            if t_lo < prev_end:
                raise ValueError("control pulse windows overlap")
            dynamics.apply_free_phases(states, delta_grid, omega_R, t_lo - prev_end)
        stage, dt = _stage_fields(p, n_t)
        dynamics.split_step_batch(states, delta_grid, omega_R, D, stage, dt)
        prev_end = t_hi
    pops = np.abs(states) ** 2
    norms = pops.sum(axis=1)
    flags = ~np.isfinite(norms) | (np.abs(norms - 1.0) > 1e-6)
    return PopulationScan(delta=delta_grid, populations=pops, flags=flags)


@dataclass(frozen=True)
class JointProbabilityMap:
    """P_joint over a (pulse length, chirp parameter) grid."""

    tau_p: np.ndarray
    mu: np.ndarray
    p_joint: np.ndarray  # (n_tau, n_mu)


def _map_row(args) -> np.ndarray:
    tau, mu_grid, omega_R, D, a0, delta0, n_t = args
    pulse0 = ChirpedPulse(A0=a0, tau_p=tau, delta0=delta0, mu=float(mu_grid[0]))
    t_lo, t_hi = pulse0.window
    dt = (t_hi - t_lo) / n_t
    offs = np.asarray(dynamics.stage_offsets())
    tt = t_lo + (np.arange(n_t)[:, None] + offs[None, :]) * dt
    m = mu_grid.size
    amp = a0 / np.cosh((tt - 0.0) / tau)
    phases = delta0 * tt + mu_grid[:, None, None] * np.log(np.cosh(tt / tau))
    fields = amp[None, :, :] * np.exp(-1j * phases)
    states = np.zeros((m, 3, 3), dtype=complex)
    states[:] = np.eye(3)
    deltas = np.zeros((m, 1))
    dynamics.split_step_batch(states, deltas, omega_R, D, fields[:, None, :, :], dt)
    u = states.swapaxes(-1, -2)
    return np.abs(u[:, 0, 1] * u[:, 1, 2] * u[:, 2, 0]) ** 2


def joint_probability_map(
    tau_grid: np.ndarray,
    mu_grid: np.ndarray,
    omega_R: float = 1.0,
    D: float = 1.0,
    a0_rule: Callable[[float], float] | None = None,
    delta0_rule: Callable[[float], float] | None = None,
    n_t: int = 2048,
    workers: int = 1,
) -> JointProbabilityMap:
    """Single-pulse cyclic-permutation probability on a product grid.

    The scan follows the standard normalization: amplitude a0_rule(tau_p)
    (default 20/tau_p), center detuning delta0_rule(omega_R) (default
    -omega_R/2), atom on resonance (Delta = 0).
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    mu_grid = np.asarray(mu_grid, dtype=float)
    if a0_rule is None:
        a0_rule = lambda tau: 20.0 / tau
    if delta0_rule is None:
        delta0_rule = lambda w: -0.5 * w
    jobs = [
        (tau, mu_grid, omega_R, D, a0_rule(tau), delta0_rule(omega_R), n_t)
        for tau in tau_grid
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_map_row, jobs))
    else:
        rows = [_map_row(j) for j in jobs]
    return JointProbabilityMap(tau_p=tau_grid, mu=mu_grid, p_joint=np.array(rows))


def bandwidth_margin(pulse: ChirpedPulse, omega_R: float, sigma_s: float) -> float:
    """Margin Delta_max - sigma_s between the rephasable half-width and the
    signal bandwidth bound, for a sweep centered between the resonances.

    Positive means the whole signal band can be rephased.  Requires
    delta0 = -omega_R/2 (the centered configuration the bound assumes).
    """
    if abs(pulse.delta0 + 0.5 * omega_R) > 1e-9 * max(1.0, abs(omega_R)):
        raise ValueError("bandwidth margin assumes delta0 = -omega_R/2")
    delta_max = abs(pulse.mu) / pulse.tau_p - 0.5 * omega_R
    return delta_max - sigma_s
