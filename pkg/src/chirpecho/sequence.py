"""Three-pulse rephasing protocol: timing, composition, coherence factors.

The protocol timeline is signal absorption around t0, three identical
chirped control pulses centered at t1, t2, t3, and echo emission around
t4.  Between the pulse windows the atoms evolve freely.  With identical
pulses the pulse-phase contributions cancel in the upper-transition
coherence, and the echo condition reduces to pure interval arithmetic on
the pulse times.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import adiabatic
from . import dynamics
from .dynamics import AtomParams
from .pulses import ChirpedPulse, rephasable_window

__all__ = [
    "SequenceTiming",
    "EchoInsidePulse",
    "rephasing_residual",
    "solve_echo_time",
    "with_echo_time",
    "overall_propagator",
    "CoherenceScan",
    "coherence_phase_scan",
    "inverted_coherence_factor",
]

CHIRP_SIGNS = ("negative", "positive")


class EchoInsidePulse(ValueError):
    """The echo time demanded by the rephasing condition collides with a
    control-pulse window."""


@dataclass(frozen=True)
class SequenceTiming:
    """Event times of the signal/control/echo sequence.

    t0..t4 are the signal, control and echo center times [us]; t4 may be
    None until solved.  T is the signal/echo half-window and T_prime the
    control-pulse half-window.  chirp_sign selects which rephasing
    condition applies ("negative" for blue-to-red pulses).
    """

    t0: float
    t1: float
    t2: float
    t3: float
    T: float
    T_prime: float
    chirp_sign: str = "negative"
    t4: float | None = None

    def __post_init__(self):
        if self.chirp_sign not in CHIRP_SIGNS:
            raise ValueError(f"chirp_sign must be one of {CHIRP_SIGNS}")
        if self.T <= 0.0 or self.T_prime <= 0.0:
            raise ValueError("window half-widths must be positive")
        eps = 1e-12 * max(1.0, abs(self.t3))
        if self.t0 + self.T > self.t1 - self.T_prime + eps:
            raise ValueError("signal window overlaps the first control pulse")
        if self.t1 + self.T_prime > self.t2 - self.T_prime + eps:
            raise ValueError("control pulses 1 and 2 overlap")
        if self.t2 + self.T_prime > self.t3 - self.T_prime + eps:
            raise ValueError("control pulses 2 and 3 overlap")
        if self.t4 is not None and self.t3 + self.T_prime > self.t4 - self.T + eps:
            raise ValueError("echo window overlaps the third control pulse")

    @property
    def centers(self) -> tuple[float, float, float]:
        return (self.t1, self.t2, self.t3)


def rephasing_residual(timing: SequenceTiming) -> float:
    """Interval mismatch whose zero marks the echo rephasing condition.

    Negative chirp: (t1-t0) + (t4-t3) - (t3-t2).
    Positive chirp: (t1-t0) + (t4-t3) - (t2-t1).
    """
    if timing.t4 is None:
        raise ValueError("timing has no echo time t4")
    lead = timing.t1 - timing.t0
    tail = timing.t4 - timing.t3
    if timing.chirp_sign == "negative":
        return lead + tail - (timing.t3 - timing.t2)
    return lead + tail - (timing.t2 - timing.t1)


def solve_echo_time(timing: SequenceTiming) -> float:
    """Echo time t4 that zeroes the rephasing residual.

    Raises :class:`EchoInsidePulse` when the solved t4 would place the
    echo window inside the third control-pulse window.
    """
    if timing.chirp_sign == "negative":
        t4 = 2.0 * timing.t3 - timing.t2 - timing.t1 + timing.t0
    else:
        t4 = timing.t3 + timing.t2 - 2.0 * timing.t1 + timing.t0
    if t4 - timing.T < timing.t3 + timing.T_prime:
        raise EchoInsidePulse(
            f"solved echo time {t4} collides with control pulse 3 "
            f"(needs t4 >= {timing.t3 + timing.T_prime + timing.T})"
        )
    return t4


def with_echo_time(timing: SequenceTiming) -> SequenceTiming:
    """Copy of the timing with t4 set to the solved echo time."""
    return replace(timing, t4=solve_echo_time(timing))


def _as_three_pulses(
    pulse, timing: SequenceTiming
) -> tuple[ChirpedPulse, ChirpedPulse, ChirpedPulse]:
    if isinstance(pulse, ChirpedPulse):
        base = replace(pulse, half_window=timing.T_prime)
        return tuple(base.at_center(tc) for tc in timing.centers)
    pulses = tuple(pulse)
    if len(pulses) != 3:
        raise ValueError("expected one pulse or a sequence of three")
    keys = {(p.A0, p.tau_p, p.delta0, p.mu, p.half_window) for p in pulses}
    if len(keys) > 1:
        warnings.warn(
            "control pulses are not identical; the pulse-phase cancellation "
            "behind the rephasing condition does not apply",
            stacklevel=3,
        )
    for p, tc in zip(pulses, timing.centers):
        if abs(p.t_center - tc) > 1e-9 or abs(p.half_window - timing.T_prime) > 1e-9:
            raise ValueError("pulse centers/windows do not match the timing")
    return pulses


def _expected_chirp_sign(pulses) -> str:
    return "negative" if pulses[0].mu < 0 else "positive"


def overall_propagator(
    pulse,
    timing: SequenceTiming,
    params: AtomParams,
    mode: str = "numeric",
    rtol: float = dynamics.DEFAULT_RTOL,
) -> np.ndarray:
    """Propagator from just after the signal (t0+T) to just before the
    echo (t4-T): free segments interleaved with the three pulse windows.

    ``pulse`` is a single template pulse (re-centered on the timing) or a
    sequence of three explicit pulses.  ``mode`` selects numeric
    integration or the adiabatic-limit matrices for the pulse windows.
    """
    if timing.t4 is None:
        raise ValueError("timing has no echo time t4; call with_echo_time first")
    pulses = _as_three_pulses(pulse, timing)
    if _expected_chirp_sign(pulses) != timing.chirp_sign:
        warnings.warn("pulse chirp direction disagrees with timing.chirp_sign", stacklevel=2)
    identical = isinstance(pulse, ChirpedPulse)
    tp = timing.T_prime

    def pulse_matrix(p: ChirpedPulse) -> np.ndarray:
        if mode == "numeric":
            return dynamics.propagator(
                params, p.complex_amplitude, p.t_center - tp, p.t_center + tp, rtol=rtol
            )
        if mode == "adiabatic":
            return adiabatic.analytic_propagator(p, params)
        raise ValueError(f"unknown mode {mode!r}")

    if identical:
        # the window Hamiltonian is center-invariant, one matrix serves all three
        u1 = u2 = u3 = pulse_matrix(pulses[0])
    else:
        u1, u2, u3 = (pulse_matrix(p) for p in pulses)

    f1 = dynamics.free_propagator(params, (timing.t1 - tp) - (timing.t0 + timing.T))
    f2 = dynamics.free_propagator(params, (timing.t2 - tp) - (timing.t1 + tp))
    f3 = dynamics.free_propagator(params, (timing.t3 - tp) - (timing.t2 + tp))
    f4 = dynamics.free_propagator(params, (timing.t4 - timing.T) - (timing.t3 + tp))
    return f4 @ u3 @ f3 @ u2 @ f2 @ u1 @ f1


@dataclass(frozen=True)
class CoherenceScan:
    """Upper-transition coherence transfer factor per ensemble offset."""

    delta: np.ndarray
    factor: np.ndarray

    @property
    def phase_unwrapped(self) -> np.ndarray:
        return np.unwrap(np.angle(self.factor))


def _window_stage_fields(p: ChirpedPulse, n_t: int) -> tuple[np.ndarray, float]:
    t_lo, t_hi = p.window
    dt = (t_hi - t_lo) / n_t
    offs = np.array(dynamics.stage_offsets())
    tt = t_lo + (np.arange(n_t)[:, None] + offs[None, :]) * dt
    return p.complex_amplitude(tt), dt


def _batched_pulse_propagators(
    p: ChirpedPulse, delta: np.ndarray, omega_R: float, D: float, n_t: int
) -> np.ndarray:
    """Window propagators for a vector of offsets, shape (n, 3, 3)."""
    stage, dt = _window_stage_fields(p, n_t)
    n = delta.size
    mats = np.zeros((n, 3, 3), dtype=complex)
    mats[:] = np.eye(3)
    dynamics.split_step_batch(mats, delta[:, None], omega_R, D, stage, dt)
    # rows of `mats` are evolved basis columns; transpose to matrices
    return mats.swapaxes(-1, -2)


def coherence_phase_scan(
    pulse: ChirpedPulse,
    timing: SequenceTiming,
    omega_R: float,
    D: float,
    delta_grid: np.ndarray,
    mode: str = "numeric",
    n_t: int = 8192,
) -> CoherenceScan:
    """Factor multiplying the a*b coherence between t0+T and t4-T for
    every offset of the grid.

    With identical pulses and a zero rephasing residual the factor's
    phase is 2*Delta*T plus an offset-independent constant.  The grid
    must lie inside the pulse's rephasable window.
    """
    if timing.t4 is None:
        raise ValueError("timing has no echo time t4; call with_echo_time first")
    delta_grid = np.asarray(delta_grid, dtype=float)
    lo, hi = rephasable_window(pulse, omega_R)
    if delta_grid.size and (delta_grid.min() < lo or delta_grid.max() > hi):
        raise ValueError(
            f"delta grid [{delta_grid.min()}, {delta_grid.max()}] exceeds the "
            f"rephasable window [{lo}, {hi}]"
        )
    tp = timing.T_prime
    base = replace(pulse, half_window=tp, t_center=timing.t1)
    if mode == "numeric":
        u_pulse = _batched_pulse_propagators(base, delta_grid, omega_R, D, n_t)
    elif mode == "adiabatic":
        u_pulse = np.stack(
            [
                adiabatic.analytic_propagator(base, AtomParams(d, omega_R, D))
                for d in delta_grid
            ]
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")

    gaps = (
        (timing.t1 - tp) - (timing.t0 + timing.T),
        (timing.t2 - tp) - (timing.t1 + tp),
        (timing.t3 - tp) - (timing.t2 + tp),
        (timing.t4 - timing.T) - (timing.t3 + tp),
    )
    n = delta_grid.size
    u = np.zeros((n, 3, 3), dtype=complex)
    d0 = _free_diag(delta_grid, omega_R, gaps[0])
    for i in range(3):
        u[:, i, i] = d0[:, i]
    for k in range(3):
        u = u_pulse @ u
        # left-multiplying a diagonal matrix scales the rows
        u = _free_diag(delta_grid, omega_R, gaps[k + 1])[:, :, None] * u
    factor = np.conj(u[:, 0, 0]) * u[:, 1, 1]
    return CoherenceScan(delta=delta_grid, factor=factor)


def _free_diag(delta: np.ndarray, omega_R: float, dt: float) -> np.ndarray:
    """Diagonals of the free propagator for a vector of offsets, (n, 3)."""
    n = delta.size
    out = np.empty((n, 3), dtype=complex)
    out[:, 0] = 1.0
    out[:, 1] = np.exp(-1j * delta * dt)
    out[:, 2] = np.exp(-1j * omega_R * dt)
    return out


def inverted_coherence_factor(
    pulse: ChirpedPulse,
    t_probe: float,
    timing: SequenceTiming,
    params: AtomParams,
    mode: str = "numeric",
) -> complex:
    """Transfer factor of the lower-to-upper coherence while the medium is
    inverted, i.e. the factor f in (c* b)(t_probe - T) = f * (a b*)(t0+T).

    For negative chirp the inverted interval follows the second pulse and
    t_probe must lie in [t2+T', t3-T']; for positive chirp it follows the
    first pulse with t_probe in [t1+T', t2-T'].  With identical pulses and
    matched intervals the only offset dependence left is
    exp(i(Lambda_minus - Lambda_plus)), which in general prevents a
    perfect (primary) rephasing.
    """
    tp = timing.T_prime
    pulses = _as_three_pulses(pulse, timing)

    def pulse_matrix(p):
        if mode == "numeric":
            return dynamics.propagator(
                params, p.complex_amplitude, p.t_center - tp, p.t_center + tp
            )
        return adiabatic.analytic_propagator(p, params)

    if timing.chirp_sign == "negative":
        if not (timing.t2 + tp <= t_probe <= timing.t3 - tp):
            raise ValueError("t_probe outside the inverted interval [t2+T', t3-T']")
        u = dynamics.free_propagator(params, (t_probe - timing.T) - (timing.t2 + tp))
        u = u @ pulse_matrix(pulses[1])
        u = u @ dynamics.free_propagator(params, (timing.t2 - tp) - (timing.t1 + tp))
        u = u @ pulse_matrix(pulses[0])
        u = u @ dynamics.free_propagator(params, (timing.t1 - tp) - (timing.t0 + timing.T))
    else:
        if not (timing.t1 + tp <= t_probe <= timing.t2 - tp):
            raise ValueError("t_probe outside the inverted interval [t1+T', t2-T']")
        u = dynamics.free_propagator(params, (t_probe - timing.T) - (timing.t1 + tp))
        u = u @ pulse_matrix(pulses[0])
        u = u @ dynamics.free_propagator(params, (timing.t1 - tp) - (timing.t0 + timing.T))
    return complex(np.conj(u[2, 1]) * u[1, 0])
