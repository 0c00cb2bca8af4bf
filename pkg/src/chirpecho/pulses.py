"""Chirped control-pulse waveforms.

A control pulse is a sech amplitude envelope with a tanh frequency chirp.
Its instantaneous detuning sweeps from ``delta0 - mu/tau_p`` to
``delta0 + mu/tau_p``, so a pulse with ``mu < 0`` runs blue to red and a
pulse with ``mu > 0`` runs red to blue.

Unit convention used throughout the package: angular frequencies in rad/us
(referred to as "angular MHz") and times in us.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Protocol, runtime_checkable

import numpy as np

__all__ = [
    "ChirpedPulse",
    "Waveform",
    "envelope_at",
    "phase_at",
    "rephasable_window",
]

_LN2 = math.log(2.0)


def _sech(x):
    """Overflow-safe sech."""
    ax = np.abs(x)
    e = np.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


def _ln_cosh(x):
    """Overflow-safe log(cosh(x)) = |x| + log1p(exp(-2|x|)) - log 2."""
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - _LN2


def _like_input(t, out):
    if np.ndim(t) == 0:
        return float(out)
    return out


@runtime_checkable
class Waveform(Protocol):
    """Minimal interface a control waveform must provide.

    Only the sech/tanh pulse ships, but anything exposing an amplitude,
    an instantaneous detuning and the accumulated phase can drive the
    integrators.
    """

    def amplitude(self, t): ...

    def inst_detuning(self, t): ...

    def phase(self, t): ...


@dataclass(frozen=True)
class ChirpedPulse:
    """Sech pulse with tanh chirp.

    Attributes
    ----------
    A0 : float
        Peak Rabi amplitude [rad/us].
    tau_p : float
        Pulse duration [us].
    delta0 : float
        Central detuning from the ensemble line center [rad/us].
    mu : float
        Dimensionless chirp parameter; the full chirp range is
        ``2*|mu|/tau_p`` and ``sign(mu)`` sets the sweep direction.
    t_center : float
        Pulse center time [us].
    half_window : float
        Truncation half-width T' [us]; defaults to ``8*tau_p`` so the
        discarded amplitude tail is negligible.  Must be >= 5*tau_p.
    """

    A0: float
    tau_p: float
    delta0: float
    mu: float
    t_center: float = 0.0
    half_window: float = field(default=-1.0)

    def __post_init__(self):
        if self.tau_p <= 0.0:
            raise ValueError(f"tau_p must be positive, got {self.tau_p}")
        if self.half_window < 0.0:
            object.__setattr__(self, "half_window", 8.0 * self.tau_p)
        if self.half_window < 5.0 * self.tau_p:
            raise ValueError(
                "half_window must be at least 5*tau_p "
                f"(got {self.half_window} with tau_p={self.tau_p})"
            )

    @property
    def chirp_rate(self) -> float:
        """Chirp range mu/tau_p [rad/us]."""
        return self.mu / self.tau_p

    @property
    def window(self) -> tuple[float, float]:
        """Truncation window (t_center - T', t_center + T')."""
        return (self.t_center - self.half_window, self.t_center + self.half_window)

    def at_center(self, t_center: float) -> "ChirpedPulse":
        """Copy of this pulse shifted to a new center time."""
        return replace(self, t_center=t_center)

    def amplitude(self, t):
        s = (np.asarray(t, dtype=float) - self.t_center) / self.tau_p
        return _like_input(t, self.A0 * _sech(s))

    def inst_detuning(self, t):
        s = (np.asarray(t, dtype=float) - self.t_center) / self.tau_p
        return _like_input(t, self.delta0 + self.chirp_rate * np.tanh(s))

    def phase(self, t):
        """Accumulated phase with the convention phase(t_center) = 0."""
        dt = np.asarray(t, dtype=float) - self.t_center
        return _like_input(t, self.delta0 * dt + self.mu * _ln_cosh(dt / self.tau_p))

    def complex_amplitude(self, t):
        """Field sample A(t) * exp(-i Phi(t)) driving the Bloch equations."""
        dt = np.asarray(t, dtype=float) - self.t_center
        s = dt / self.tau_p
        amp = self.A0 * _sech(s)
        phi = self.delta0 * dt + self.mu * _ln_cosh(s)
        out = amp * np.exp(-1j * phi)
        if np.ndim(t) == 0:
            return complex(out)
        return out


def envelope_at(pulse: ChirpedPulse, t):
    """Amplitude and instantaneous detuning of the pulse at time t.

    Returns ``(A0*sech((t-tc)/tau_p), delta0 + (mu/tau_p)*tanh((t-tc)/tau_p))``.
    """
    return pulse.amplitude(t), pulse.inst_detuning(t)


def phase_at(pulse: ChirpedPulse, t):
    """Accumulated phase Phi(t), the antiderivative of the instantaneous
    detuning, fixed by Phi(t_center) = 0."""
    return pulse.phase(t)


def rephasable_window(pulse: ChirpedPulse, omega_R: float) -> tuple[float, float]:
    """Range of atomic offsets whose both optical resonances are crossed.

    For an atom offset ``Delta`` the sweep must start above its upper
    resonance and end below its lower one (or vice versa for positive
    chirp), which happens for
    ``Delta in [delta0 - |mu|/tau_p + omega_R, delta0 + |mu|/tau_p]``.

    Parameters
    ----------
    omega_R : float
        Lower-level splitting [rad/us], must be positive.

    Returns
    -------
    (lo, hi) : tuple of float
        An empty window (lo >= hi) signals that no offset can be rephased.
    """
    if omega_R <= 0.0:
        raise ValueError(f"omega_R must be positive, got {omega_R}")
    span = abs(pulse.mu) / pulse.tau_p
    return (pulse.delta0 - span + omega_R, pulse.delta0 + span)
