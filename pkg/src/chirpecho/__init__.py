"""Simulator for coherence rephasing and spin-wave storage with three
identical frequency-chirped control pulses in inhomogeneously broadened
lambda-system ensembles.

Unit convention: angular frequencies in rad/us ("angular MHz"), times in
us, lengths in whatever unit alpha_d is the inverse of.
"""

from .adiabatic import (
    AdiabaticFrame,
    NotAdiabaticWindow,
    PhaseIntegrals,
    analytic_propagator,
    instantaneous_eigensystem,
    joint_probability,
    phase_integrals,
)
from .dynamics import (
    AtomParams,
    IntegrationError,
    free_propagator,
    integrate_state,
    propagator,
)
from .ensemble import (
    EnsembleSpec,
    bandwidth_margin,
    final_populations_scan,
    joint_probability_map,
)
from .maxwell import (
    FieldGrid,
    MediumSpec,
    RephasingMap,
    SolverGrids,
    propagate_controls,
    rephasing_map,
    weak_signal_echo,
)
from .phasematch import WaveVectorSet, echo_wavevectors, geometry_preset, is_silenced
from .presets import MATERIAL_PRESETS, MaterialPreset, validate_material
from .pulses import ChirpedPulse, envelope_at, phase_at, rephasable_window
from .sequence import (
    EchoInsidePulse,
    SequenceTiming,
    coherence_phase_scan,
    inverted_coherence_factor,
    overall_propagator,
    rephasing_residual,
    solve_echo_time,
    with_echo_time,
)

__version__ = "0.1.0"
