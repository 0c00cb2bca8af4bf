import numpy as np
import pytest

from chirpecho import adiabatic as ad
from chirpecho import dynamics as dyn
from chirpecho import sequence as seq
from chirpecho.pulses import ChirpedPulse


def _timing(**overrides):
    kw = dict(
        t0=0.0, t1=200.0, t2=560.0, t3=1000.0, T=40.0, T_prime=160.0,
        chirp_sign="negative",
    )
    kw.update(overrides)
    return seq.SequenceTiming(**kw)


@pytest.fixture
def deep_pulse():
    # tau_p * omega_R = 20, deeply adiabatic, in omega_R = 1 units
    return ChirpedPulse(A0=2.0, tau_p=20.0, delta0=-0.5, mu=-40.0, half_window=160.0)


def test_residual_arithmetic():
    t = seq.SequenceTiming(
        t0=0.0, t1=1.0, t2=4.0, t3=7.0, t4=9.0, T=0.05, T_prime=0.4,
        chirp_sign="negative",
    )
    # (t1-t0) + (t4-t3) - (t3-t2) = 1 + 2 - 3 = 0
    assert seq.rephasing_residual(t) == pytest.approx(0.0)
    t_pos = seq.SequenceTiming(
        t0=0.0, t1=1.0, t2=4.0, t3=6.0, t4=8.0, T=0.05, T_prime=0.4,
        chirp_sign="positive",
    )
    # (t1-t0) + (t4-t3) - (t2-t1) = 1 + 2 - 3 = 0
    assert seq.rephasing_residual(t_pos) == pytest.approx(0.0)
    t_off = seq.SequenceTiming(
        t0=0.0, t1=1.0, t2=4.0, t3=7.0, t4=9.5, T=0.05, T_prime=0.4,
        chirp_sign="negative",
    )
    assert seq.rephasing_residual(t_off) == pytest.approx(0.5)


def test_solve_echo_time():
    t = seq.SequenceTiming(
        t0=0.0, t1=2.0, t2=5.0, t3=10.0, T=0.1, T_prime=0.6, chirp_sign="negative"
    )
    assert seq.solve_echo_time(t) == pytest.approx(13.0)
    t_pos = seq.SequenceTiming(
        t0=0.0, t1=2.0, t2=6.0, t3=9.0, T=0.1, T_prime=0.6, chirp_sign="positive"
    )
    assert seq.solve_echo_time(t_pos) == pytest.approx(11.0)


def test_spin_storage_shift_keeps_residual():
    base = seq.SequenceTiming(
        t0=0.0, t1=2.0, t2=5.0, t3=10.0, T=0.1, T_prime=0.6, chirp_sign="negative"
    )
    t4 = seq.solve_echo_time(base)
    for s in (0.5, 3.0, 11.0):
        shifted = seq.SequenceTiming(
            t0=0.0, t1=2.0, t2=5.0 + s, t3=10.0 + s, t4=t4 + s, T=0.1, T_prime=0.6,
            chirp_sign="negative",
        )
        assert seq.rephasing_residual(shifted) == pytest.approx(0.0, abs=1e-12)


def test_echo_inside_pulse():
    # t4 = 2*t3 - t2 - t1 + t0 lands inside the third pulse window
    t = seq.SequenceTiming(
        t0=0.0, t1=2.0, t2=8.0, t3=10.5, t4=None, T=0.1, T_prime=0.6,
        chirp_sign="negative",
    )
    with pytest.raises(seq.EchoInsidePulse):
        seq.solve_echo_time(t)


def test_timing_invariants():
    with pytest.raises(ValueError):
        _timing(t1=100.0)  # signal window hits first pulse
    with pytest.raises(ValueError):
        _timing(t2=400.0)  # pulses 1 and 2 overlap
    with pytest.raises(ValueError):
        seq.SequenceTiming(t0=0, t1=1, t2=2, t3=3, T=0.1, T_prime=0.3, chirp_sign="down")


def test_overall_propagator_diagonal(deep_pulse):
    timing = seq.with_echo_time(_timing())
    params = dyn.AtomParams(Delta=0.4, omega_R=1.0)
    u = seq.overall_propagator(deep_pulse, timing, params, mode="numeric")
    off = u - np.diag(np.diag(u))
    assert np.max(np.abs(off)) < 0.01
    assert dyn.unitarity_defect(u) < 1e-6


def test_overall_propagator_modes_agree(deep_pulse):
    timing = seq.with_echo_time(_timing())
    for delta in (-0.8, 0.0, 0.9):
        params = dyn.AtomParams(Delta=delta, omega_R=1.0)
        u_num = seq.overall_propagator(deep_pulse, timing, params, mode="numeric")
        u_adi = seq.overall_propagator(deep_pulse, timing, params, mode="adiabatic")
        dphi = np.angle(np.diag(u_num) / np.diag(u_adi))
        assert np.max(np.abs(dphi)) < 0.05


def test_overall_propagator_zero_amplitude_zero_gaps():
    # abutting windows of a dark pulse compose to a single free span
    p = ChirpedPulse(A0=0.0, tau_p=1.0, delta0=-0.5, mu=-2.0, half_window=5.0)
    timing = seq.SequenceTiming(
        t0=0.0, t1=6.0, t2=16.0, t3=26.0, t4=32.0, T=1.0, T_prime=5.0,
        chirp_sign="negative",
    )
    params = dyn.AtomParams(Delta=0.7, omega_R=1.3)
    u = seq.overall_propagator(p, timing, params, mode="numeric", rtol=1e-11)
    span = (timing.t4 - timing.T) - (timing.t0 + timing.T)
    assert np.max(np.abs(u - dyn.free_propagator(params, span))) < 1e-7


def test_distinct_pulses_flagged():
    timing = seq.with_echo_time(_timing())
    params = dyn.AtomParams(Delta=0.0, omega_R=1.0)
    pulses = [
        ChirpedPulse(A0=2.0, tau_p=20.0, delta0=-0.5, mu=-40.0, half_window=160.0,
                     t_center=tc)
        for tc in timing.centers
    ]
    pulses[1] = ChirpedPulse(A0=2.2, tau_p=20.0, delta0=-0.5, mu=-40.0,
                             half_window=160.0, t_center=timing.t2)
    with pytest.warns(UserWarning, match="not identical"):
        seq.overall_propagator(pulses, timing, params, mode="adiabatic")


def test_coherence_scan_flat_phase(deep_pulse):
    timing = seq.with_echo_time(_timing())
    grid = np.linspace(-1.2, 1.2, 25)
    scan = seq.coherence_phase_scan(deep_pulse, timing, 1.0, 1.0, grid, mode="numeric")
    flat = scan.factor * np.exp(-2j * grid * timing.T)
    spread = np.max(np.abs(np.angle(flat / flat[12])))
    assert spread < 0.05
    assert np.abs(scan.factor[12]) >= 0.99
    # the offset-independent constant is the spin-phase term
    predicted = -(timing.t1 - 2 * timing.t2 + timing.t3)  # omega_R = 1
    got = np.angle(flat[12])
    assert abs(np.angle(np.exp(1j * (got - predicted)))) < 0.05


def test_coherence_scan_slope_tracks_timing_violation(deep_pulse):
    # shifting t4 by s changes the linear phase slope from 2T to 2T - s
    base = _timing()
    t4 = seq.solve_echo_time(base)
    grid = np.linspace(-1.0, 1.0, 21)
    for s in (-20.0, 15.0):
        timing = seq.SequenceTiming(
            t0=base.t0, t1=base.t1, t2=base.t2, t3=base.t3, t4=t4 + s,
            T=base.T, T_prime=base.T_prime, chirp_sign="negative",
        )
        scan = seq.coherence_phase_scan(deep_pulse, timing, 1.0, 1.0, grid, mode="adiabatic")
        # remove the known bulk slope so the residual phase is unwrappable
        resid = scan.factor * np.exp(-2j * grid * timing.T)
        slope = np.polyfit(grid, np.unwrap(np.angle(resid)), 1)[0] + 2 * timing.T
        assert slope == pytest.approx(2 * timing.T - s, rel=0.02)


def test_coherence_scan_grid_validation(deep_pulse):
    timing = seq.with_echo_time(_timing())
    with pytest.raises(ValueError):
        seq.coherence_phase_scan(deep_pulse, timing, 1.0, 1.0, np.array([-3.0, 0.0]))


def test_spin_storage_invariance(deep_pulse):
    # translating {t2, t3, t4} by a spin period leaves the factors unchanged
    timing = seq.with_echo_time(_timing())
    grid = np.linspace(-1.0, 1.0, 11)
    scan0 = seq.coherence_phase_scan(deep_pulse, timing, 1.0, 1.0, grid, mode="numeric")
    s = 16.0 * np.pi  # 8 spin periods at omega_R = 1
    shifted = seq.SequenceTiming(
        t0=timing.t0, t1=timing.t1, t2=timing.t2 + s, t3=timing.t3 + s,
        t4=timing.t4 + s, T=timing.T, T_prime=timing.T_prime, chirp_sign="negative",
    )
    scan1 = seq.coherence_phase_scan(deep_pulse, shifted, 1.0, 1.0, grid, mode="numeric")
    assert np.max(np.abs(np.angle(scan1.factor / scan0.factor))) < 0.05
    # a generic shift changes them only by the predicted global spin phase
    s = 7.3
    shifted = seq.SequenceTiming(
        t0=timing.t0, t1=timing.t1, t2=timing.t2 + s, t3=timing.t3 + s,
        t4=timing.t4 + s, T=timing.T, T_prime=timing.T_prime, chirp_sign="negative",
    )
    scan2 = seq.coherence_phase_scan(deep_pulse, shifted, 1.0, 1.0, grid, mode="numeric")
    assert np.max(np.abs(np.angle(scan2.factor / (scan0.factor * np.exp(1j * s))))) < 0.05


def test_inverted_factor_matches_eigenvalue_prediction(deep_pulse):
    timing = seq.with_echo_time(_timing())
    t_probe = timing.t2 + (timing.t1 - timing.t0)  # matched intervals
    deltas = np.linspace(-1.0, 1.0, 9)
    f_num = np.array(
        [
            seq.inverted_coherence_factor(
                deep_pulse, t_probe, timing, dyn.AtomParams(d, 1.0, 1.0), mode="numeric"
            )
            for d in deltas
        ]
    )
    assert np.max(np.abs(np.abs(f_num) - 1.0)) < 0.01
    lam = [
        ad.phase_integrals(deep_pulse.at_center(timing.t1), dyn.AtomParams(d, 1.0, 1.0))
        for d in deltas
    ]
    pred = np.array([np.exp(1j * (l.lam_minus - l.lam_plus)) for l in lam])
    rel = (f_num / f_num[4]) / (pred / pred[4])
    assert np.max(np.abs(np.angle(rel))) < 0.05


def test_inverted_factor_partial_rephasing_only(deep_pulse):
    # the residual offset dependence keeps the ensemble sum well below the
    # perfectly rephased value
    timing = seq.with_echo_time(_timing())
    t_probe = timing.t2 + (timing.t1 - timing.t0)
    deltas = np.linspace(-1.2, 1.2, 41)
    f = np.array(
        [
            seq.inverted_coherence_factor(
                deep_pulse, t_probe, timing, dyn.AtomParams(d, 1.0, 1.0), mode="adiabatic"
            )
            for d in deltas
        ]
    )
    assert abs(np.sum(f)) < 0.8 * np.sum(np.abs(f))


def test_inverted_factor_zero_amplitude_unit_modulus():
    # in the adiabatic limit the permutation persists down to vanishing
    # amplitude, so the factor reduces to pure diabatic/free phases
    p = ChirpedPulse(A0=0.0, tau_p=1.0, delta0=-0.5, mu=-2.0, half_window=5.0)
    timing = seq.SequenceTiming(
        t0=0.0, t1=6.0, t2=17.0, t3=40.0, T=1.0, T_prime=5.0, chirp_sign="negative"
    )
    f = seq.inverted_coherence_factor(
        p, 23.0, timing, dyn.AtomParams(0.3, 1.0), mode="adiabatic"
    )
    assert abs(f) == pytest.approx(1.0, abs=1e-9)
    # while the finite-speed (numeric) zero pulse transfers nothing at all
    f_num = seq.inverted_coherence_factor(
        p, 23.0, timing, dyn.AtomParams(0.3, 1.0), mode="numeric"
    )
    assert abs(f_num) < 1e-12


def test_inverted_factor_probe_window_validation(deep_pulse):
    timing = seq.with_echo_time(_timing())
    with pytest.raises(ValueError):
        seq.inverted_coherence_factor(
            deep_pulse, timing.t2, timing, dyn.AtomParams(0.0, 1.0)
        )
