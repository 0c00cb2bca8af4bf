"""Acceptance criteria, one test per criterion, each printing a pass/fail
line with its headline numbers.

Run with ``pytest tests/test_acceptance.py -v -s``.  The heavy propagation
criteria take a few minutes each at their stated grids.
"""

import time

import numpy as np
import pytest

from chirpecho import adiabatic as ad
from chirpecho import dynamics as dyn
from chirpecho import ensemble as ens
from chirpecho import maxwell as mx
from chirpecho import phasematch as pm
from chirpecho import sequence as seq
from chirpecho.ensemble import EnsembleSpec
from chirpecho.pulses import ChirpedPulse

WIDE_SCAN_PULSE = ChirpedPulse(A0=16.0, tau_p=1.0, delta0=-5.0, mu=-30.0)  # T' = 8 us
WIDE_SCAN_CENTERS = (8.0, 25.0, 43.0)


def _report(name: str, ok: bool, detail: str, t0: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{name}] {status} ({time.time() - t0:.1f}s): {detail}")
    assert ok, f"{name}: {detail}"


def test_a1_cyclic_permutation():
    t0 = time.time()
    pulse = ChirpedPulse(A0=2.0, tau_p=10.0, delta0=-0.5, mu=-20.0)
    params = dyn.AtomParams(Delta=0.0, omega_R=1.0, D=1.0)
    u = dyn.propagator(params, pulse.complex_amplitude, *pulse.window)
    pj = ad.joint_probability(u)
    _report("A1", pj >= 0.98, f"P_joint = {pj:.6f} (>= 0.98)", t0)


def test_a2_adiabatic_oracle():
    t0 = time.time()
    pulse = ChirpedPulse(A0=2.0, tau_p=20.0, delta0=-0.5, mu=-40.0)
    params = dyn.AtomParams(Delta=0.3, omega_R=1.0, D=1.0)
    u_num = dyn.propagator(params, pulse.complex_amplitude, *pulse.window)
    u_adi = ad.analytic_propagator(pulse, params)
    pattern = {(i, j) for i in range(3) for j in range(3) if u_adi[i, j] != 0}
    pattern_ok = pattern == {(0, 1), (1, 2), (2, 0)}
    num_pattern_ok = all(
        abs(u_num[i, j]) > 0.9 if (i, j) in pattern else abs(u_num[i, j]) < 0.1
        for i in range(3)
        for j in range(3)
    )
    mod_err = max(abs(abs(u_num[i, j]) - abs(u_adi[i, j])) for i, j in pattern)
    ph_err = max(abs(np.angle(u_num[i, j] / u_adi[i, j])) for i, j in pattern)
    ok = pattern_ok and num_pattern_ok and mod_err < 0.02 and ph_err < 0.05
    _report(
        "A2", ok,
        f"pattern ok = {pattern_ok and num_pattern_ok}, "
        f"max modulus err = {mod_err:.4f} (< 0.02), "
        f"max phase err = {ph_err:.4f} rad (< 0.05)",
        t0,
    )


def test_a3_rephasing_condition():
    t0 = time.time()
    pulse = ChirpedPulse(A0=2.0, tau_p=20.0, delta0=-0.5, mu=-40.0, half_window=160.0)
    timing = seq.with_echo_time(seq.SequenceTiming(
        t0=0.0, t1=200.0, t2=560.0, t3=1000.0, T=40.0, T_prime=160.0,
        chirp_sign="negative",
    ))
    assert seq.rephasing_residual(timing) == 0.0
    # central 80 percent of the rephasable window [-1.5, 1.5]
    grid = np.linspace(-1.2, 1.2, 41)
    scan = seq.coherence_phase_scan(pulse, timing, 1.0, 1.0, grid, mode="numeric")
    flat = scan.factor * np.exp(-2j * grid * timing.T)
    spread = float(np.max(np.abs(np.angle(flat / flat[grid.size // 2]))))
    # rigid translation of {t2, t3, t4} by full spin periods
    s = 16.0 * np.pi
    shifted = seq.SequenceTiming(
        t0=timing.t0, t1=timing.t1, t2=timing.t2 + s, t3=timing.t3 + s,
        t4=timing.t4 + s, T=timing.T, T_prime=timing.T_prime, chirp_sign="negative",
    )
    assert seq.rephasing_residual(shifted) == pytest.approx(0.0, abs=1e-9)
    scan_s = seq.coherence_phase_scan(pulse, shifted, 1.0, 1.0, grid, mode="numeric")
    shift_err = float(np.max(np.abs(np.angle(scan_s.factor / scan.factor))))
    ok = spread < 0.05 and shift_err < 0.05
    _report(
        "A3", ok,
        f"phase spread = {spread:.4f} rad (< 0.05), "
        f"spin-storage shift change = {shift_err:.4f} rad (< 0.05)",
        t0,
    )


def test_a4_wide_ensemble_populations():
    t0 = time.time()
    grid = np.linspace(-50.0, 50.0, 1601)
    scan = ens.final_populations_scan(
        WIDE_SCAN_PULSE, WIDE_SCAN_CENTERS, grid, omega_R=10.0, D=1.0, n_t=4096
    )
    i0 = int(np.argmin(np.abs(grid)))
    i30 = int(np.argmin(np.abs(grid + 30.0)))
    p1_0 = float(scan.p1[i0])
    p2_30 = float(scan.p2[i30])
    left = right = None
    for i in range(i0, grid.size - 1):
        if scan.p1[i] >= 0.5 > scan.p1[i + 1]:
            right = float(np.interp(0.5, [scan.p1[i + 1], scan.p1[i]], [grid[i + 1], grid[i]]))
            break
    for i in range(i0, 0, -1):
        if scan.p1[i] >= 0.5 > scan.p1[i - 1]:
            left = float(np.interp(0.5, [scan.p1[i - 1], scan.p1[i]], [grid[i - 1], grid[i]]))
            break
    ok = (
        p1_0 > 0.99
        and p2_30 > 0.95
        and left is not None
        and right is not None
        and abs(left + 23.0) <= 2.0
        and abs(right - 23.0) <= 2.0
    )
    _report(
        "A4", ok,
        f"P1(0) = {p1_0:.4f} (> 0.99), P2(-30) = {p2_30:.4f} (> 0.95), "
        f"half-crossings = {left:.2f}/{right:.2f} (+-23 +- 2)",
        t0,
    )


@pytest.fixture(scope="module")
def narrow_propagation():
    medium = mx.MediumSpec(
        alpha_d=1.0, omega_R=10.0, D=1.0, spectrum=EnsembleSpec.uniform(-20.0, 20.0),
        L=5.0,
    )
    grids = mx.SolverGrids(n_z=101, n_t=4096, n_delta=201, n_t_weak=1024)
    return mx.propagate_controls(medium, WIDE_SCAN_PULSE, WIDE_SCAN_CENTERS, grids)


def test_a5_narrow_ensemble_rephasing(narrow_propagation):
    t0 = time.time()
    ctrl = narrow_propagation
    delta_grid = np.linspace(-7.0, 7.0, 29)
    rmap = mx.rephasing_map(ctrl.fields, ctrl.medium, delta_grid)
    r2 = np.abs(rmap.r) ** 2
    min_r2 = float(r2.min())
    arg_exit = np.angle(rmap.r[-1])
    spread = float(arg_exit.max() - arg_exit.min())
    ok = min_r2 >= 0.99 and spread <= 0.3
    _report(
        "A5", ok,
        f"min |R|^2 over |Delta| <= 7, alpha z <= 5: {min_r2:.4f} (>= 0.99); "
        f"arg R spread over 14 MHz at alpha z = 5: {spread:.3f} rad (<= 0.3)",
        t0,
    )


def test_a6_wide_ensemble_degradation():
    t0 = time.time()
    medium = mx.MediumSpec(
        alpha_d=1.0, omega_R=10.0, D=1.0, spectrum=EnsembleSpec.uniform(-50.0, 50.0),
        L=3.0,
    )
    grids = mx.SolverGrids(n_z=61, n_t=4096, n_delta=201, n_t_weak=1024)
    ctrl = mx.propagate_controls(medium, WIDE_SCAN_PULSE, WIDE_SCAN_CENTERS, grids)
    delta_grid = np.linspace(-50.0, 50.0, 51)
    rmap = mx.rephasing_map(ctrl.fields, medium, delta_grid, z_grid=np.array([3.0]))
    r2 = np.abs(rmap.r[0]) ** 2
    min_r2 = float(r2.min())
    ok = min_r2 < 0.9
    _report(
        "A6", ok,
        f"min |R|^2 at alpha z = 3: {min_r2:.4f} (< 0.9); "
        f"best-rephased offset still at {float(r2.max()):.4f}",
        t0,
    )


def test_a7_phase_matching_exact():
    t0 = time.time()
    k_s = np.array([1.0, 0.0, 0.0])
    forward = pm.WaveVectorSet(k_s=k_s, k_1=k_s, k_2=k_s, k_3=k_s, L=1.0)
    fw_ok = np.array_equal(pm.echo_wavevectors(forward, "negative")[3], k_s)
    backward = pm.WaveVectorSet(k_s=k_s, k_1=-k_s, k_2=-k_s, k_3=-k_s, L=1.0)
    bw = pm.echo_wavevectors(backward, "negative")[2]
    bw_ok = np.array_equal(bw, -3.0 * k_s)
    silenced_ok = pm.is_silenced(bw, 1.0, L=1e4).silenced
    presets_ok = True
    for name, sign in (("backward_negative", "negative"), ("backward_positive", "positive")):
        ws = pm.geometry_preset(name)
        presets_ok &= np.array_equal(pm.echo_wavevectors(ws, sign)[3], -ws.k_s)
    ok = fw_ok and bw_ok and silenced_ok and presets_ok
    _report(
        "A7", ok,
        f"forward k_e = k_s: {fw_ok}; backward primary -3 k_s and silenced: "
        f"{bw_ok and silenced_ok}; backward presets k_e = -k_s: {presets_ok}",
        t0,
    )


def test_a8_echo_plumbing():
    t0 = time.time()
    medium = mx.MediumSpec(
        alpha_d=1.0, omega_R=10.0, D=1.0, spectrum=EnsembleSpec.uniform(-20.0, 20.0),
        L=4.0,
    )
    timing = seq.with_echo_time(seq.SequenceTiming(
        t0=0.0, t1=10.0, t2=27.0, t3=48.0, T=2.0, T_prime=8.0, chirp_sign="negative",
    ))
    signal = ChirpedPulse(A0=1e-3 * WIDE_SCAN_PULSE.A0, tau_p=0.3, delta0=0.0, mu=0.0,
                          t_center=0.0, half_window=2.0)
    grids = mx.SolverGrids(n_z=81, n_t=2048, n_delta=101, n_t_weak=1024)
    res = mx.weak_signal_echo(medium, WIDE_SCAN_PULSE, timing, signal, grids)
    depths = np.array([0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0])
    effs = np.array([res.efficiency_at(az) for az in depths])
    best = float(depths[int(np.argmax(effs))])
    timing_err = abs(res.echo_peak_time - res.echo_time_solved)
    ok = 1.5 <= best <= 2.5 and timing_err <= signal.tau_p
    _report(
        "A8", ok,
        f"efficiency peak at alpha L = {best} (in [1.5, 2.5]), "
        f"best eta = {effs.max():.3f}; echo peak time offset = "
        f"{timing_err:.3f} us (<= {signal.tau_p})",
        t0,
    )


def test_a9_property_suite():
    t0 = time.time()
    # unitarity of numeric propagators over random parameter draws
    rng = np.random.default_rng(123)
    unit_defect = 0.0
    for _ in range(4):
        p = ChirpedPulse(
            A0=rng.uniform(0.5, 3.0), tau_p=rng.uniform(3.0, 10.0),
            delta0=rng.uniform(-1.5, 0.5), mu=rng.uniform(-25.0, 25.0),
        )
        params = dyn.AtomParams(
            Delta=rng.uniform(-1.0, 1.0), omega_R=rng.uniform(0.5, 2.0),
            D=rng.uniform(0.5, 2.0),
        )
        u = dyn.propagator(params, p.complex_amplitude, *p.window)
        unit_defect = max(unit_defect, dyn.unitarity_defect(u))

    # per-atom norm conservation through a dense three-pulse propagation
    medium = mx.MediumSpec(
        alpha_d=1.0, omega_R=10.0, D=1.0, spectrum=EnsembleSpec.uniform(-20.0, 20.0),
        L=1.5,
    )
    grids = mx.SolverGrids(n_z=11, n_t=1024, n_delta=101, n_t_weak=256)
    ctrl = mx.propagate_controls(medium, WIDE_SCAN_PULSE, WIDE_SCAN_CENTERS, grids)
    norm_err = float(np.max(np.abs(np.sum(np.abs(ctrl.final_states) ** 2, axis=-1) - 1.0)))

    # vacuum propagation identity
    vac = mx.propagate_controls(
        mx.MediumSpec(alpha_d=0.0, omega_R=10.0, D=1.0,
                      spectrum=EnsembleSpec.uniform(-20.0, 20.0), L=1.0),
        WIDE_SCAN_PULSE, WIDE_SCAN_CENTERS,
        mx.SolverGrids(n_z=5, n_t=512, n_delta=31, n_t_weak=128),
    )
    vac_err = max(
        float(np.max(np.abs(fg.values[-1] - fg.values[0])) / np.abs(fg.values[0]).max())
        for fg in vac.fields
    )

    # grid-halving stability of |R|^2
    deltas = np.array([-5.0, 0.0, 5.0])
    r2 = {}
    for n_z, n_t in ((11, 2048), (21, 4096)):
        g = mx.SolverGrids(n_z=n_z, n_t=n_t, n_delta=101, n_t_weak=128)
        c = mx.propagate_controls(medium, WIDE_SCAN_PULSE, WIDE_SCAN_CENTERS, g)
        rmap = mx.rephasing_map(c.fields, medium, deltas, z_grid=np.array([1.5]))
        r2[n_z] = np.abs(rmap.r[0]) ** 2
    halving = float(np.max(np.abs(r2[21] - r2[11])))

    ok = unit_defect < 1e-6 and norm_err < 1e-6 and vac_err < 1e-10 and halving < 0.005
    _report(
        "A9", ok,
        f"unitarity defect = {unit_defect:.2e} (< 1e-6), "
        f"norm error = {norm_err:.2e} (< 1e-6), "
        f"vacuum identity = {vac_err:.2e} (< 1e-10), "
        f"|R|^2 grid-halving drift = {halving:.4f} (< 0.005)",
        t0,
    )
