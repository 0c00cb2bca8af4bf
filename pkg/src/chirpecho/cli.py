"""Command-line entry point.

Subcommands map one-to-one onto run scenarios: pulse-scan, ensemble-scan,
sequence-check, phasematch, propagate, rephasing-map, echo.  Every run
writes its data CSVs (units declared in '#' header comments), a JSON
summary of the headline quantities, and a TOML manifest that reproduces
the run when passed back via --config.

Exit codes: 0 success, 1 configuration/validation problem, 2 solver
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import adiabatic, ensemble, maxwell, phasematch, sequence
from .config import ConfigError, RunConfig, dump_manifest, load_config
from .dynamics import IntegrationError
from .presets import MATERIAL_PRESETS, validate_material
from .pulses import ChirpedPulse, rephasable_window

__all__ = ["main", "run"]

# vacuum wavevector of a 580 nm line, in rad/mm, for preset-only phasematch runs
DEFAULT_K_MAG = 2.0 * math.pi / 580e-6


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def write_csv(path: Path, comments: list[str], header: list[str], rows) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# scenario runners (each returns the summary dict)
# ---------------------------------------------------------------------------


def _material_report(config: RunConfig, pulse: ChirpedPulse) -> dict | None:
    mat = config.data.get("material")
    if not mat:
        return None
    name = mat.get("preset")
    preset = MATERIAL_PRESETS.get(name)
    if preset is None:
        raise ConfigError("material.preset", f"unknown material preset {name!r}")
    rep = validate_material(preset, pulse)
    return {
        "preset": rep.preset,
        "sweep": list(rep.sweep),
        "all_clear": rep.all_clear,
        "clear_of_unwanted": {f"{k:.6g}": v for k, v in rep.clear_of_unwanted.items()},
        "window_raw": list(rep.window_raw),
        "window_estimated": list(rep.window_estimated),
        "window_empty": rep.window_empty,
    }


def _run_pulse_scan(config: RunConfig, out: Path) -> dict:
    pulse = config.build_pulse()
    omega_r, d_ratio = config.build_atom()
    scan = config.scan_section()
    n = int(scan.get("n_points", 2001))
    delta = float(scan.get("delta", 0.0))
    t = np.linspace(*pulse.window, n)
    amp = pulse.amplitude(t)
    det = pulse.inst_detuning(t)
    lam = adiabatic.eigenvalues_grid(amp, det - delta, omega_r, d_ratio)
    rows = zip(t, amp, det, lam[:, 2], lam[:, 1], lam[:, 0])
    write_csv(
        out / "pulse_scan.csv",
        [
            "time in us; amplitude, detuning and eigenvalues in angular MHz (rad/us)",
            f"atom offset delta = {delta} rad/us",
        ],
        ["t_us", "amplitude", "inst_detuning", "lam_plus", "lam_zero", "lam_minus"],
        rows,
    )
    lo, hi = rephasable_window(pulse, omega_r)
    summary = {
        "rephasable_window": [lo, hi],
        "window_empty": bool(lo >= hi),
        "chirp_range": abs(pulse.mu) / pulse.tau_p,
    }
    sigma_s = scan.get("sigma_s")
    if sigma_s is not None and abs(pulse.delta0 + 0.5 * omega_r) <= 1e-9 * max(1.0, omega_r):
        summary["bandwidth_margin"] = ensemble.bandwidth_margin(pulse, omega_r, float(sigma_s))
    report = _material_report(config, pulse)
    if report is not None:
        summary["material"] = report
    return summary


def _run_ensemble_scan(config: RunConfig, out: Path) -> dict:
    scan = config.scan_section()
    kind = scan.get("kind", "populations")
    omega_r, d_ratio = config.build_atom()
    if kind == "populations":
        pulse = config.build_pulse()
        timing = config.build_timing(pulse)
        grid = np.linspace(
            float(scan.get("delta_lo", -50.0)),
            float(scan.get("delta_hi", 50.0)),
            int(scan.get("n_delta", 1601)),
        )
        res = ensemble.final_populations_scan(
            pulse, timing.centers, grid, omega_r, d_ratio, n_t=int(scan.get("n_t", 4096))
        )
        write_csv(
            out / "populations.csv",
            ["offset in angular MHz (rad/us); populations dimensionless"],
            ["delta_mhz", "p1", "p2", "p3"],
            zip(res.delta, res.p1, res.p2, res.p3),
        )
        lo, hi = rephasable_window(pulse, omega_r)
        i0 = int(np.argmin(np.abs(grid)))
        return {
            "kind": kind,
            "rephasable_window": [lo, hi],
            "p1_at_center": float(res.p1[i0]),
            "max_p2": float(res.p2.max()),
            "flagged_rows": int(res.flags.sum()),
        }
    if kind == "joint-map":
        tau = np.linspace(
            float(scan.get("tau_lo", 0.5)), float(scan.get("tau_hi", 20.0)),
            int(scan.get("n_tau", 81)),
        )
        mu = np.linspace(
            float(scan.get("mu_lo", -80.0)), float(scan.get("mu_hi", -0.5)),
            int(scan.get("n_mu", 81)),
        )
        res = ensemble.joint_probability_map(
            tau, mu, omega_R=omega_r, D=d_ratio,
            n_t=int(scan.get("n_t", 2048)), workers=config.workers,
        )
        rows = (
            (res.tau_p[i], res.mu[j], res.p_joint[i, j])
            for i in range(tau.size)
            for j in range(mu.size)
        )
        write_csv(
            out / "joint_map.csv",
            ["pulse length in us; mu dimensionless; p_joint in [0, 1]"],
            ["tau_p_us", "mu", "p_joint"],
            rows,
        )
        imax = np.unravel_index(np.argmax(res.p_joint), res.p_joint.shape)
        return {
            "kind": kind,
            "max_p_joint": float(res.p_joint.max()),
            "argmax_tau_p": float(res.tau_p[imax[0]]),
            "argmax_mu": float(res.mu[imax[1]]),
        }
    raise ConfigError("scan.kind", f"unknown ensemble scan kind {kind!r}")


def _run_sequence_check(config: RunConfig, out: Path) -> dict:
    pulse = config.build_pulse()
    omega_r, d_ratio = config.build_atom()
    timing = config.build_timing(pulse)
    solved = None
    if timing.t4 is None:
        solved = sequence.solve_echo_time(timing)
        timing = sequence.with_echo_time(timing)
    residual = sequence.rephasing_residual(timing)
    scan = config.scan_section()
    lo, hi = rephasable_window(pulse, omega_r)
    width = hi - lo
    grid = np.linspace(
        float(scan.get("delta_lo", lo + 0.1 * width)),
        float(scan.get("delta_hi", hi - 0.1 * width)),
        int(scan.get("n_delta", 41)),
    )
    mode = scan.get("mode", "adiabatic")
    res = sequence.coherence_phase_scan(
        pulse, timing, omega_r, d_ratio, grid, mode=mode, n_t=int(scan.get("n_t", 8192))
    )
    write_csv(
        out / "coherence_scan.csv",
        ["offset in angular MHz (rad/us); factor dimensionless; phase in rad"],
        ["delta", "re_factor", "im_factor", "phase_unwrapped"],
        zip(res.delta, res.factor.real, res.factor.imag, res.phase_unwrapped),
    )
    flat = res.factor * np.exp(-2j * grid * timing.T)
    spread = float(np.max(np.abs(np.angle(flat / flat[grid.size // 2]))))
    summary = {
        "t4": timing.t4,
        "t4_solved": solved is not None,
        "residual": residual,
        "rephased": bool(abs(residual) < 1e-9),
        "mode": mode,
        "phase_spread_after_2dt_removal": spread,
    }
    return summary


def _run_phasematch(config: RunConfig, out: Path) -> dict:
    sec = config.data.get("phasematch", {})
    chirp_sign = sec.get("chirp_sign", "negative")
    k_mag = float(sec.get("k_mag", DEFAULT_K_MAG))
    length = float(sec.get("length", 1.0))
    preset = sec.get("preset")
    if preset:
        ws = phasematch.geometry_preset(preset, k_mag=k_mag, L=length)
    else:
        try:
            vecs = {key: np.asarray(sec[key], dtype=float) for key in ("k_s", "k_1", "k_2", "k_3")}
        except KeyError as exc:
            raise ConfigError(f"phasematch.{exc.args[0]}", "missing wavevector") from exc
        ws = phasematch.WaveVectorSet(L=length, **vecs)
    threshold = float(sec.get("threshold", 1.0))
    echoes = phasematch.echo_wavevectors(ws, chirp_sign)
    rows = []
    table = []
    summary_stages = {}
    for stage in sorted(echoes, reverse=True):
        k_e = echoes[stage]
        verdict = phasematch.is_silenced(k_e, ws.k_s_mag, ws.L, threshold)
        ratio = float(np.linalg.norm(k_e) / ws.k_s_mag)
        rows.append(
            (stage, k_e[0], k_e[1], k_e[2], ratio, verdict.mismatch / math.pi, verdict.silenced)
        )
        table.append(
            f"  stage {stage}: k_e = ({k_e[0]:.6g}, {k_e[1]:.6g}, {k_e[2]:.6g})  "
            f"|k_e|/k_s = {ratio:.6g}  mismatch*L/pi = {verdict.mismatch / math.pi:.6g}  "
            f"{'SILENCED' if verdict.silenced else 'emitted'}"
        )
        summary_stages[str(stage)] = {
            "k_e": [float(v) for v in k_e],
            "ke_over_ks": ratio,
            "mismatch_over_pi": verdict.mismatch / math.pi,
            "silenced": verdict.silenced,
        }
    write_csv(
        out / "phasematch.csv",
        ["wavevectors in rad/length; mismatch normalized by pi"],
        ["stage", "k_e_x", "k_e_y", "k_e_z", "ke_over_ks", "mismatch_over_pi", "silenced"],
        rows,
    )
    print(f"phase matching ({chirp_sign} chirp):")
    for line in table:
        print(line)
    return {"chirp_sign": chirp_sign, "stages": summary_stages}


def _slice_indices(alpha_z: np.ndarray, wanted) -> list[int]:
    return sorted({int(np.argmin(np.abs(alpha_z - w))) for w in wanted})


def _run_propagate(config: RunConfig, out: Path, return_result: bool = False):
    pulse = config.build_pulse()
    medium = config.build_medium()
    timing = config.build_timing(pulse)
    grids = config.build_grids()
    ctrl = maxwell.propagate_controls(medium, pulse, timing.centers, grids)
    alpha_z = medium.alpha_d * ctrl.z
    wanted = config.data.get("propagate", {}).get("slice_depths", [0.0, float(alpha_z[-1])])
    idx = _slice_indices(alpha_z, wanted)
    rows = []
    for fg in ctrl.fields:
        for i in idx:
            for k in range(fg.xi.size):
                v = fg.values[i, k]
                rows.append((alpha_z[i], fg.xi[k], v.real, v.imag, fg.pulse_index))
    write_csv(
        out / "field_slices.csv",
        ["depth as alpha_d*z (dimensionless); time in us; field in angular MHz"],
        ["z_alpha", "xi_us", "re_omega", "im_omega", "pulse_index"],
        rows,
    )
    summary = {"alpha_d_L": float(alpha_z[-1]), "pulses": {}}
    for fg in ctrl.fields:
        e = maxwell.field_energy(fg.values, fg.dt)
        summary["pulses"][str(fg.pulse_index)] = {
            "peak_in": float(np.abs(fg.values[0]).max()),
            "peak_out": float(np.abs(fg.values[-1]).max()),
            "energy_in": float(e[0]),
            "energy_out": float(e[-1]),
        }
    if return_result:
        return summary, ctrl
    return summary


def _run_rephasing_map(config: RunConfig, out: Path) -> dict:
    summary, ctrl = _run_propagate(config, out, return_result=True)
    medium = ctrl.medium
    sec = config.data.get("map", {})
    lo, hi = medium.spectrum.support()
    grid = np.linspace(
        float(sec.get("delta_lo", lo)), float(sec.get("delta_hi", hi)),
        int(sec.get("n_delta", 81)),
    )
    stride = int(sec.get("z_stride", 1))
    z_grid = ctrl.z[::stride]
    rmap = maxwell.rephasing_map(ctrl.fields, medium, grid, z_grid=z_grid)
    alpha_z = medium.alpha_d * rmap.z
    rows = (
        (rmap.delta[j], alpha_z[i], abs(rmap.r[i, j]) ** 2, np.angle(rmap.r[i, j]))
        for j in range(rmap.delta.size)
        for i in range(rmap.z.size)
    )
    write_csv(
        out / "rephasing_map.csv",
        ["offset in angular MHz (rad/us); depth as alpha_d*z; |R|^2 and arg R"],
        ["delta_mhz", "z_alpha", "abs_r2", "arg_r"],
        rows,
    )
    r2 = np.abs(rmap.r) ** 2
    return {
        "propagate": summary,
        "min_abs_r2_at_exit": float(r2[-1].min()),
        "min_abs_r2": float(r2.min()),
        "max_arg_spread_at_exit": float(np.ptp(np.angle(rmap.r[-1]))),
    }


def _run_echo(config: RunConfig, out: Path) -> dict:
    pulse = config.build_pulse()
    medium = config.build_medium()
    timing = config.build_timing(pulse)
    grids = config.build_grids()
    sec = config.data.get("signal", {})
    signal = ChirpedPulse(
        A0=float(sec.get("a0", 1e-3 * pulse.A0)),
        tau_p=float(sec.get("tau_s", timing.T / 6.0)),
        delta0=float(sec.get("delta0", 0.0)),
        mu=0.0,
        t_center=timing.t0,
        half_window=timing.T,
    )
    res = maxwell.weak_signal_echo(medium, pulse, timing, signal, grids)
    write_csv(
        out / "echo.csv",
        ["echo waveform at the exit face; time in us, field in angular MHz"],
        ["xi_us", "re_omega", "im_omega"],
        zip(res.echo_xi, res.echo_at_exit.real, res.echo_at_exit.imag),
    )
    write_csv(
        out / "efficiency.csv",
        ["depth as alpha_d*z; efficiency = echo energy / input signal energy"],
        ["z_alpha", "efficiency"],
        zip(res.alpha_z, res.efficiency),
    )
    best = int(np.argmax(res.efficiency))
    return {
        "t4": res.echo_time_solved,
        "echo_peak_time": res.echo_peak_time,
        "efficiency_at_exit": float(res.efficiency[-1]),
        "best_efficiency": float(res.efficiency[best]),
        "best_alpha_z": float(res.alpha_z[best]),
    }


_RUNNERS = {
    "pulse-scan": _run_pulse_scan,
    "ensemble-scan": _run_ensemble_scan,
    "sequence-check": _run_sequence_check,
    "phasematch": _run_phasematch,
    "propagate": _run_propagate,
    "rephasing-map": _run_rephasing_map,
    "echo": _run_echo,
}


def run(config: RunConfig, out_dir: str | Path | None = None) -> dict:
    """Execute one configured scenario; returns the summary dict."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = _RUNNERS[config.scenario](config, out)
    dump_manifest(config, out / "manifest.toml")
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    data = config.data
    data.setdefault("run", {})
    data["run"]["scenario"] = args.scenario
    if args.out is not None:
        data["run"]["out_dir"] = args.out
    if args.workers is not None:
        data["run"]["workers"] = args.workers
    if args.preset is not None:
        if args.scenario == "phasematch":
            data.setdefault("phasematch", {})["preset"] = args.preset
            if args.preset not in phasematch.GEOMETRY_PRESETS:
                raise ConfigError("phasematch.preset", f"unknown geometry preset {args.preset!r}")
            data["phasematch"].setdefault(
                "chirp_sign", "negative" if args.preset.endswith("negative") else "positive"
            )
        else:
            preset = MATERIAL_PRESETS.get(args.preset)
            if preset is None:
                raise ConfigError("material.preset", f"unknown material preset {args.preset!r}")
            data.setdefault("material", {})["preset"] = args.preset
            data.setdefault("atom", {})
            data["atom"].setdefault("omega_r", preset.omega_R)
            data["atom"].setdefault("d_ratio", preset.D)
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chirpecho",
        description="Chirped-pulse coherence rephasing and spin-wave storage simulator",
    )
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", type=str, default=None, help="TOML configuration file")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None, help="worker processes for scans")
        p.add_argument("--preset", type=str, default=None,
                       help="geometry preset (phasematch) or material preset (other scenarios)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            config = load_config(args.config)
        elif args.scenario == "phasematch" and args.preset is not None:
            config = RunConfig(data={"run": {"scenario": "phasematch"}})
        else:
            print("error: --config is required for this scenario", file=sys.stderr)
            return 1
        config = _apply_overrides(config, args)
        run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationError, ArithmeticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
