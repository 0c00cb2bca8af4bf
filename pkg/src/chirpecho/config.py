"""Run configuration: TOML loading, validation, manifest echo.

A run is described by a plain TOML file; the manifest written next to
the outputs is itself a valid configuration that reproduces the run
byte-for-byte when fed back in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .ensemble import EnsembleSpec
from .maxwell import MediumSpec, SolverGrids
from .pulses import ChirpedPulse
from .sequence import SequenceTiming

__all__ = ["ConfigError", "RunConfig", "load_config", "dump_manifest"]

SCENARIOS = (
    "pulse-scan",
    "ensemble-scan",
    "sequence-check",
    "phasematch",
    "propagate",
    "rephasing-map",
    "echo",
)


class ConfigError(ValueError):
    """Configuration problem, carrying the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _section(data: dict, name: str) -> dict:
    sec = data.get(name)
    if sec is None:
        raise ConfigError(name, "missing section")
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be a table")
    return sec


def _num(sec: dict, section: str, key: str, default=None) -> float:
    if key not in sec:
        if default is None:
            raise ConfigError(f"{section}.{key}", "missing required value")
        return float(default)
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{section}.{key}", f"must be a number, got {v!r}")
    return float(v)


def _int(sec: dict, section: str, key: str, default=None) -> int:
    if key not in sec:
        if default is None:
            raise ConfigError(f"{section}.{key}", "missing required value")
        return int(default)
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{section}.{key}", f"must be an integer, got {v!r}")
    return v


def _str(sec: dict, section: str, key: str, default=None) -> str:
    if key not in sec:
        if default is None:
            raise ConfigError(f"{section}.{key}", "missing required value")
        return default
    v = sec[key]
    if not isinstance(v, str):
        raise ConfigError(f"{section}.{key}", f"must be a string, got {v!r}")
    return v


@dataclass
class RunConfig:
    """Resolved configuration; ``data`` is the canonical nested dict the
    manifest echoes back."""

    data: dict[str, Any]
    source: Path | None = None

    @property
    def scenario(self) -> str:
        sc = _str(_section(self.data, "run"), "run", "scenario")
        if sc not in SCENARIOS:
            raise ConfigError("run.scenario", f"unknown scenario {sc!r}; expected one of {SCENARIOS}")
        return sc

    @property
    def workers(self) -> int:
        n = _int(self.data.get("run", {}), "run", "workers", 1)
        if n < 1:
            raise ConfigError("run.workers", "must be at least 1")
        return n

    @property
    def out_dir(self) -> str:
        return _str(self.data.get("run", {}), "run", "out_dir", "out")

    def build_pulse(self) -> ChirpedPulse:
        sec = _section(self.data, "pulse")
        a0 = _num(sec, "pulse", "a0")
        tau_p = _num(sec, "pulse", "tau_p")
        if tau_p <= 0:
            raise ConfigError("pulse.tau_p", "must be positive")
        hw = _num(sec, "pulse", "half_window", 8.0 * tau_p)
        try:
            return ChirpedPulse(
                A0=a0,
                tau_p=tau_p,
                delta0=_num(sec, "pulse", "delta0"),
                mu=_num(sec, "pulse", "mu"),
                t_center=_num(sec, "pulse", "t_center", 0.0),
                half_window=hw,
            )
        except ValueError as exc:
            raise ConfigError("pulse", str(exc)) from exc

    def build_atom(self) -> tuple[float, float]:
        sec = _section(self.data, "atom")
        omega_r = _num(sec, "atom", "omega_r")
        if omega_r <= 0:
            raise ConfigError("atom.omega_r", "must be positive (angular MHz)")
        return omega_r, _num(sec, "atom", "d_ratio", 1.0)

    def build_timing(self, pulse: ChirpedPulse) -> SequenceTiming:
        sec = _section(self.data, "timing")
        kwargs = dict(
            t0=_num(sec, "timing", "t0"),
            t1=_num(sec, "timing", "t1"),
            t2=_num(sec, "timing", "t2"),
            t3=_num(sec, "timing", "t3"),
            T=_num(sec, "timing", "T", pulse.half_window / 4.0),
            T_prime=_num(sec, "timing", "T_prime", pulse.half_window),
            chirp_sign=_str(sec, "timing", "chirp_sign", "negative" if pulse.mu < 0 else "positive"),
        )
        if "t4" in sec:
            kwargs["t4"] = _num(sec, "timing", "t4")
        try:
            return SequenceTiming(**kwargs)
        except ValueError as exc:
            raise ConfigError("timing", str(exc)) from exc

    def build_spectrum(self) -> EnsembleSpec:
        sec = _section(self.data, "medium")
        kind = _str(sec, "medium", "spectrum", "uniform")
        sigma_s = _num(sec, "medium", "sigma_s", 0.0)
        try:
            if kind == "uniform":
                return EnsembleSpec.uniform(
                    _num(sec, "medium", "delta_lo"),
                    _num(sec, "medium", "delta_hi"),
                    sigma_s=sigma_s,
                )
            if kind == "gaussian":
                return EnsembleSpec.gaussian(_num(sec, "medium", "sigma_delta"), sigma_s=sigma_s)
        except ValueError as exc:
            raise ConfigError("medium", str(exc)) from exc
        raise ConfigError("medium.spectrum", f"unknown spectrum kind {kind!r}")

    def build_medium(self) -> MediumSpec:
        sec = _section(self.data, "medium")
        omega_r, d_ratio = self.build_atom()
        try:
            return MediumSpec(
                alpha_d=_num(sec, "medium", "alpha_d"),
                omega_R=omega_r,
                D=d_ratio,
                spectrum=self.build_spectrum(),
                L=_num(sec, "medium", "length"),
            )
        except ValueError as exc:
            raise ConfigError("medium", str(exc)) from exc

    def build_grids(self) -> SolverGrids:
        sec = self.data.get("grids", {})
        try:
            return SolverGrids(
                n_z=_int(sec, "grids", "n_z", 101),
                n_t=_int(sec, "grids", "n_t", 4096),
                n_delta=_int(sec, "grids", "n_delta", 201),
                n_t_weak=_int(sec, "grids", "n_t_weak", 2048),
            )
        except ValueError as exc:
            raise ConfigError("grids", str(exc)) from exc

    def scan_section(self) -> dict:
        return self.data.get("scan", {})


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(str(path), "config file not found")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"invalid TOML: {exc}")
    return RunConfig(data=data, source=path)


def _toml_scalar(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            raise ValueError(f"cannot serialize {v} to TOML")
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(x) for x in v) + "]"
    raise ValueError(f"cannot serialize {type(v).__name__} to TOML")


def dump_manifest(config: RunConfig, path: str | Path) -> None:
    """Write the resolved configuration back out as a valid TOML file."""
    lines: list[str] = ["# run manifest: feed back via --config to reproduce"]
    for section, content in config.data.items():
        if not isinstance(content, dict):
            raise ValueError(f"top-level entry {section!r} is not a table")
        lines.append("")
        lines.append(f"[{section}]")
        for key, v in content.items():
            lines.append(f"{key} = {_toml_scalar(v)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
