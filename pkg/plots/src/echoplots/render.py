"""Render simulation CSV outputs into fixed-layout figures.

Three figure kinds cover the simulator's data products:

* ``lines``: first column is the x axis, every further column a curve
  (eigenvalue traces, population scans).
* ``contour``: three columns (x, y, value) on a product grid, filled
  contours with a fixed [0, 1] probability scale (joint-probability maps).
* ``heatmap-pair``: the rephasing-map schema ``delta_mhz,z_alpha,abs_r2,
  arg_r``; two panels showing |R|^2 on [0, 1] with the 0.99 iso-line
  overlaid, and arg R on [-pi, pi].

Rendering is a pure file-to-file operation with fixed canvas sizes and
color limits, so figures from different runs are directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FigureSpec", "SchemaError", "render", "read_csv", "KINDS"]

KINDS = ("lines", "contour", "heatmap-pair")
HEATMAP_HEADER = ("delta_mhz", "z_alpha", "abs_r2", "arg_r")

_FIGSIZES = {"lines": (6.4, 4.0), "contour": (6.4, 4.8), "heatmap-pair": (9.6, 4.0)}
_DPI = 150


class SchemaError(ValueError):
    """The CSV header does not match the declared figure kind."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSV, figure kind, labels, output path."""

    input: str
    kind: str
    output: str
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Parse a simulator CSV: '#' comment lines, a header row, numeric data."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: no data")
    header = [c.strip() for c in rows[0].split(",")]
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in rows[1:]])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric data ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows")
    return header, data


def _validate(spec: FigureSpec, header: list[str]) -> None:
    if spec.kind == "lines":
        if len(header) < 2:
            raise SchemaError("lines figures need an x column plus at least one series")
    elif spec.kind == "contour":
        if len(header) != 3:
            raise SchemaError(
                f"contour figures need exactly 3 columns (x, y, value), got {header}"
            )
    elif spec.kind == "heatmap-pair":
        if tuple(header) != HEATMAP_HEADER:
            raise SchemaError(
                f"heatmap-pair figures need the header {','.join(HEATMAP_HEADER)}, "
                f"got {','.join(header)}"
            )


def _product_grid(data: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reshape (x, y, v...) rows on a product grid into axes and value planes."""
    x = np.unique(data[:, 0])
    y = np.unique(data[:, 1])
    if x.size * y.size != data.shape[0]:
        raise SchemaError("rows do not form a full product grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    planes = data[order, 2:].reshape(x.size, y.size, -1)
    return x, y, planes


@dataclass(frozen=True)
class RenderReport:
    """What was written, for callers that verify figures."""

    output: str
    width_px: int
    height_px: int
    n_series: int = 0
    iso_segments: int = 0


def render(spec: FigureSpec) -> RenderReport:
    """Draw the figure described by ``spec`` and return a report."""
    header, data = read_csv(spec.input)
    _validate(spec, header)
    fig = plt.figure(figsize=_FIGSIZES[spec.kind], dpi=_DPI)
    n_series = 0
    iso_segments = 0

    if spec.kind == "lines":
        ax = fig.add_subplot(111)
        x = data[:, 0]
        for j in range(1, data.shape[1]):
            ax.plot(x, data[:, j], label=header[j])
            n_series += 1
        ax.set_xlabel(spec.xlabel or header[0])
        ax.set_ylabel(spec.ylabel)
        ax.legend(fontsize=8)
    elif spec.kind == "contour":
        ax = fig.add_subplot(111)
        x, y, planes = _product_grid(data)
        v = planes[:, :, 0]
        cs = ax.contourf(x, y, v.T, levels=np.linspace(0.0, 1.0, 21), cmap="viridis")
        fig.colorbar(cs, ax=ax, label=header[2])
        ax.set_xlabel(spec.xlabel or header[0])
        ax.set_ylabel(spec.ylabel or header[1])
    else:  # heatmap-pair
        ax1 = fig.add_subplot(121)
        ax2 = fig.add_subplot(122)
        delta, z, planes = _product_grid(data)
        r2 = planes[:, :, 0].T  # (z, delta)
        arg = planes[:, :, 1].T
        m1 = ax1.pcolormesh(delta, z, r2, vmin=0.0, vmax=1.0, shading="auto")
        iso = ax1.contour(delta, z, r2, levels=[0.99], colors="k", linewidths=1.0)
        iso_segments = sum(len(p.vertices) > 1 for p in iso.get_paths())
        fig.colorbar(m1, ax=ax1, label="abs_r2")
        m2 = ax2.pcolormesh(
            delta, z, arg, vmin=-np.pi, vmax=np.pi, cmap="twilight", shading="auto"
        )
        fig.colorbar(m2, ax=ax2, label="arg_r [rad]")
        for ax in (ax1, ax2):
            ax.set_xlabel(spec.xlabel or header[0])
        ax1.set_ylabel(spec.ylabel or header[1])

    if spec.title:
        fig.suptitle(spec.title)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)  # fixed canvas, no tight bbox: deterministic dimensions
    plt.close(fig)
    w, h = fig.get_size_inches() * _DPI
    return RenderReport(
        output=str(out),
        width_px=int(round(w)),
        height_px=int(round(h)),
        n_series=n_series,
        iso_segments=iso_segments,
    )
