"""Figure rendering for the chirped-pulse rephasing simulator's CSV files."""

from .render import KINDS, FigureSpec, RenderReport, SchemaError, read_csv, render

__version__ = "0.1.0"
