"""Rendering of nvfiber sweep CSVs into publication figure panels."""

from .render import FIGURE_SPECS, FigureJob, RenderResult, SchemaError, render

__version__ = "0.1.0"
