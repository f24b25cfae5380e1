"""Read-only renderer for the simulation CLI's CSV/JSON run outputs."""

from .renderer import FigurePreset, RenderResult, SchemaMismatch, render

__version__ = "0.1.0"

__all__ = ["FigurePreset", "RenderResult", "SchemaMismatch", "render"]
