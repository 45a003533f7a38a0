"""Figure emitter for archived pseudospectral-run containers.

Reads the on-disk container format (a directory with ``manifest.json`` plus
one raw little-endian float64/complex128 ``.bin`` file per dataset) with its
own self-contained reader and renders deterministic PNG panels: orbital
densities, pair-density and exchange heatmaps, and sideband spectra.
"""

__version__ = "0.1.0"

from .reader import BoxError, RunBox, select_snapshot
from .render import PANELS, FigureRequest, figure_set, render

__all__ = [
    "BoxError",
    "FigureRequest",
    "PANELS",
    "RunBox",
    "figure_set",
    "render",
    "select_snapshot",
    "__version__",
]
