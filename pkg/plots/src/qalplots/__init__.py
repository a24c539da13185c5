"""Figure rendering for benchmark CSV exports.

Three renderers, one per figure type: accuracy-vs-queries curves with
one-sigma bands, decision-boundary heatmaps with numbered query markers,
and query-class-composition bars.  The scripts never recompute results;
they draw exactly what the CSVs contain and record input digests in a
`.sha256` sidecar next to each image.
"""

from .bias import plot_bias, render_bias
from .boundary import plot_boundary, render_boundary
from .curves import plot_curves, render_curves
from .io import (CsvError, check_antipodal, load_bias, load_curves, load_grid,
                 load_queries, write_sidecar)

__all__ = [
    "CsvError", "check_antipodal", "load_bias", "load_curves", "load_grid",
    "load_queries", "plot_bias", "plot_boundary", "plot_curves",
    "render_bias", "render_boundary", "render_curves", "write_sidecar",
]

__version__ = "0.1.0"
