"""Static figures from the phaseless-stft CSV artifacts."""

from .bounds_figure import plot_bounds
from .heatmap_figure import plot_heatmap
from .io import PlotSpec, SchemaError, read_csv_columns

__version__ = "0.1.0"
