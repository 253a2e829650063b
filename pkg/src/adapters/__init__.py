"""Adapters for file formats and configuration sources."""

from .csv_adapter import RegimeMapCSVWriter, TrajectoryCSVWriter, read_trajectory_csv
from .svg_adapter import MatplotlibSVGRenderer
from .report_adapter import JSONReportStore
from .config_adapter import JSONConfigSource

__all__ = [
    "TrajectoryCSVWriter",
    "RegimeMapCSVWriter",
    "read_trajectory_csv",
    "MatplotlibSVGRenderer",
    "JSONReportStore",
    "JSONConfigSource",
]
