"""score_exporter: query-model training and artifact export for prunelab."""

from .datasets import load, parse_spec
from .errors import DatasetSpecError, ExporterError, TrainingDiverged
from .export import ExportBundle, export_run
from .model import QueryModel

__version__ = "0.1.0"
