class ExporterError(Exception):
    """Base class for exporter failures."""


class DatasetSpecError(ExporterError):
    """The dataset spec string cannot be resolved."""


class TrainingDiverged(ExporterError):
    """Optimization produced non-finite losses; partial outputs were removed."""
