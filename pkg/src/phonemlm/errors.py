"""Exception types shared across pipeline stages.

Every error carries a short ``kind`` string so the command-line front end can
report failures in a single machine-parsable line.
"""


class PhonemlmError(Exception):
    kind = "error"


class UnknownLanguageError(PhonemlmError, ValueError):
    kind = "unknown_language"


class FormatError(PhonemlmError, ValueError):
    kind = "format_error"


class ConfigError(PhonemlmError, ValueError):
    kind = "config_error"


class MissingInputError(PhonemlmError, FileNotFoundError):
    kind = "missing_input"


class SegmentationError(PhonemlmError, ValueError):
    kind = "segmentation_error"


class MetricError(PhonemlmError, ValueError):
    kind = "metric_error"


class CheckpointError(PhonemlmError, ValueError):
    kind = "checkpoint_error"
