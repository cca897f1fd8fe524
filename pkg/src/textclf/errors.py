"""Exception hierarchy shared by every textclf module."""


class TextClfError(Exception):
    """Base class for all errors raised by textclf."""


class DimensionError(TextClfError, ValueError):
    pass


class ContractError(TextClfError, ValueError):
    pass


class WindowError(DimensionError):
    """Convolution window longer than the sequence it slides over."""


class InputEncodingError(TextClfError, ValueError):
    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class ParseError(TextClfError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class LabelError(TextClfError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class ConfigError(TextClfError, ValueError):
    pass


class UndefinedMetricError(TextClfError, ValueError):
    pass


class CheckpointError(TextClfError):
    pass


class MagicError(CheckpointError):
    """File does not start with the expected magic bytes or version."""


class ManifestError(CheckpointError):
    """Metadata or tensor payload does not match the declared manifest."""


class VocabHashError(CheckpointError):
    """Checkpoint was trained against a different vocabulary."""
