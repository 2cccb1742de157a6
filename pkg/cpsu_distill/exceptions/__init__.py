class CPSUError(Exception):
    def __init__(self, message):
        self.message = message

    def __str__(self):
        return self.message


class ConfigError(CPSUError):
    """Invalid or unknown configuration value."""


class EpisodeFinishedError(CPSUError):
    """Raised when stepping an episode that already terminated or was truncated."""


class NumericError(CPSUError):
    """Non-finite values in the simulator state or in a policy input."""


class EmptyDatasetError(CPSUError):
    """No samples (or no episodes) left to work with."""


class SchemaError(CPSUError):
    """A document does not match its schema.

    Attributes:
        path: location of the offending element, e.g. ``/nodes/3/left``.
    """

    def __init__(self, message, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class MalformedDocumentError(SchemaError):
    pass


class UnsupportedVersionError(SchemaError):
    pass


class DimensionError(CPSUError):
    """Layer shapes of an MLP do not chain.

    Attributes:
        layer: index of the offending layer.
    """

    def __init__(self, message, layer: int):
        super().__init__(f"layer {layer}: {message}")
        self.layer = layer


class NonFiniteWeightsError(CPSUError):
    pass


class OutputError(CPSUError):
    """A result file could not be written.

    Attributes:
        path: the file that failed.
    """

    def __init__(self, message, path):
        super().__init__(f"{path}: {message}")
        self.path = path
