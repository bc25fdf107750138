"""Exception taxonomy shared by all ttslab modules."""


class TtslabError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(TtslabError):
    """Operand shapes are incompatible for the requested operation."""


class ContractError(TtslabError):
    """A documented precondition was violated by the caller."""


class VocabularyError(TtslabError):
    """A token id falls outside the vocabulary."""


class UnknownSpeakerError(TtslabError):
    """A speaker id has no head in the loaded model."""


class DegenerateInputError(TtslabError):
    """An input expands to an empty sequence and cannot be synthesized."""


class CheckpointFormatError(TtslabError):
    """The file is not a recognizable checkpoint container."""


class CheckpointCorruptError(TtslabError):
    """The container header is valid but the payload is inconsistent."""


class CheckpointMismatchError(TtslabError):
    """A checkpoint is incompatible with the expected model configuration."""


class ConfigError(TtslabError):
    """A run configuration is invalid (unknown key, bad type, bad combination)."""


class DependencyError(TtslabError):
    """A required upstream artifact (file produced by an earlier step) is missing."""


class MeasurementQualityError(TtslabError):
    """Timings are too close to the clock resolution to be trusted."""


class ParallelismError(TtslabError):
    """Parallel execution was detected where single-threaded timing is required."""
