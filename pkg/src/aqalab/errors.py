"""Exception types shared across the package."""


class AqaLabError(Exception):
    """Base class for all package errors."""


class DecodeError(AqaLabError):
    """Audio file exists but cannot be decoded."""


class EmptyAudio(AqaLabError):
    """Decoded audio contains zero samples."""


class ConfigError(AqaLabError):
    """Invalid configuration value or unknown variant."""


class ShapeError(AqaLabError):
    """Array/tensor shape violates an operation's contract."""


class DimError(AqaLabError):
    """Embedding width mismatch between components."""


class FormatError(AqaLabError):
    """Persisted record is corrupt or not in the expected format."""


class VocabError(AqaLabError):
    """Token id outside the tokenizer vocabulary."""


class LengthError(AqaLabError):
    """Sequence exceeds the model's maximum length."""


class NaNError(AqaLabError):
    """A loss or weight became non-finite (diverged run)."""


class DataError(AqaLabError):
    """Dataset row references a resource that cannot be resolved."""


class TemplateError(AqaLabError):
    """Prompt template misses its placeholder or received an empty caption."""


class ParseError(AqaLabError):
    """No question/answer pairs could be extracted from a transcript."""


class SchemaError(AqaLabError):
    """Task record misses required fields or carries an unknown kind."""


class TransportError(AqaLabError):
    """LLM endpoint unreachable or request failed at the HTTP layer."""


class RateLimited(TransportError):
    """LLM endpoint asked us to back off; retried by the caller."""


class MalformedResponse(AqaLabError):
    """LLM endpoint answered but the payload is not a usable completion."""
