"""Exception hierarchy for the claim-validation engine."""


class ClaimGraphError(Exception):
    """Base class for all domain errors raised by this package."""


class EmptyArticle(ClaimGraphError):
    """Article has neither title nor body text."""


class MalformedRecord(ClaimGraphError):
    """A line in an ingestion or dataset file could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class IoFailure(ClaimGraphError):
    """Underlying file operation failed."""


class EmptySections(ClaimGraphError):
    """An article was submitted to the store without any sections."""


class UnknownSection(ClaimGraphError):
    """Referenced section id does not exist in the store."""


class UnknownEntity(ClaimGraphError):
    """Referenced entity id does not exist in the store (strict mode only)."""


class CorruptSnapshot(ClaimGraphError):
    """Snapshot file failed magic, structure or checksum validation."""


class MalformedGazetteer(ClaimGraphError):
    """Gazetteer file line does not match alias<TAB>entity_id<TAB>label."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class LinkerUnavailable(ClaimGraphError):
    """External entity-linking service could not be reached."""


class MalformedResponse(ClaimGraphError):
    """External service answered with a payload that violates its protocol."""


class ProviderUnavailable(ClaimGraphError):
    """Remote scoring provider could not be reached or answered 503."""


class DimensionMismatch(ClaimGraphError):
    """Embeddings of different dimensions were combined."""


class NonFiniteLogit(ClaimGraphError):
    """Softmax input contained NaN or infinity."""


class EmptyEntitySet(ClaimGraphError):
    """Candidate construction requires at least one entity."""


class LengthMismatch(ClaimGraphError):
    """Gold and predicted label lists differ in length."""
