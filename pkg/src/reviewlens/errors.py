"""Exception types shared across the pipeline."""


class ReviewlensError(Exception):
    """Base class for all pipeline errors."""


class MalformedRecord(ReviewlensError):
    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class GatingViolation(ReviewlensError):
    """Rationale marked on a sentence that is neither Positive nor Negative."""


class DuplicateRecord(ReviewlensError):
    pass


class InsufficientAnnotators(ReviewlensError):
    pass


class DegenerateStratum(ReviewlensError):
    """A class required for stratification has no members."""


class InsufficientPopulation(ReviewlensError):
    pass


class ZeroVariance(ReviewlensError):
    pass


class OutOfRangeScore(ReviewlensError):
    pass


class ModelNotFound(ReviewlensError):
    pass


class OfflineCacheMiss(ReviewlensError):
    """A model id that would require a network download; training runs offline."""


class NonFiniteLoss(ReviewlensError):
    pass


class MissingCategoryPrediction(ReviewlensError):
    pass


class EmptyGroup(ReviewlensError):
    pass


class ParseFailure(ReviewlensError):
    pass


class ClientUnavailable(ReviewlensError):
    pass


class UnknownRound(ReviewlensError):
    pass


class NotInPanel(ReviewlensError):
    pass


class NotAssigned(ReviewlensError):
    pass


class DuplicateSubmission(ReviewlensError):
    pass


class RoundClosed(ReviewlensError):
    pass


class PanelTooSmall(ReviewlensError):
    pass
