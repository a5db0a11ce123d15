"""Error taxonomy shared across the pipeline.

Every exception carries an ``exit_code`` used by the CLI: 2 for input or
validation problems, 3 for numerical failures.
"""


class LaneDepError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 2


class DegenerateTrace(LaneDepError):
    """Trace is too short or has no forward travel."""


class FilterRejected(LaneDepError):
    """Event failed one of the acceptance criteria for the corpus.

    :param criterion: name of the violated criterion, e.g. ``min_duration``.
    """

    def __init__(self, criterion: str, detail: str = ""):
        self.criterion = criterion
        msg = criterion if not detail else f"{criterion}: {detail}"
        super().__init__(msg)


class EmptyCorpus(LaneDepError):
    """Operation requires at least two feature vectors."""


class DegenerateBounds(LaneDepError):
    """A bounding-box dimension has zero width."""


class InvalidFeature(LaneDepError):
    """Feature vector violates a basic domain constraint."""


class InvalidSpeed(LaneDepError):
    """Longitudinal speed must be strictly positive."""


class NotEnoughData(LaneDepError):
    """Too few samples for the requested number of mixture components."""


class OutOfBounds(LaneDepError):
    """A feature vector lies outside the model's bounding box.

    :param index: position of the offending vector in the input batch.
    """

    def __init__(self, index: int, detail: str = ""):
        self.index = index
        msg = f"feature vector {index} outside model bounds"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class EmptyComponent(LaneDepError):
    """A mixture component lost all of its responsibility mass."""

    exit_code = 3


class NumericalUnderflow(LaneDepError):
    """A quantity underflowed below the supported range."""

    exit_code = 3


class NonFinite(LaneDepError):
    """A NaN or infinity appeared where a finite value is required."""

    exit_code = 3


class AcceptanceStall(LaneDepError):
    """Rejection sampling accepted nothing for too many batches."""

    exit_code = 3


class UnstableGains(UserWarning):
    """Closed-loop matrix has an eigenvalue with non-negative real part."""
