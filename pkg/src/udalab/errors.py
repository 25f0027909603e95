"""Exception hierarchy shared across the package."""


class UdalabError(Exception):
    """Base class for all package errors."""


class DimensionError(UdalabError):
    """Array shapes violate an operation's contract."""


class NumericDomainError(UdalabError):
    """Value outside the numeric domain of an operation (log/exp, non-finite input)."""


class ContractError(UdalabError):
    """A stated precondition was violated by the caller."""


class PoisonedUpdateError(UdalabError):
    """Non-finite gradient reached the optimizer; the step was aborted."""


class DegenerateBatchError(UdalabError):
    """A batch-level quantity (e.g. importance weights) collapsed to zero."""


class DegenerateDatasetError(UdalabError):
    """A dataset transform produced an empty class."""


class UnboundedWeightError(UdalabError):
    """Density-ratio weights requested outside the source support."""


class IdxFormatError(UdalabError):
    """Malformed IDX container (bad magic or header)."""


class IdxLengthError(IdxFormatError):
    """IDX payload length disagrees with the header dimensions."""
