"""Exception types shared across the package."""


class DataError(ValueError):
    """A dataset, container file, or record set is malformed or empty."""


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss or non-finite parameters."""
