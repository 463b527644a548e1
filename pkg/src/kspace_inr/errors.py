"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition or invariant."""


class ShapeError(ValidationError):
    """Array shapes are inconsistent with each other or with the contract."""


class CalibrationError(RuntimeError):
    """GRAPPA calibration cannot be performed on the given geometry."""


class DatasetFormatError(RuntimeError):
    """A dataset or checkpoint file does not match the expected schema."""
