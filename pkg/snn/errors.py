"""
Exception types shared by every package in the toolkit.

Shape and range problems subclass ValueError so callers that only know the
builtin contract still catch them.
"""

from typing import List, Optional


class SnnError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(SnnError, ValueError):
    """Tensor lengths or shapes do not line up."""


class NumericError(SnnError, ValueError):
    """A value that must be finite is NaN or infinite."""


class RangeError(SnnError, ValueError):
    """A parameter or input lies outside its allowed interval."""


class EmptyScopeError(SnnError, ValueError):
    """A spike-rate scope selects no neurons."""


class UndefinedBaselineError(SnnError, ValueError):
    """A ratio was requested against a zero baseline."""


class TrainingDivergenceError(SnnError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"Training diverged at epoch {epoch}: loss={loss}")


class IdxFormatError(SnnError):
    """An IDX file is malformed; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


class CheckpointFormatError(SnnError):
    """A checkpoint file has the wrong magic, version or payload length."""


class ConfigError(SnnError):
    """Experiment configuration is invalid; ``problems`` lists every issue found."""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        joined = "\n  - ".join(self.problems)
        super().__init__(f"Invalid experiment configuration:\n  - {joined}")


class StageError(SnnError):
    """A pipeline stage failed; wraps the original exception with the stage label."""

    def __init__(self, stage: str, cause: Optional[BaseException] = None):
        self.stage = stage
        self.cause = cause
        super().__init__(f"Stage '{stage}' failed: {cause}")


class DegenerateScaleWarning(UserWarning):
    """Quantization mapped every entry to level 0, so the scale could not be re-fit."""
