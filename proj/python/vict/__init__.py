"""Test-time visual in-context tuning on a toy canvas transformer."""

from ._vict import (
    CORRUPTIONS,
    GRADCHECK_TOLERANCE,
    TASKS,
    Checkpoint,
    VictError,
    VictFormatError,
    VictNumericError,
    VictShapeError,
    VictValueError,
    adapt_and_predict,
    bench,
    corrupt,
    cycle_loss,
    evaluate,
    frozen_predict,
    generate,
    gradcheck,
    load_checkpoint,
    pretrain,
)

__all__ = [
    "CORRUPTIONS",
    "GRADCHECK_TOLERANCE",
    "TASKS",
    "Checkpoint",
    "VictError",
    "VictFormatError",
    "VictNumericError",
    "VictShapeError",
    "VictValueError",
    "adapt_and_predict",
    "bench",
    "corrupt",
    "cycle_loss",
    "evaluate",
    "frozen_predict",
    "generate",
    "gradcheck",
    "load_checkpoint",
    "pretrain",
]
