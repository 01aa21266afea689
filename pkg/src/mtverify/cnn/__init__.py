from .ops import (
    cross_entropy_loss_grad,
    cross_entropy_per_instance,
    fill_border,
    normalize_batch,
    normalize_instance,
)
from .model import ArchDescriptor, CnnModel, build_model
from .train import (
    LR_VARIANTS,
    SHARD_COUNT,
    EvalResult,
    TrainConfig,
    TrainRun,
    evaluate,
    shard_indices,
    train,
)
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "cross_entropy_loss_grad", "cross_entropy_per_instance", "fill_border",
    "normalize_batch", "normalize_instance",
    "ArchDescriptor", "CnnModel", "build_model",
    "LR_VARIANTS", "SHARD_COUNT", "EvalResult", "TrainConfig", "TrainRun",
    "evaluate", "shard_indices", "train",
    "load_checkpoint", "save_checkpoint",
]
