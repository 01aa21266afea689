from .kernels import KernelSpec, gram, kernel_eval, resolve_gamma
from .smo import BinarySvm, SvmTrainConfig, train_binary, train_binary_pm1
from .multiclass import (
    DecisionReport,
    SvmModel,
    decision_matrix,
    predict,
    predict_batch,
    train_multiclass,
)
from .io import load_model, model_from_json, model_to_json, save_model

__all__ = [
    "KernelSpec", "gram", "kernel_eval", "resolve_gamma",
    "BinarySvm", "SvmTrainConfig", "train_binary", "train_binary_pm1",
    "DecisionReport", "SvmModel", "decision_matrix", "predict", "predict_batch",
    "train_multiclass",
    "load_model", "model_from_json", "model_to_json", "save_model",
]
