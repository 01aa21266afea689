"""Metamorphic relations, transforms, and verdicts."""

from .cnn_mrs import (
    SIGMA_FACTOR,
    TEST_DEVIATION_THRESHOLD,
    TEST_SCALES,
    SigmaMaxReport,
    calibrate_sigma_threshold,
    run_cnn_test_only_mr,
    run_cnn_training_mr,
    training_variants,
)
from .equivariance import EquivarianceReport, check_conv_equivariance, conv2d_forward
from .svm_mrs import SvmPrediction, applicable_svm_mrs, run_svm_mr
from .transforms import (
    CHANNEL_ORDERS,
    DIHEDRAL_VARIANTS,
    TransformSpec,
    dihedral_apply,
    dihedral_transform,
    normalize_instances,
    permute_channels,
    permute_features,
    scale_instances,
    shift_features,
    shuffle_instances,
)
from .verdicts import CNN_MRS, SVM_MRS, MrId, MrVerdict

__all__ = [
    "CHANNEL_ORDERS",
    "CNN_MRS",
    "DIHEDRAL_VARIANTS",
    "SIGMA_FACTOR",
    "SVM_MRS",
    "TEST_DEVIATION_THRESHOLD",
    "TEST_SCALES",
    "EquivarianceReport",
    "MrId",
    "MrVerdict",
    "SigmaMaxReport",
    "SvmPrediction",
    "TransformSpec",
    "applicable_svm_mrs",
    "calibrate_sigma_threshold",
    "check_conv_equivariance",
    "conv2d_forward",
    "dihedral_apply",
    "dihedral_transform",
    "normalize_instances",
    "permute_channels",
    "permute_features",
    "run_cnn_test_only_mr",
    "run_cnn_training_mr",
    "run_svm_mr",
    "scale_instances",
    "shift_features",
    "shuffle_instances",
    "training_variants",
]
