"""Metamorphic relations over the max-margin classifier.

A subject is any object exposing

    kernel_kind                      -> "linear" | "rbf"
    fit_predict(train, test)         -> (model_handle, SvmPrediction)
    predict(model_handle, test)      -> SvmPrediction

The relations compare the base prediction against a follow-up run:

    svm-1  permute every feature column of train and test, retrain;
    svm-2  rotate the training rows, retrain;
    svm-3  shift every feature by a constant, retrain (RBF only);
    svm-4  on the already trained model, check
           D(2x) - D(x) == D(3x) - D(2x) per pair (linear only).

For the retraining relations the follow-up must reproduce the predicted
class of every test instance and every pairwise decision value within
the tolerance; any subject exception yields an inconclusive verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .transforms import (
    default_feature_permutation,
    default_row_rotation,
    permute_features,
    scale_instances,
    shift_features,
    shuffle_instances,
)
from .verdicts import MrId, MrVerdict

DEFAULT_TOLERANCE = 1e-6
DEFAULT_SHIFT = 3.0
SCALE_STEPS = (2.0, 3.0)


@dataclass
class SvmPrediction:
    """What a subject reports for one test set."""

    classes: list            # observed class labels, sorted
    pairs: list              # [(a, b), ...] aligned with decision columns
    predicted: np.ndarray    # (m,)
    decisions: np.ndarray    # (m, n_pairs)


def applicable_svm_mrs(kernel_kind):
    ids = [MrId("svm", 1), MrId("svm", 2)]
    if kernel_kind == "rbf":
        ids.append(MrId("svm", 3))
    if kernel_kind == "linear":
        ids.append(MrId("svm", 4))
    return ids


def _compare(base, follow, tolerance):
    """(max decision deviation, class flips, structural mismatch)."""
    if base.classes != follow.classes or base.pairs != follow.pairs:
        return np.inf, int(np.sum(base.predicted != follow.predicted)), True
    dev = float(np.max(np.abs(base.decisions - follow.decisions))) if base.decisions.size else 0.0
    flips = int(np.sum(base.predicted != follow.predicted))
    return dev, flips, False


def run_svm_mr(mr, split, subject, base=None, tolerance=DEFAULT_TOLERANCE,
               shift_k=DEFAULT_SHIFT):
    """Evaluate one relation; returns an MrVerdict.

    ``base`` is an optional precomputed (model_handle, SvmPrediction)
    from subject.fit_predict on the untransformed split, so several
    relations can share one base training.
    """
    if mr.family != "svm":
        raise ValidationError(f"{mr} is not a relation over this subject family")
    if mr.index == 3 and subject.kernel_kind != "rbf":
        raise ValidationError("svm-3 applies to the rbf kernel only")
    if mr.index == 4 and subject.kernel_kind != "linear":
        raise ValidationError("svm-4 applies to the linear kernel only")
    try:
        if base is None:
            base = subject.fit_predict(split.train, split.test)
        handle, base_pred = base
        if mr.index == 4:
            return _run_scaling_identity(mr, handle, split.test, subject, base_pred, tolerance)
        if mr.index == 1:
            perm = default_feature_permutation(split.train.n_features)
            follow_train = permute_features(split.train, perm)
            follow_test = permute_features(split.test, perm)
            variant = "feature_permutation"
        elif mr.index == 2:
            rotation = default_row_rotation(split.train.m)
            follow_train = shuffle_instances(split.train, rotation)
            follow_test = split.test
            variant = "row_rotation"
        else:
            follow_train = shift_features(split.train, shift_k)
            follow_test = shift_features(split.test, shift_k)
            variant = f"feature_shift_k={shift_k}"
        _, follow_pred = subject.fit_predict(follow_train, follow_test)
    except Exception as exc:  # noqa: BLE001 - subject code is untrusted
        return MrVerdict(mr=mr, status="inconclusive", evidence=float("nan"),
                         threshold=tolerance, detail=f"subject raised {exc!r}")
    dev, flips, mismatch = _compare(base_pred, follow_pred, tolerance)
    killed = mismatch or flips > 0 or dev > tolerance
    detail = f"{flips} class flips" + ("; class structure changed" if mismatch else "")
    return MrVerdict(
        mr=mr, status="killed" if killed else "pass", evidence=dev,
        threshold=tolerance, detail=detail, variants={variant: dev})


def _run_scaling_identity(mr, handle, test, subject, base_pred, tolerance):
    d1 = base_pred.decisions
    d2 = subject.predict(handle, scale_instances(test, SCALE_STEPS[0])).decisions
    d3 = subject.predict(handle, scale_instances(test, SCALE_STEPS[1])).decisions
    dev = float(np.max(np.abs((d3 - d2) - (d2 - d1)))) if d1.size else 0.0
    killed = dev > tolerance
    return MrVerdict(
        mr=mr, status="killed" if killed else "pass", evidence=dev,
        threshold=tolerance, detail="decision-spacing identity on scaled inputs",
        variants={"scaling_identity": dev})
