"""Binary soft-margin trainer.

Solves the box-constrained dual

    minimize 0.5 a'Qa - sum(a)   s.t.  y'a = 0,  0 <= a_i <= C,

with Q_ij = y_i y_j K(x_i, x_j), by two-variable decomposition: each
iteration updates the maximal violating pair, ties broken toward the
lowest index, until the KKT gap drops below the tolerance. The bias is
the average of the KKT equalities over the free support vectors; when no
support vector is free it is the midpoint of the feasible interval.

The decision function of the trained machine is
D(x) = sum_i a_i y_i K(x, x_i) + b and the predicted side is sign(D).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import backend
from ..errors import ValidationError
from .kernels import KernelSpec, gram, resolve_gamma


@dataclass(frozen=True)
class SvmTrainConfig:
    C: float = 1.0
    kkt_tolerance: float = 1e-8
    # hard non-separable problems can need a few million zigzag steps
    max_iterations: int = 5_000_000

    def __post_init__(self):
        if not self.C > 0:
            raise ValidationError(f"C must be positive, got {self.C}")
        if not self.kkt_tolerance > 0:
            raise ValidationError(f"kkt_tolerance must be positive, got {self.kkt_tolerance}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be at least 1")


@dataclass
class BinarySvm:
    """A trained two-class machine over +/-1 labels."""

    kernel: KernelSpec
    config: SvmTrainConfig
    support_vectors: np.ndarray  # (s, n)
    support_labels: np.ndarray   # (s,) values in {-1.0, +1.0}
    alphas: np.ndarray           # (s,) strictly positive
    bias: float
    iterations: int = 0
    kkt_gap: float = 0.0
    converged: bool = True

    def decision_values(self, X):
        """D(x) for each row of X."""
        X = np.asarray(X, dtype=np.float64)
        K = gram(self.kernel, X, self.support_vectors)
        return K @ (self.alphas * self.support_labels) + self.bias

    def decision_value(self, x):
        return float(self.decision_values(np.asarray(x, dtype=np.float64)[None, :])[0])


def train_binary_pm1(X, y, kernel, config=SvmTrainConfig()):
    """Train on +/-1 labels. X is (m, n) float64, y is (m,) in {-1, +1}."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("need at least two training instances")
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise ValidationError("labels must contain both -1 and +1")
    kernel = resolve_gamma(kernel, X)
    K = gram(kernel, X, X)
    alpha, G, iterations, gap = backend.smo_solve(
        K, y, float(config.C), float(config.kkt_tolerance), int(config.max_iterations))
    # a budget-exhausted solve still yields a usable machine; the gap
    # stays on record so callers can demand full convergence
    bias = _bias_from_kkt(alpha, G, y, config.C)
    sv = alpha > 0.0
    return BinarySvm(
        kernel=kernel,
        config=config,
        support_vectors=X[sv].copy(),
        support_labels=y[sv].copy(),
        alphas=alpha[sv].copy(),
        bias=bias,
        iterations=int(iterations),
        kkt_gap=float(gap),
        converged=bool(gap <= config.kkt_tolerance),
    )


def _bias_from_kkt(alpha, G, y, C):
    # for a free support vector i, y_i * D(x_i) = 1 pins b = -y_i G_i;
    # average those, or fall back to the feasible interval's midpoint
    yG = y * G
    free = (alpha > 0.0) & (alpha < C)
    if free.any():
        return float(-yG[free].mean())
    ub = np.inf
    lb = -np.inf
    at_upper = alpha >= C
    at_lower = alpha <= 0.0
    hi_side = (at_upper & (y < 0)) | (at_lower & (y > 0))
    lo_side = (at_upper & (y > 0)) | (at_lower & (y < 0))
    if hi_side.any():
        ub = yG[hi_side].min()
    if lo_side.any():
        lb = yG[lo_side].max()
    return float(-(ub + lb) / 2.0)


def train_binary(vset, kernel, config=SvmTrainConfig()):
    """Train on a two-class LabeledVectorSet.

    The higher of the two class labels maps to +1 (so sets already
    labeled {-1, +1} keep their signs). The returned machine carries the
    original classes as ``pos_class``/``neg_class`` attributes.
    """
    classes = np.unique(vset.labels)
    if classes.size != 2:
        raise ValidationError(f"binary training needs exactly 2 classes, got {classes.size}")
    neg, pos = int(classes[0]), int(classes[1])
    y = np.where(vset.labels == pos, 1.0, -1.0)
    machine = train_binary_pm1(vset.features, y, kernel, config)
    machine.pos_class = pos
    machine.neg_class = neg
    return machine
