"""Kernel functions for the max-margin classifiers.

Two kernels are supported: linear K(a, b) = a.b and the radial basis
kernel K(a, b) = exp(-gamma * ||a - b||^2). The RBF distance is always
computed from explicit per-feature differences so that shifting every
feature of both arguments by the same constant leaves the kernel value
untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import backend
from ..errors import ValidationError

KINDS = ("linear", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice plus its parameter.

    gamma applies to the RBF kernel only. ``gamma=None`` on an RBF spec
    means "resolve from the training features" via :func:`resolve_gamma`:
    gamma = 1 / (n_features * variance of all feature values). Variance is
    shift-invariant, so the resolved value cannot differ between a corpus
    and its constant-shifted twin.
    """

    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "linear" and self.gamma is not None:
            raise ValidationError("linear kernel takes no gamma")
        if self.gamma is not None and not self.gamma > 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")


def resolve_gamma(spec, features):
    """Return a spec with a concrete positive gamma."""
    if spec.kind == "linear" or spec.gamma is not None:
        return spec
    var = float(np.var(features))
    if var <= 0:
        raise ValidationError("cannot resolve gamma: features have zero variance")
    return KernelSpec(kind="rbf", gamma=1.0 / (features.shape[1] * var))


def kernel_eval(spec, a, b):
    """K(a, b) for two single vectors of equal dimension."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError(f"kernel arguments must be equal-length vectors, got {a.shape} and {b.shape}")
    return float(gram(spec, a[None, :], b[None, :])[0, 0])


def gram(spec, a, b):
    """Kernel matrix K[i, j] = K(a_i, b_j)."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if spec.kind == "linear":
        return backend.linear_gram(a, b)
    if spec.gamma is None:
        raise ValidationError("rbf gram needs a concrete gamma; call resolve_gamma first")
    return backend.rbf_gram(a, b, spec.gamma)
