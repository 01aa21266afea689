"""Independent reference computations the implementation is checked against.

The dual oracle solves the soft-margin quadratic program by projected
gradient descent: full-gradient steps at 1/lambda_max(Q), each followed
by an exact projection onto the feasible set {y'a = 0, 0 <= a <= C}
(bisection on the equality multiplier). No code is shared with the
production solver beyond the kernel evaluation it is given.
"""

from __future__ import annotations

import numpy as np


def project_box_hyperplane(alpha, y, C, bisections=60):
    """Euclidean projection onto {y'a = 0} intersected with [0, C]^m."""

    def clipped(nu):
        return np.clip(alpha - nu * y, 0.0, C)

    # g(nu) = y' clipped(nu) decreases monotonically in nu
    span = C + float(np.max(np.abs(alpha))) + 1.0
    lo, hi = -span, span
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        if y @ clipped(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return clipped(0.5 * (lo + hi))


def dual_oracle(K, y, C, iterations=4_000):
    """Optimal alpha for min 0.5 a'Qa - sum(a) under the dual constraints."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    Q = K * np.outer(y, y)
    lam = float(np.max(np.linalg.eigvalsh(Q)))
    lr = 1.0 / max(lam, 1e-12)
    alpha = project_box_hyperplane(np.full(y.shape, 0.5 * C), y, C)
    for _ in range(iterations):
        alpha = project_box_hyperplane(alpha - lr * (Q @ alpha - 1.0), y, C)
    return alpha


def dual_objective(K, y, alpha):
    Q = np.asarray(K) * np.outer(y, y)
    return 0.5 * float(alpha @ Q @ alpha) - float(np.sum(alpha))


def oracle_bias(K, y, alpha, C, margin=1e-8):
    """Bias from the KKT equalities of the free support vectors.

    Falls back to the midpoint of the feasible interval when every
    support vector sits on the box boundary.
    """
    G = (K * np.outer(y, y)) @ alpha - 1.0
    yG = y * G
    free = (alpha > margin) & (alpha < C - margin)
    if free.any():
        return float(-yG[free].mean())
    hi_side = ((alpha >= C - margin) & (y < 0)) | ((alpha <= margin) & (y > 0))
    lo_side = ((alpha >= C - margin) & (y > 0)) | ((alpha <= margin) & (y < 0))
    ub = yG[hi_side].min() if hi_side.any() else np.inf
    lb = yG[lo_side].max() if lo_side.any() else -np.inf
    return float(-(ub + lb) / 2.0)


def oracle_decision_values(K_test_train, y, alpha, bias):
    """D(x) = sum_i alpha_i y_i K(x, x_i) + b for each test row."""
    return np.asarray(K_test_train, dtype=np.float64) @ (alpha * y) + bias


def finite_difference_gradient(f, x, eps=1e-5):
    """Central-difference gradient of a scalar function of one array."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = f(x)
        flat[i] = orig - eps
        lo = f(x)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * eps)
    return grad


def relative_error(got, want):
    scale = max(float(np.max(np.abs(want))), 1e-12)
    return float(np.max(np.abs(np.asarray(got) - np.asarray(want)))) / scale
