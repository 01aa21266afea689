"""Constructive equivariance checks on the convolution kernel.

Two identities are exercised, both with symmetric zero padding:

* dihedral transport: conv(T(I), T(W)) == T(conv(I, W)) for each of the
  7 non-identity square-grid symmetries T applied to image and weights;
* channel transport: permuting the input planes and the matching input-
  channel axis of the weights leaves the output untouched.

A fixed integer-valued case with a known hand-computed result runs
first; random float64 trials follow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .. import backend
from ..errors import ValidationError
from .transforms import DIHEDRAL_VARIANTS, dihedral_apply

# hand-checked case: valid cross-correlation of a 3x3 grid with a 2x2
# window, plus its transposed twin
KNOWN_IMAGE = np.array([[1.0, 2.0, 3.0], [1.0, 1.0, 2.0], [2.0, 0.0, 1.0]])
KNOWN_WEIGHTS = np.array([[1.0, 0.0], [2.0, 3.0]])
KNOWN_OUTPUT = np.array([[6.0, 10.0], [5.0, 4.0]])
KNOWN_OUTPUT_TRANSPOSED = np.array([[6.0, 5.0], [10.0, 4.0]])


def conv2d_forward(image, weights, padding=0):
    """Stride-1 cross-correlation with symmetric zero padding.

    image is (C, H, W) or (N, C, H, W); weights are (O, C, kh, kw).
    """
    image = np.asarray(image)
    squeeze = image.ndim == 3
    if squeeze:
        image = image[None]
    if image.ndim != 4 or np.asarray(weights).ndim != 4:
        raise ValidationError("conv2d_forward wants (N,C,H,W) images and (O,C,kh,kw) weights")
    p = int(padding)
    xp = np.pad(image, ((0, 0), (0, 0), (p, p), (p, p))) if p else image
    out = backend.conv2d_valid(np.ascontiguousarray(xp), np.ascontiguousarray(weights), 1)
    return out[0] if squeeze else out


@dataclass
class EquivarianceReport:
    trials: int
    checks: int = 0
    max_rel_deviation: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def summary(self):
        state = "pass" if self.passed else f"{len(self.failures)} FAILURES"
        return (f"{self.checks} checks over {self.trials} trials: {state} "
                f"(max relative deviation {self.max_rel_deviation:.3e})")


def _rel_dev(got, want):
    scale = max(float(np.max(np.abs(want))), 1e-30)
    return float(np.max(np.abs(got - want))) / scale


def check_conv_equivariance(trials=100, seed=0, rel_tol=1e-6):
    """Run the transport identities; returns an EquivarianceReport."""
    report = EquivarianceReport(trials=trials)

    def check(name, got, want, exact=False):
        report.checks += 1
        dev = _rel_dev(got, want)
        report.max_rel_deviation = max(report.max_rel_deviation, dev)
        bad = not np.array_equal(got, want) if exact else dev > rel_tol
        if bad:
            report.failures.append(f"{name}: relative deviation {dev:.3e}")

    img = KNOWN_IMAGE[None]          # one channel
    wts = KNOWN_WEIGHTS[None, None]  # one filter, one channel
    check("known-case", conv2d_forward(img, wts), KNOWN_OUTPUT[None], exact=True)
    check("known-case transposed",
          conv2d_forward(dihedral_apply(img, "transpose"), dihedral_apply(wts, "transpose")),
          KNOWN_OUTPUT_TRANSPOSED[None], exact=True)

    rng = np.random.Generator(np.random.PCG64(seed))
    for t in range(trials):
        c = 3
        o = int(rng.integers(1, 3))
        side = int(rng.integers(4, 8))
        k = int(rng.integers(2, 4))
        pad = int(rng.integers(0, 2))
        image = rng.normal(size=(c, side, side))
        weights = rng.normal(size=(o, c, k, k))
        base = conv2d_forward(image, weights, pad)
        for variant in DIHEDRAL_VARIANTS[1:]:
            got = conv2d_forward(dihedral_apply(image, variant),
                                 dihedral_apply(weights, variant), pad)
            check(f"trial {t} dihedral {variant}", got, dihedral_apply(base, variant))
        for order in permutations(range(c)):
            got = conv2d_forward(image[list(order)], weights[:, list(order)], pad)
            check(f"trial {t} channels {order}", got, base)
    return report
