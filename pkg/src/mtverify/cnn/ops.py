"""Elementwise and loss primitives for the convnet.

Statistics for per-instance standardization run in 64-bit regardless of
the tensor dtype; results are cast back, so standardizing an already
standardized instance reproduces it to float tolerance, and scaling an
instance by a positive constant standardizes to the same values.
"""

from __future__ import annotations

import numpy as np

from ..errors import NormalizationError, ValidationError

LOSS_VARIANTS = ("standard", "decay_sign_flipped", "decay_not_optimized",
                 "sum_reduction", "log10")


def normalize_instance(x):
    """Standardize one instance to zero mean, unit population std.

    All values of the tensor count as one population. Raises
    NormalizationError for a constant instance (zero variance).
    """
    x = np.asarray(x)
    wide = x.astype(np.float64)
    mu = wide.mean()
    sd = np.sqrt(np.mean((wide - mu) ** 2))
    if sd == 0.0:
        raise NormalizationError("instance is constant; standardization undefined")
    return ((wide - mu) / sd).astype(x.dtype)


def normalize_batch(x):
    """Per-instance standardization over axis 0. Names offending instances."""
    x = np.asarray(x)
    wide = x.reshape(x.shape[0], -1).astype(np.float64)
    mu = wide.mean(axis=1)
    sd = np.sqrt(np.mean((wide - mu[:, None]) ** 2, axis=1))
    flat = np.flatnonzero(sd == 0.0)
    if flat.size:
        raise NormalizationError(f"instances {flat.tolist()} are constant; standardization undefined")
    out = (wide - mu[:, None]) / sd[:, None]
    return out.reshape(x.shape).astype(x.dtype)


def fill_border(x, width, value):
    """Overwrite a frame of ``width`` pixels on every side with a constant."""
    if 2 * width >= min(x.shape[-2], x.shape[-1]):
        raise ValidationError("border width consumes the whole image")
    out = x.copy()
    out[..., :width, :] = value
    out[..., -width:, :] = value
    out[..., :, :width] = value
    out[..., :, -width:] = value
    return out


def log_softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def cross_entropy_per_instance(logits, labels):
    """Natural-log cross-entropy of each instance, as float64."""
    lp = log_softmax(np.asarray(logits, dtype=np.float64))
    return -lp[np.arange(labels.shape[0]), labels]


def cross_entropy_loss_grad(logits, labels, variant="standard"):
    """Data term of the training loss and its gradient w.r.t. the logits.

    standard / decay_* variants: mean natural-log cross-entropy.
    sum_reduction: summed instead of averaged over the batch.
    log10: cross-entropy in base-10 logarithms.
    """
    if variant not in LOSS_VARIANTS:
        raise ValidationError(f"unknown loss variant {variant!r}")
    n = labels.shape[0]
    lp = log_softmax(logits.astype(np.float64))
    p = np.exp(lp)
    picked = -lp[np.arange(n), labels]
    onehot = np.zeros_like(p)
    onehot[np.arange(n), labels] = 1.0
    if variant == "sum_reduction":
        loss = picked.sum()
        dlogits = p - onehot
    elif variant == "log10":
        ln10 = np.log(10.0)
        loss = picked.mean() / ln10
        dlogits = (p - onehot) / (n * ln10)
    else:
        loss = picked.mean()
        dlogits = (p - onehot) / n
    return float(loss), dlogits.astype(logits.dtype)
