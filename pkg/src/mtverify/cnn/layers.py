"""Layer primitives with explicit forward/backward passes.

Every forward returns (output, cache); the matching backward consumes
that cache and the upstream gradient. Parameter gradients come back in a
dict keyed like the layer's parameter names. All ops preserve the input
dtype, so the same code runs the 32-bit production path and the 64-bit
shadow used by finite-difference checks.
"""

from __future__ import annotations

import numpy as np

from .. import backend
from ..errors import ValidationError


def _contig(a):
    return np.ascontiguousarray(a)


class Conv2d:
    """3x3-style convolution, stride 1, symmetric zero padding, no bias."""

    def __init__(self, weights, padding):
        self.w = weights  # (out_ch, in_ch, k, k)
        self.padding = int(padding)

    def forward(self, x):
        p = self.padding
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else _contig(x)
        y = backend.conv2d_valid(_contig(xp), _contig(self.w), 1)
        return y, xp

    def backward(self, cache, dy):
        xp = cache
        dy = _contig(dy)
        kh, kw = self.w.shape[2], self.w.shape[3]
        dw = backend.conv2d_valid_grad_w(_contig(xp), dy, kh, kw, 1)
        dxp = backend.conv2d_valid_grad_x(dy, _contig(self.w), xp.shape[2], xp.shape[3], 1)
        p = self.padding
        dx = dxp[:, :, p:xp.shape[2] - p, p:xp.shape[3] - p] if p else dxp
        return _contig(dx), {"w": dw}


class BatchNorm2d:
    """Per-channel batch normalization over (batch, height, width).

    Training mode normalizes with the batch's population statistics and
    folds them into running averages (weight 0.1 on the new batch); eval
    mode normalizes with the running averages.
    """

    def __init__(self, gamma, beta, eps=1e-5, update_weight=0.1):
        self.gamma = gamma
        self.beta = beta
        self.eps = eps
        self.update_weight = update_weight
        self.running_mean = np.zeros_like(gamma)
        self.running_var = np.ones_like(gamma)

    def forward(self, x, train):
        if train:
            mu = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            self.running_mean = ((1 - self.update_weight) * self.running_mean
                                 + self.update_weight * mu)
            self.running_var = ((1 - self.update_weight) * self.running_var
                                + self.update_weight * var)
        else:
            mu = self.running_mean
            var = self.running_var
        invstd = 1.0 / np.sqrt(var + np.asarray(self.eps, dtype=x.dtype))
        xhat = (x - mu[None, :, None, None]) * invstd[None, :, None, None]
        y = self.gamma[None, :, None, None] * xhat + self.beta[None, :, None, None]
        return y, (xhat, invstd, train)

    def backward(self, cache, dy):
        xhat, invstd, train = cache
        dgamma = (dy * xhat).sum(axis=(0, 2, 3))
        dbeta = dy.sum(axis=(0, 2, 3))
        dxhat = dy * self.gamma[None, :, None, None]
        if train:
            m = dy.shape[0] * dy.shape[2] * dy.shape[3]
            s1 = dxhat.sum(axis=(0, 2, 3))[None, :, None, None]
            s2 = (dxhat * xhat).sum(axis=(0, 2, 3))[None, :, None, None]
            dx = (invstd[None, :, None, None] / m) * (m * dxhat - s1 - xhat * s2)
        else:
            dx = dxhat * invstd[None, :, None, None]
        return dx.astype(dy.dtype), {"gamma": dgamma, "beta": dbeta}


class Dense:
    """Affine map on flattened features."""

    def __init__(self, weights, bias):
        self.w = weights  # (in, out)
        self.b = bias     # (out,)

    def forward(self, x):
        return x @ self.w + self.b, x

    def backward(self, cache, dy):
        x = cache
        return dy @ self.w.T, {"w": x.T @ dy, "b": dy.sum(axis=0)}


def relu(x):
    return np.maximum(x, 0), x


def relu_backward(cache, dy):
    return dy * (cache > 0)


def avgpool2(x):
    """2x2 mean pooling, stride 2. Requires even spatial dims."""
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ValidationError(f"avgpool2 needs even spatial dims, got {h}x{w}")
    return x.reshape(n, c, h // 2, 2, w // 2, 2).mean(axis=(3, 5))


def avgpool2_backward(dy, x_shape):
    up = np.repeat(np.repeat(dy, 2, axis=2), 2, axis=3)
    return (up * np.asarray(0.25, dtype=dy.dtype)).reshape(x_shape)


def global_avgpool(x):
    return x.mean(axis=(2, 3))


def global_avgpool_backward(dy, x_shape):
    scale = np.asarray(1.0 / (x_shape[2] * x_shape[3]), dtype=dy.dtype)
    return np.broadcast_to((dy * scale)[:, :, None, None], x_shape).copy()


def pad_channels(x, out_ch, front_only=False):
    """Zero-pad the channel axis up to out_ch.

    The extra zero planes are split evenly before and after the existing
    channels; ``front_only`` stacks them all in front instead.
    """
    extra = out_ch - x.shape[1]
    if extra < 0:
        raise ValidationError(f"cannot pad {x.shape[1]} channels down to {out_ch}")
    if extra == 0:
        return x, (0, 0)
    if front_only:
        before, after = extra, 0
    else:
        before, after = extra // 2, extra - extra // 2
    return np.pad(x, ((0, 0), (before, after), (0, 0), (0, 0))), (before, after)


def pad_channels_backward(dy, split, in_ch):
    before, _ = split
    return dy[:, before:before + in_ch, :, :]


class ResidualBlock:
    """Pre-activation block: x + conv(relu(bn(x))).

    A downsampling block additionally mean-pools both the conv path and
    the shortcut by 2 and zero-pads the shortcut's channels when the
    width grows. ``use_skip=False`` drops the shortcut entirely.
    """

    def __init__(self, bn, conv, downsample=False, use_skip=True, pad_front_only=False):
        self.bn = bn
        self.conv = conv
        self.downsample = downsample
        self.use_skip = use_skip
        self.pad_front_only = pad_front_only

    @property
    def out_channels(self):
        return self.conv.w.shape[0]

    def forward(self, x, train):
        h, bn_cache = self.bn.forward(x, train)
        hr, relu_cache = relu(h)
        hc, conv_cache = self.conv.forward(hr)
        conv_out_shape = hc.shape  # before pooling
        if self.downsample:
            hc = avgpool2(hc)
        split = (0, 0)
        in_shape = x.shape
        if self.use_skip:
            sc = avgpool2(x) if self.downsample else x
            sc_channels = sc.shape[1]
            sc, split = pad_channels(sc, self.out_channels, self.pad_front_only)
            y = sc + hc
        else:
            sc_channels = 0
            y = hc
        cache = (bn_cache, relu_cache, conv_cache, conv_out_shape, in_shape, sc_channels, split)
        return y, cache

    def backward(self, cache, dy):
        bn_cache, relu_cache, conv_cache, conv_out_shape, in_shape, sc_channels, split = cache
        dhc = avgpool2_backward(dy, conv_out_shape) if self.downsample else dy
        dhr, conv_grads = self.conv.backward(conv_cache, dhc)
        dh = relu_backward(relu_cache, dhr)
        dx, bn_grads = self.bn.backward(bn_cache, dh)
        if self.use_skip:
            dsc = pad_channels_backward(dy, split, sc_channels)
            if self.downsample:
                dsc = avgpool2_backward(dsc, in_shape)
            dx = dx + dsc
        return dx, {"bn": bn_grads, "conv": conv_grads}
