"""Finite-difference checks on every layer's backward pass.

All checks run in float64 (the layers preserve input dtype) against
central differences, so the 1e-3 relative budget has orders of magnitude
of headroom when the analytic gradient is right.
"""

import numpy as np
import pytest

from mtverify.cnn.layers import (
    BatchNorm2d,
    Conv2d,
    Dense,
    ResidualBlock,
    avgpool2,
    avgpool2_backward,
    global_avgpool,
    global_avgpool_backward,
    pad_channels,
    pad_channels_backward,
    relu,
    relu_backward,
)
from mtverify.cnn.model import ArchDescriptor, build_model

from oracles import finite_difference_gradient, relative_error

REL_TOL = 1e-3


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _probe(rng, shape):
    """Fixed weights turning a tensor output into a scalar loss."""
    return rng.normal(size=shape)


def check(got, f, x, tol=REL_TOL):
    assert relative_error(got, finite_difference_gradient(f, x)) < tol


def test_conv2d_gradients():
    rng = _rng(0)
    x = rng.normal(size=(2, 3, 5, 5))
    layer = Conv2d(rng.normal(size=(4, 3, 3, 3)), padding=1)
    y, cache = layer.forward(x)
    r = _probe(rng, y.shape)
    dx, grads = layer.backward(cache, r)

    def loss_x(x_):
        return float((layer.forward(x_)[0] * r).sum())

    def loss_w(w_):
        return float((Conv2d(w_, padding=1).forward(x)[0] * r).sum())

    check(dx, loss_x, x)
    check(grads["w"], loss_w, layer.w)


def test_conv2d_gradients_no_padding():
    rng = _rng(1)
    x = rng.normal(size=(2, 2, 6, 6))
    layer = Conv2d(rng.normal(size=(3, 2, 3, 3)), padding=0)
    y, cache = layer.forward(x)
    r = _probe(rng, y.shape)
    dx, grads = layer.backward(cache, r)
    check(dx, lambda x_: float((layer.forward(x_)[0] * r).sum()), x)
    check(grads["w"],
          lambda w_: float((Conv2d(w_, padding=0).forward(x)[0] * r).sum()),
          layer.w)


@pytest.mark.parametrize("train", [True, False])
def test_batchnorm_gradients(train):
    rng = _rng(2)
    x = rng.normal(size=(4, 3, 4, 4))
    bn = BatchNorm2d(rng.normal(1.0, 0.2, size=3), rng.normal(size=3))
    if not train:
        bn.running_mean = rng.normal(size=3)
        bn.running_var = rng.uniform(0.5, 2.0, size=3)
    y, cache = bn.forward(x, train)
    r = _probe(rng, y.shape)
    dx, grads = bn.backward(cache, r)

    # train-mode output depends only on the batch, so the running-stat
    # updates the repeated forward calls make do not disturb the check
    def loss_x(x_):
        return float((bn.forward(x_, train)[0] * r).sum())

    check(dx, loss_x, x)

    gamma0 = bn.gamma.copy()
    beta0 = bn.beta.copy()

    def loss_gamma(g):
        bn.gamma = g
        out = float((bn.forward(x, train)[0] * r).sum())
        bn.gamma = gamma0
        return out

    def loss_beta(b):
        bn.beta = b
        out = float((bn.forward(x, train)[0] * r).sum())
        bn.beta = beta0
        return out

    check(grads["gamma"], loss_gamma, gamma0)
    check(grads["beta"], loss_beta, beta0)


def test_dense_gradients():
    rng = _rng(3)
    x = rng.normal(size=(5, 7))
    layer = Dense(rng.normal(size=(7, 4)), rng.normal(size=4))
    y, cache = layer.forward(x)
    r = _probe(rng, y.shape)
    dx, grads = layer.backward(cache, r)
    check(dx, lambda x_: float((Dense(layer.w, layer.b).forward(x_)[0] * r).sum()), x)
    check(grads["w"], lambda w_: float((Dense(w_, layer.b).forward(x)[0] * r).sum()), layer.w)
    check(grads["b"], lambda b_: float((Dense(layer.w, b_).forward(x)[0] * r).sum()), layer.b)


def test_relu_gradient():
    rng = _rng(4)
    x = rng.normal(size=(3, 2, 4, 4))
    x = x + np.sign(x) * 0.1  # keep values off the kink
    y, cache = relu(x)
    r = _probe(rng, y.shape)
    dx = relu_backward(cache, r)
    check(dx, lambda x_: float((relu(x_)[0] * r).sum()), x)


def test_avgpool2_gradient():
    rng = _rng(5)
    x = rng.normal(size=(2, 3, 6, 6))
    y = avgpool2(x)
    r = _probe(rng, y.shape)
    dx = avgpool2_backward(r, x.shape)
    check(dx, lambda x_: float((avgpool2(x_) * r).sum()), x)


def test_global_avgpool_gradient():
    rng = _rng(6)
    x = rng.normal(size=(2, 4, 3, 3))
    y = global_avgpool(x)
    r = _probe(rng, y.shape)
    dx = global_avgpool_backward(r, x.shape)
    check(dx, lambda x_: float((global_avgpool(x_) * r).sum()), x)


@pytest.mark.parametrize("front_only", [False, True])
def test_pad_channels_gradient(front_only):
    rng = _rng(7)
    x = rng.normal(size=(2, 3, 4, 4))
    y, split = pad_channels(x, 8, front_only)
    r = _probe(rng, y.shape)
    dx = pad_channels_backward(r, split, 3)
    check(dx, lambda x_: float((pad_channels(x_, 8, front_only)[0] * r).sum()), x)


@pytest.mark.parametrize("downsample,use_skip", [(False, True), (True, True), (False, False)])
def test_residual_block_gradients(downsample, use_skip):
    rng = _rng(8)
    in_ch, out_ch = 3, 6 if downsample else 3
    x = rng.normal(size=(3, in_ch, 4, 4))
    bn = BatchNorm2d(rng.normal(1.0, 0.2, size=in_ch), rng.normal(size=in_ch))
    conv = Conv2d(rng.normal(size=(out_ch, in_ch, 3, 3)), padding=1)
    blk = ResidualBlock(bn, conv, downsample=downsample, use_skip=use_skip)
    y, cache = blk.forward(x, train=True)
    r = _probe(rng, y.shape)
    dx, grads = blk.backward(cache, r)

    check(dx, lambda x_: float((blk.forward(x_, True)[0] * r).sum()), x)
    w0 = conv.w.copy()

    def loss_w(w_):
        conv.w = w_
        out = float((blk.forward(x, True)[0] * r).sum())
        conv.w = w0
        return out

    check(grads["conv"]["w"], loss_w, w0)


@pytest.mark.parametrize("variant,decay", [
    ("standard", 0.0),
    ("standard", 0.01),
    ("decay_sign_flipped", 0.01),
    ("sum_reduction", 0.0),
    ("log10", 0.0),
])
def test_full_model_gradients(variant, decay):
    arch = ArchDescriptor(side=8, widths=(4, 6), blocks=(1, 1), classes=5)
    model = build_model(arch, seed=9, dtype=np.float64)
    rng = _rng(10)
    images = rng.uniform(0.0, 255.0, size=(6, 3, 8, 8))
    labels = rng.integers(0, 5, size=6)
    _, grads = model.loss_and_grad(images, labels, weight_decay=decay, loss_variant=variant)

    for name, owner, attr in model.parameters():
        base = getattr(owner, attr).copy()

        def loss_p(p):
            setattr(owner, attr, p)
            value, _ = model.loss_and_grad(images, labels, weight_decay=decay,
                                           loss_variant=variant)
            setattr(owner, attr, base)
            return value

        err = relative_error(grads[name], finite_difference_gradient(loss_p, base))
        assert err < REL_TOL, f"{name}: {err:.2e}"


def test_decay_not_optimized_drops_decay_from_gradients():
    # the loss reports the penalty but the gradients deliberately omit it,
    # so they must match the zero-decay gradients, not the loss's slope
    arch = ArchDescriptor(side=8, widths=(4,), blocks=(1,), classes=4)
    model = build_model(arch, seed=11, dtype=np.float64)
    rng = _rng(12)
    images = rng.uniform(0.0, 255.0, size=(5, 3, 8, 8))
    labels = rng.integers(0, 4, size=5)
    loss_plain, grads_plain = model.loss_and_grad(images, labels, weight_decay=0.0)
    loss_off, grads_off = model.loss_and_grad(images, labels, weight_decay=0.05,
                                              loss_variant="decay_not_optimized")
    assert loss_off > loss_plain
    for name in grads_plain:
        assert np.array_equal(grads_off[name], grads_plain[name]), name
