"""The compact residual image classifier.

Layout: per-instance input standardization, an initial convolution, a
stack of pre-activation residual blocks in widening stages (each stage
past the first mean-pools by 2 and zero-pads the shortcut channels),
then batch-norm, relu, global average pooling, and a dense readout.

Spatial downsampling uses mean pooling rather than strided convolution:
2x2 pooling on even grids commutes with transposes, quarter rotations
and reflections, so the whole conv stack stays equivariant under those
transforms; a stride-2 convolution on an even grid would not be.

All parameters are drawn from a seeded PCG64 generator in a fixed layer
order (He-scaled normals for conv weights, fan-in-scaled normals for the
dense readout), so a seed pins the initial state bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from . import ops
from .layers import (
    BatchNorm2d,
    Conv2d,
    Dense,
    ResidualBlock,
    global_avgpool,
    global_avgpool_backward,
    relu,
    relu_backward,
)

BORDER_FILL_WIDTH = 2


@dataclass(frozen=True)
class ArchDescriptor:
    """Shape of the network.

    widths[i] is the channel count of stage i; blocks[i] its block count.
    Stages past the first halve the spatial grid. ``border_fill``, when
    set, overwrites a 2-pixel frame of every raw input with that constant
    before standardization (a deliberately injectable pipeline fault).
    """

    side: int = 16
    in_channels: int = 3
    classes: int = 10
    widths: tuple = (16, 32)
    blocks: tuple = (3, 3)
    kernel: int = 3
    use_skip: bool = True
    skip_pad_front_only: bool = False
    border_fill: float | None = None

    def __post_init__(self):
        if len(self.widths) != len(self.blocks) or not self.widths:
            raise ValidationError("widths and blocks must be non-empty and aligned")
        if any(b < 1 for b in self.blocks) or any(w < 1 for w in self.widths):
            raise ValidationError("stage widths and block counts must be positive")
        if self.side % (2 ** (len(self.widths) - 1)):
            raise ValidationError(
                f"side {self.side} not divisible by the {len(self.widths) - 1} pooling halvings")

    def conv_layer_count(self):
        return 1 + sum(self.blocks)

    def to_dict(self):
        return {
            "side": self.side, "in_channels": self.in_channels, "classes": self.classes,
            "widths": list(self.widths), "blocks": list(self.blocks), "kernel": self.kernel,
            "use_skip": self.use_skip, "skip_pad_front_only": self.skip_pad_front_only,
            "border_fill": self.border_fill,
        }

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        doc["widths"] = tuple(doc["widths"])
        doc["blocks"] = tuple(doc["blocks"])
        return cls(**doc)


class CnnModel:
    """A built (possibly trained) network. Construct via build_model."""

    def __init__(self, arch, conv0, blocks, head_bn, dense, dtype, seed):
        self.arch = arch
        self.conv0 = conv0
        self.blocks = blocks
        self.head_bn = head_bn
        self.dense = dense
        self.dtype = dtype
        self.seed = seed

    # -- parameters ---------------------------------------------------

    def parameters(self):
        """(name, owner, attr) triples in a fixed order."""
        out = [("conv0.w", self.conv0, "w")]
        for i, blk in enumerate(self.blocks):
            out.append((f"block{i}.bn.gamma", blk.bn, "gamma"))
            out.append((f"block{i}.bn.beta", blk.bn, "beta"))
            out.append((f"block{i}.conv.w", blk.conv, "w"))
        out.append(("head_bn.gamma", self.head_bn, "gamma"))
        out.append(("head_bn.beta", self.head_bn, "beta"))
        out.append(("dense.w", self.dense, "w"))
        out.append(("dense.b", self.dense, "b"))
        return out

    def param_arrays(self):
        return {name: getattr(owner, attr) for name, owner, attr in self.parameters()}

    def decayed_param_names(self):
        names = ["conv0.w"]
        names += [f"block{i}.conv.w" for i in range(len(self.blocks))]
        names.append("dense.w")
        return names

    # -- input pipeline ------------------------------------------------

    def preprocess(self, x):
        """Raw pixels to the network's input: optional border fault, then
        per-instance standardization."""
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim != 4:
            raise ValidationError(f"expected a batch of shape (m, c, h, w), got {x.shape}")
        if self.arch.border_fill is not None:
            x = ops.fill_border(x, BORDER_FILL_WIDTH, self.arch.border_fill)
        return ops.normalize_batch(x)

    # -- forward / backward --------------------------------------------

    def forward(self, x, train=False, want_cache=False):
        """Logits for a batch of raw images.

        Eval mode (train=False) normalizes with running batch-norm
        statistics and touches no state, so concurrent evaluation is
        safe; train mode folds batch statistics into the running
        averages.
        """
        h = self.preprocess(x)
        caches = {}
        h, caches["conv0"] = self.conv0.forward(h)
        for i, blk in enumerate(self.blocks):
            h, caches[f"block{i}"] = blk.forward(h, train)
        h, caches["head_bn"] = self.head_bn.forward(h, train)
        h, caches["head_relu"] = relu(h)
        caches["gap_shape"] = h.shape
        h = global_avgpool(h)
        logits, caches["dense"] = self.dense.forward(h)
        if want_cache:
            return logits, caches
        return logits

    def backward(self, caches, dlogits):
        """Parameter gradients given the upstream logits gradient."""
        grads = {}
        dh, dense_grads = self.dense.backward(caches["dense"], dlogits)
        grads["dense.w"] = dense_grads["w"]
        grads["dense.b"] = dense_grads["b"]
        dh = global_avgpool_backward(dh, caches["gap_shape"])
        dh = relu_backward(caches["head_relu"], dh)
        dh, head_bn_grads = self.head_bn.backward(caches["head_bn"], dh)
        grads["head_bn.gamma"] = head_bn_grads["gamma"]
        grads["head_bn.beta"] = head_bn_grads["beta"]
        for i in range(len(self.blocks) - 1, -1, -1):
            dh, blk_grads = self.blocks[i].backward(caches[f"block{i}"], dh)
            grads[f"block{i}.bn.gamma"] = blk_grads["bn"]["gamma"]
            grads[f"block{i}.bn.beta"] = blk_grads["bn"]["beta"]
            grads[f"block{i}.conv.w"] = blk_grads["conv"]["w"]
        _, conv0_grads = self.conv0.backward(caches["conv0"], dh)
        grads["conv0.w"] = conv0_grads["w"]
        return grads

    def loss_and_grad(self, images, labels, weight_decay=0.0, loss_variant="standard"):
        """Training loss and parameter gradients on one batch.

        The loss is the batch cross-entropy plus the weight-decay term
        0.5 * wd * sum(||W||^2) over conv and dense weights. The
        ``decay_sign_flipped`` variant subtracts the decay term instead;
        ``decay_not_optimized`` reports it but omits it from gradients.
        """
        labels = np.asarray(labels, dtype=np.int64)
        logits, caches = self.forward(images, train=True, want_cache=True)
        ce, dlogits = ops.cross_entropy_loss_grad(logits, labels, loss_variant)
        grads = self.backward(caches, dlogits)
        decay_names = self.decayed_param_names()
        decay_term = 0.0
        if weight_decay:
            params = self.param_arrays()
            decay_term = 0.5 * weight_decay * sum(
                float((params[n].astype(np.float64) ** 2).sum()) for n in decay_names)
        if loss_variant == "decay_sign_flipped":
            loss = ce - decay_term
            decay_scale = -weight_decay
        elif loss_variant == "decay_not_optimized":
            loss = ce + decay_term
            decay_scale = 0.0
        else:
            loss = ce + decay_term
            decay_scale = weight_decay
        if weight_decay and decay_scale != 0.0:
            params = self.param_arrays()
            scale = np.asarray(decay_scale, dtype=self.dtype)
            for n in decay_names:
                grads[n] = grads[n] + scale * params[n]
        return float(loss), grads


def build_model(arch, seed, dtype=np.float32):
    """Initialize a model from a seed.

    Conv weights are normal(0, sqrt(2 / fan_in)); the dense readout is
    normal(0, sqrt(1 / fan_in)) with a zero bias; batch-norm starts at
    gamma 1, beta 0 over (0, 1) running statistics. Draws come from
    PCG64(seed) in the fixed parameter order, independent of the data.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    k = arch.kernel
    pad = k // 2

    def conv_init(out_ch, in_ch):
        fan_in = in_ch * k * k
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(out_ch, in_ch, k, k))
        return Conv2d(w.astype(dtype), padding=pad)

    def bn_init(ch):
        return BatchNorm2d(np.ones(ch, dtype=dtype), np.zeros(ch, dtype=dtype))

    conv0 = conv_init(arch.widths[0], arch.in_channels)
    blocks = []
    prev_w = arch.widths[0]
    for stage, (width, count) in enumerate(zip(arch.widths, arch.blocks)):
        for b in range(count):
            transition = b == 0 and stage > 0
            blocks.append(ResidualBlock(
                bn=bn_init(prev_w),
                conv=conv_init(width, prev_w),
                downsample=transition,
                use_skip=arch.use_skip,
                pad_front_only=arch.skip_pad_front_only,
            ))
            prev_w = width
    head_bn = bn_init(prev_w)
    dense_w = rng.normal(0.0, np.sqrt(1.0 / prev_w), size=(prev_w, arch.classes))
    dense = Dense(dense_w.astype(dtype), np.zeros(arch.classes, dtype=dtype))
    return CnnModel(arch, conv0, blocks, head_bn, dense, dtype, seed)
