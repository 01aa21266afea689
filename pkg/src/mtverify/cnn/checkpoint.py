"""Binary checkpoint container for trained models.

A checkpoint is a single .npz holding every parameter tensor, the
batch-norm running statistics, and a JSON header with the format
version, architecture, dtype and seed. Loading restores the arrays
bitwise, so a reloaded model evaluates identically.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import DataFormatError
from .model import ArchDescriptor, CnnModel, build_model

FORMAT_VERSION = 1


def _bn_entries(model):
    out = []
    for i, blk in enumerate(model.blocks):
        out.append((f"block{i}.bn", blk.bn))
    out.append(("head_bn", model.head_bn))
    return out


def save_checkpoint(model, path):
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "residual-convnet",
        "arch": model.arch.to_dict(),
        "dtype": np.dtype(model.dtype).name,
        "seed": model.seed,
    }
    arrays = {"__header__": np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)}
    for name, owner, attr in model.parameters():
        arrays[name] = getattr(owner, attr)
    for prefix, bn in _bn_entries(model):
        arrays[prefix + ".running_mean"] = bn.running_mean
        arrays[prefix + ".running_var"] = bn.running_var
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path):
    with np.load(path) as data:
        if "__header__" not in data:
            raise DataFormatError(f"{path}: not a model checkpoint (no header)")
        header = json.loads(bytes(data["__header__"]).decode())
        if header.get("format_version") != FORMAT_VERSION:
            raise DataFormatError(f"{path}: unsupported checkpoint version {header.get('format_version')!r}")
        if header.get("kind") != "residual-convnet":
            raise DataFormatError(f"{path}: unsupported checkpoint kind {header.get('kind')!r}")
        arch = ArchDescriptor.from_dict(header["arch"])
        dtype = np.dtype(header["dtype"]).type
        model = build_model(arch, header["seed"], dtype=dtype)
        for name, owner, attr in model.parameters():
            if name not in data:
                raise DataFormatError(f"{path}: checkpoint is missing tensor {name!r}")
            setattr(owner, attr, data[name])
        for prefix, bn in _bn_entries(model):
            bn.running_mean = data[prefix + ".running_mean"]
            bn.running_var = data[prefix + ".running_var"]
    return model
