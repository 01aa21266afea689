"""Versioned JSON serialization for trained one-vs-one models.

Floats are stored through Python's repr, which round-trips 64-bit values
exactly, so a saved and reloaded model reproduces its decision values
bitwise.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import DataFormatError
from .kernels import KernelSpec
from .multiclass import SvmModel
from .smo import BinarySvm, SvmTrainConfig

FORMAT_VERSION = 1


def model_to_json(model):
    """Serialize a trained SvmModel to a JSON string."""
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "svm-ovo",
        "classes": model.classes,
        "pairs": [list(p) for p in model.pairs],
        "kernel": {"kind": model.kernel.kind, "gamma": model.kernel.gamma},
        "config": {
            "C": model.config.C,
            "kkt_tolerance": model.config.kkt_tolerance,
            "max_iterations": model.config.max_iterations,
        },
        "machines": [
            {
                "support_vectors": m.support_vectors.tolist(),
                "support_labels": m.support_labels.tolist(),
                "alphas": m.alphas.tolist(),
                "bias": m.bias,
                "iterations": m.iterations,
                "kkt_gap": m.kkt_gap,
                "converged": m.converged,
            }
            for m in model.machines
        ],
    }
    return json.dumps(doc, sort_keys=True)


def model_from_json(text):
    """Inverse of model_to_json."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"not valid JSON: {exc}") from exc
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported model format version {version!r}")
    if doc.get("kind") != "svm-ovo":
        raise DataFormatError(f"unsupported model kind {doc.get('kind')!r}")
    kernel = KernelSpec(kind=doc["kernel"]["kind"], gamma=doc["kernel"]["gamma"])
    config = SvmTrainConfig(**doc["config"])
    machines = [
        BinarySvm(
            kernel=kernel,
            config=config,
            support_vectors=np.array(m["support_vectors"], dtype=np.float64),
            support_labels=np.array(m["support_labels"], dtype=np.float64),
            alphas=np.array(m["alphas"], dtype=np.float64),
            bias=float(m["bias"]),
            iterations=int(m["iterations"]),
            kkt_gap=float(m["kkt_gap"]),
            converged=bool(m.get("converged", True)),
        )
        for m in doc["machines"]
    ]
    return SvmModel(
        classes=[int(c) for c in doc["classes"]],
        pairs=[tuple(p) for p in doc["pairs"]],
        machines=machines,
        kernel=kernel,
        config=config,
    )


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model))


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(fh.read())
