"""Deterministic single-file checkpoints for the two model types.

A checkpoint is JSON with the trunk descriptor, base64-encoded float64
parameters, and a free-form config fingerprint. Serialization is
byte-reproducible: sorted keys, no timestamps.
"""

from __future__ import annotations

import base64
import json

import numpy as np

from .adjuster import AdjusterModel, adjuster_param_layout
from .nn import TrunkSpec
from .scorer import ScorerModel, scorer_param_layout

FORMAT_NAME = "viewadjust-checkpoint"
FORMAT_VERSION = 1


def checkpoint_bytes(model, fingerprint: dict | None = None) -> bytes:
    if isinstance(model, ScorerModel):
        model_type = "scorer"
    elif isinstance(model, AdjusterModel):
        model_type = "adjuster"
    else:
        raise TypeError(f"unsupported model type: {type(model).__name__}")
    obj = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "model_type": model_type,
        "trunk": model.trunk.to_json(),
        "params_b64": base64.b64encode(np.ascontiguousarray(model.theta, dtype=np.float64).tobytes()).decode("ascii"),
        "fingerprint": fingerprint or {},
    }
    return (json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n").encode("ascii")


def save_checkpoint(path, model, fingerprint: dict | None = None) -> None:
    with open(path, "wb") as f:
        f.write(checkpoint_bytes(model, fingerprint))


def load_checkpoint(path):
    """Load a checkpoint; returns (model, fingerprint)."""
    with open(path, "rb") as f:
        obj = json.loads(f.read().decode("ascii"))
    if obj.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} file: {path}")
    if obj.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {obj.get('version')}")
    trunk = TrunkSpec.from_json(obj["trunk"])
    theta = np.frombuffer(base64.b64decode(obj["params_b64"]), dtype=np.float64).copy()
    model_type = obj["model_type"]
    if model_type == "scorer":
        expected = scorer_param_layout(trunk).size
        model = ScorerModel(trunk=trunk, theta=theta)
    elif model_type == "adjuster":
        expected = adjuster_param_layout(trunk).size
        model = AdjusterModel(trunk=trunk, theta=theta)
    else:
        raise ValueError(f"unknown model type: {model_type}")
    if theta.size != expected:
        raise ValueError(f"parameter count {theta.size} does not match layout {expected}")
    return model, obj.get("fingerprint", {})
