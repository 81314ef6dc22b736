"""Small trainable trunk with deterministic numpy forward/backward passes.

The reference trunk flattens the input image and runs it through two ReLU
hidden layers. All parameters of a model (trunk plus heads) live in one flat
float64 vector addressed through a :class:`ParamLayout`, which keeps Adam
updates and finite-difference checks simple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrunkSpec:
    """Descriptor of the feature trunk: input geometry and hidden widths."""

    input_size: int = 32
    channels: int = 3
    hidden: tuple[int, ...] = (256, 64)

    def __post_init__(self):
        if self.input_size <= 0 or self.channels not in (1, 3):
            raise ValueError(f"bad trunk input: {self.input_size}x{self.input_size}x{self.channels}")
        if not self.hidden or any(h <= 0 for h in self.hidden):
            raise ValueError(f"bad hidden widths: {self.hidden}")

    @property
    def input_dim(self) -> int:
        return self.input_size * self.input_size * self.channels

    @property
    def feature_dim(self) -> int:
        return self.hidden[-1]

    def to_json(self) -> dict:
        return {
            "input_size": self.input_size,
            "channels": self.channels,
            "hidden": list(self.hidden),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TrunkSpec":
        return cls(
            input_size=int(obj["input_size"]),
            channels=int(obj["channels"]),
            hidden=tuple(int(h) for h in obj["hidden"]),
        )


class ParamLayout:
    """Maps named parameter blocks to slices of one flat vector."""

    def __init__(self, shapes: dict[str, tuple[int, ...]]):
        self.shapes = dict(shapes)
        self.offsets = {}
        off = 0
        for name, shape in self.shapes.items():
            n = int(np.prod(shape)) if shape else 1
            self.offsets[name] = (off, off + n)
            off += n
        self.size = off

    def view(self, theta: np.ndarray, name: str) -> np.ndarray:
        lo, hi = self.offsets[name]
        return theta[lo:hi].reshape(self.shapes[name])

    def unpack(self, theta: np.ndarray) -> dict[str, np.ndarray]:
        return {name: self.view(theta, name) for name in self.shapes}

    def pack(self, blocks: dict[str, np.ndarray]) -> np.ndarray:
        theta = np.zeros(self.size)
        for name, arr in blocks.items():
            self.view(theta, name)[...] = arr
        return theta


def trunk_param_shapes(spec: TrunkSpec) -> dict[str, tuple[int, ...]]:
    shapes = {}
    dims = [spec.input_dim, *spec.hidden]
    for i in range(len(spec.hidden)):
        shapes[f"W{i}"] = (dims[i], dims[i + 1])
        shapes[f"b{i}"] = (dims[i + 1],)
    return shapes


def init_trunk_params(spec: TrunkSpec, layout: ParamLayout, theta: np.ndarray, rng) -> None:
    """He-normal weights, zero biases, written into the trunk blocks of theta."""
    dims = [spec.input_dim, *spec.hidden]
    for i in range(len(spec.hidden)):
        w = layout.view(theta, f"W{i}")
        w[...] = rng.normal(0.0, math.sqrt(2.0 / dims[i]), size=w.shape)
        layout.view(theta, f"b{i}")[...] = 0.0


def trunk_forward(spec: TrunkSpec, layout: ParamLayout, theta: np.ndarray, x: np.ndarray):
    """Forward pass over a batch of flattened inputs, shape (n, input_dim).

    Returns (features, cache) where cache holds the activations needed by
    :func:`trunk_backward`.
    """
    acts = [x]
    h = x
    for i in range(len(spec.hidden)):
        z = h @ layout.view(theta, f"W{i}") + layout.view(theta, f"b{i}")
        h = np.maximum(z, 0.0)
        acts.append(h)
    return h, acts


def trunk_backward(
    spec: TrunkSpec,
    layout: ParamLayout,
    theta: np.ndarray,
    acts: list,
    dfeat: np.ndarray,
    grad: np.ndarray,
) -> None:
    """Accumulate trunk gradients into the flat grad vector.

    ``acts`` is the cache from trunk_forward; dfeat is dL/dfeatures.
    """
    dh = dfeat
    for i in reversed(range(len(spec.hidden))):
        dz = dh * (acts[i + 1] > 0.0)
        grad_w = layout.view(grad, f"W{i}")
        grad_w += acts[i].T @ dz
        grad_b = layout.view(grad, f"b{i}")
        grad_b += dz.sum(axis=0)
        if i > 0:
            dh = dz @ layout.view(theta, f"W{i}").T


def sigmoid(z):
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


class Adam:
    """Adam with decoupled weight decay; state is part of training, not the model."""

    def __init__(self, size, learning_rate, weight_decay=0.0, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = learning_rate
        self.wd = weight_decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        mhat = self.m / (1.0 - self.beta1**self.t)
        vhat = self.v / (1.0 - self.beta2**self.t)
        theta -= self.lr * (mhat / (np.sqrt(vhat) + self.eps) + self.wd * theta)


def relative_error(a: float, b: float) -> float:
    denom = max(abs(a), abs(b), 1e-12)
    return abs(a - b) / denom


def fd_directional_check(loss_fn, theta: np.ndarray, grad: np.ndarray, rng, step=1e-4) -> float:
    """Relative error between grad . d and a central finite difference along a
    random unit direction d. Exercises every parameter jointly."""
    d = rng.normal(size=theta.shape)
    d /= np.linalg.norm(d)
    analytic = float(grad @ d)
    plus = loss_fn(theta + step * d)
    minus = loss_fn(theta - step * d)
    return relative_error(analytic, (plus - minus) / (2.0 * step))


def fd_coordinate_check(
    loss_fn, theta: np.ndarray, grad: np.ndarray, rng, num_coords=150, step=1e-4
) -> float:
    """Max relative error of central finite differences on sampled coordinates.

    Coordinates are sampled among entries whose analytic gradient is not
    negligible (>= 1e-3 of the max magnitude); entries below that floor are
    dominated by truncation noise and are covered by the directional check.
    """
    mags = np.abs(grad)
    floor = mags.max() * 1e-3
    candidates = np.flatnonzero(mags >= floor)
    if candidates.size == 0:
        return 0.0
    idx = rng.choice(candidates, size=min(num_coords, candidates.size), replace=False)
    worst = 0.0
    for i in idx:
        orig = theta[i]
        theta[i] = orig + step
        plus = loss_fn(theta)
        theta[i] = orig - step
        minus = loss_fn(theta)
        theta[i] = orig
        fd = (plus - minus) / (2.0 * step)
        worst = max(worst, relative_error(float(grad[i]), fd))
    return worst
