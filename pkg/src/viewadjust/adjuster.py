"""Three-head view adjustment model: suggestion probability, 8-way adjustment
classifier, and per-kind magnitude regressors with masked gradients.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    KIND_ORDER,
    NO_ADJUSTMENT,
    Suggestion,
    ViewBox,
    apply_perturbation,
    magnitude_range,
    suggestion_to_perturbation,
)
from .imaging import extract_view, resize
from .nn import (
    Adam,
    ParamLayout,
    TrunkSpec,
    init_trunk_params,
    sigmoid,
    softmax,
    trunk_backward,
    trunk_forward,
    trunk_param_shapes,
)

logger = logging.getLogger(__name__)

N_KINDS = len(KIND_ORDER)
NONE_CLASS = N_KINDS  # index of "no adjustment" in 9-way weighting

# Magnitude head outputs live on a [0, 1] scale mapped into each kind's range.
MAG_LO = np.array([magnitude_range(k)[0] for k in KIND_ORDER])
MAG_HI = np.array([magnitude_range(k)[1] for k in KIND_ORDER])

_KIND_INDEX = {kind: i for i, kind in enumerate(KIND_ORDER)}


@dataclass(frozen=True)
class AdjusterTrainConfig:
    """Hyperparameters of the adjustment-model training loop."""

    labeled_batch: int = 64
    pseudo_batch: int = 64
    learning_rate: float = 2e-5
    weight_decay: float = 5e-4
    steps: int = 1000
    seed: int = 0
    class_weighting: str = "inverse_frequency"

    def __post_init__(self):
        if self.labeled_batch < 1 or self.pseudo_batch < 1:
            raise ValueError("batch sizes must be >= 1")
        if self.class_weighting != "inverse_frequency":
            raise ValueError(f"unknown class weighting: {self.class_weighting}")

    def to_json(self) -> dict:
        return {
            "labeled_batch": self.labeled_batch,
            "pseudo_batch": self.pseudo_batch,
            "learning_rate": self.learning_rate,
            "weight_decay": self.weight_decay,
            "steps": self.steps,
            "seed": self.seed,
            "class_weighting": self.class_weighting,
        }


@dataclass
class AdjusterModel:
    """Shared trunk plus suggestion / adjustment / magnitude heads."""

    trunk: TrunkSpec
    theta: np.ndarray

    @property
    def layout(self) -> ParamLayout:
        return adjuster_param_layout(self.trunk)


@functools.lru_cache(maxsize=None)
def adjuster_param_layout(trunk: TrunkSpec) -> ParamLayout:
    shapes = trunk_param_shapes(trunk)
    shapes["sugg_w"] = (trunk.feature_dim,)
    shapes["sugg_b"] = ()
    shapes["adj_W"] = (trunk.feature_dim, N_KINDS)
    shapes["adj_b"] = (N_KINDS,)
    shapes["mag_W"] = (trunk.feature_dim, N_KINDS)
    shapes["mag_b"] = (N_KINDS,)
    return ParamLayout(shapes)


def new_adjuster(trunk: TrunkSpec = TrunkSpec(), seed: int = 0) -> AdjusterModel:
    rng = np.random.default_rng(seed)
    layout = adjuster_param_layout(trunk)
    theta = np.zeros(layout.size)
    init_trunk_params(trunk, layout, theta, rng)
    scale = 0.01
    for name in ("sugg_w", "adj_W", "mag_W"):
        block = layout.view(theta, name)
        block[...] = rng.normal(0.0, scale, size=block.shape)
    return AdjusterModel(trunk=trunk, theta=theta)


def _flatten_batch(trunk: TrunkSpec, images) -> np.ndarray:
    rows = []
    expected = (trunk.input_size, trunk.input_size, trunk.channels)
    for img in images:
        arr = np.asarray(img, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.shape != expected:
            raise ValueError(f"image shape {arr.shape} does not match trunk input {expected}")
        rows.append(arr.reshape(-1))
    return np.stack(rows) if rows else np.empty((0, trunk.input_dim))


def adjuster_forward(trunk: TrunkSpec, layout: ParamLayout, theta: np.ndarray, x: np.ndarray):
    """Raw head outputs for a flattened batch.

    Returns (suggestion_logits (n,), adjustment_logits (n, 8),
    magnitude_raw (n, 8), activations).
    """
    feats, acts = trunk_forward(trunk, layout, theta, x)
    sugg = feats @ layout.view(theta, "sugg_w") + layout.view(theta, "sugg_b")
    adj = feats @ layout.view(theta, "adj_W") + layout.view(theta, "adj_b")
    mag = feats @ layout.view(theta, "mag_W") + layout.view(theta, "mag_b")
    return sugg, adj, mag, acts


def map_magnitudes(mag_raw: np.ndarray) -> np.ndarray:
    """Map raw magnitude outputs through the logistic onto each kind's range."""
    return MAG_LO + sigmoid(mag_raw) * (MAG_HI - MAG_LO)


def predict(model: AdjusterModel, image: np.ndarray):
    """Raw heads for one image: (suggestion probability, 8-way adjustment
    distribution, 8 magnitudes mapped into their valid ranges)."""
    probs, dists, mags = predict_batch(model, [image])
    return float(probs[0]), dists[0], mags[0]


def predict_batch(model: AdjusterModel, images):
    x = _flatten_batch(model.trunk, images)
    sugg, adj, mag, _ = adjuster_forward(model.trunk, model.layout, model.theta, x)
    return sigmoid(sugg), softmax(adj), map_magnitudes(mag)


def _label_class_index(label: Suggestion) -> int:
    return _KIND_INDEX[label.kind] if label.adjust else NONE_CLASS


def _normalized_magnitude_target(label: Suggestion) -> float:
    k = _KIND_INDEX[label.kind]
    return (label.magnitude - MAG_LO[k]) / (MAG_HI[k] - MAG_LO[k])


def adjuster_loss(sugg_logit: float, adj_logits: np.ndarray, mag_raw: np.ndarray,
                  label: Suggestion, class_weight: float = 1.0):
    """Loss of one sample from raw head outputs, with exact gradient masking.

    Returns (loss, report) where report carries the per-term values, the
    gradients with respect to the raw head outputs, and which heads were
    masked: the adjustment head receives zero gradient unless the label says
    adjust, and only the labeled kind's magnitude regressor is trained.
    """
    p = float(sigmoid(sugg_logit))
    y = 1.0 if label.adjust else 0.0
    l_sugg = -(y * math.log(p) + (1.0 - y) * math.log(1.0 - p))
    d_sugg = (p - y) * class_weight

    d_adj = np.zeros(N_KINDS)
    d_mag = np.zeros(N_KINDS)
    l_adj = 0.0
    l_mag = 0.0
    active = None
    if label.adjust:
        active = _label_class_index(label)
        probs = softmax(adj_logits)
        l_adj = -math.log(max(probs[active], 1e-300))
        d_adj = probs.copy()
        d_adj[active] -= 1.0
        d_adj *= class_weight

        t = _normalized_magnitude_target(label)
        m = float(sigmoid(mag_raw[active]))
        l_mag = abs(m - t)
        d_mag[active] = np.sign(m - t) * m * (1.0 - m) * class_weight

    loss = class_weight * (l_sugg + l_adj + l_mag)
    report = {
        "suggestion": l_sugg,
        "adjustment": l_adj,
        "magnitude": l_mag,
        "d_suggestion": d_sugg,
        "d_adjustment": d_adj,
        "d_magnitude": d_mag,
        "adjustment_masked": not label.adjust,
        "magnitude_active_index": active,
    }
    return loss, report


def class_weights(labels) -> np.ndarray:
    """Inverse-frequency weights over the 9 classes (8 kinds + none).

    Weights are normalized to mean 1 over the classes present; zero-count
    classes get weight 0 (with a warning).
    """
    if len(labels) == 0:
        raise ValueError("empty label multiset")
    counts = np.zeros(N_KINDS + 1)
    for label in labels:
        counts[_label_class_index(label)] += 1
    present = counts > 0
    if not present.all():
        missing = [
            (KIND_ORDER[i].value if i < N_KINDS else "none")
            for i in np.flatnonzero(~present)
        ]
        logger.warning("classes absent from training labels get zero weight: %s", missing)
    weights = np.zeros(N_KINDS + 1)
    weights[present] = 1.0 / counts[present]
    weights[present] /= weights[present].mean()
    return weights


def adjuster_batch_loss(
    trunk: TrunkSpec,
    layout: ParamLayout,
    theta: np.ndarray,
    x: np.ndarray,
    labels,
    sample_weights: np.ndarray,
    with_grad: bool = True,
):
    """Weighted mean adjuster loss over a batch; returns (total, components, grad)."""
    n = len(x)
    sugg, adj, mag, acts = adjuster_forward(trunk, layout, theta, x)
    p = sigmoid(sugg)
    y = np.array([1.0 if lbl.adjust else 0.0 for lbl in labels])
    w = np.asarray(sample_weights, dtype=np.float64)

    eps = 1e-300
    l_sugg = -(y * np.log(np.maximum(p, eps)) + (1 - y) * np.log(np.maximum(1 - p, eps)))

    adjust_rows = np.flatnonzero(y > 0)
    l_adj = np.zeros(n)
    l_mag = np.zeros(n)
    d_adj = np.zeros((n, N_KINDS))
    d_mag_raw = np.zeros((n, N_KINDS))
    if adjust_rows.size:
        kinds = np.array([_label_class_index(labels[i]) for i in adjust_rows])
        probs = softmax(adj[adjust_rows])
        l_adj[adjust_rows] = -np.log(np.maximum(probs[np.arange(len(adjust_rows)), kinds], eps))
        targets = np.array([_normalized_magnitude_target(labels[i]) for i in adjust_rows])
        m = sigmoid(mag[adjust_rows, kinds])
        l_mag[adjust_rows] = np.abs(m - targets)
        if with_grad:
            onehot = np.zeros_like(probs)
            onehot[np.arange(len(adjust_rows)), kinds] = 1.0
            d_adj[adjust_rows] = (probs - onehot) * (w[adjust_rows] / n)[:, None]
            d_mag_raw[adjust_rows, kinds] = (
                np.sign(m - targets) * m * (1.0 - m) * w[adjust_rows] / n
            )

    per_sample = w * (l_sugg + l_adj + l_mag)
    total = float(per_sample.sum() / n)
    components = {
        "suggestion": float((w * l_sugg).sum() / n),
        "adjustment": float((w * l_adj).sum() / n),
        "magnitude": float((w * l_mag).sum() / n),
    }
    if not with_grad:
        return total, components, None

    grad = np.zeros(layout.size)
    d_sugg = (p - y) * w / n
    feats = acts[-1]
    layout.view(grad, "sugg_w")[...] = feats.T @ d_sugg
    layout.view(grad, "sugg_b")[...] = d_sugg.sum()
    layout.view(grad, "adj_W")[...] = feats.T @ d_adj
    layout.view(grad, "adj_b")[...] = d_adj.sum(axis=0)
    layout.view(grad, "mag_W")[...] = feats.T @ d_mag_raw
    layout.view(grad, "mag_b")[...] = d_mag_raw.sum(axis=0)
    dfeat = (
        np.outer(d_sugg, layout.view(theta, "sugg_w"))
        + d_adj @ layout.view(theta, "adj_W").T
        + d_mag_raw @ layout.view(theta, "mag_W").T
    )
    trunk_backward(trunk, layout, theta, acts, dfeat, grad)
    return total, components, grad


def _materialize(trunk: TrunkSpec, samples):
    """Flatten sample views to the trunk input, resizing when needed."""
    size = trunk.input_size
    views = []
    for s in samples:
        v = s.view
        if v.shape[:2] != (size, size):
            v = resize(v, size, size)
        views.append(v)
    return _flatten_batch(trunk, views)


def train_adjuster(labeled, pseudo, config: AdjusterTrainConfig, trunk: TrunkSpec = TrunkSpec()):
    """Train the adjustment model on labeled plus pseudo-labeled samples.

    ``labeled`` must be non-empty; ``pseudo`` may be empty (supervised
    baseline). Class weights are inverse frequencies over the combined
    training distribution. Returns (model, trace).
    """
    if not labeled:
        raise ValueError("labeled data must be non-empty")
    rng = np.random.default_rng(config.seed)
    layout = adjuster_param_layout(trunk)
    model = new_adjuster(trunk, seed=config.seed)
    adam = Adam(layout.size, config.learning_rate, config.weight_decay)

    x_lab = _materialize(trunk, labeled)
    lab_labels = [s.label for s in labeled]
    x_pse = _materialize(trunk, pseudo) if pseudo else None
    pse_labels = [s.label for s in pseudo] if pseudo else []

    weights = class_weights(lab_labels + pse_labels)
    w_lab = np.array([weights[_label_class_index(lbl)] for lbl in lab_labels])
    w_pse = np.array([weights[_label_class_index(lbl)] for lbl in pse_labels])

    trace = []
    for step in range(config.steps):
        idx_l = rng.integers(len(labeled), size=config.labeled_batch)
        if pseudo:
            idx_p = rng.integers(len(pseudo), size=config.pseudo_batch)
            x = np.vstack([x_lab[idx_l], x_pse[idx_p]])
            batch_labels = [lab_labels[i] for i in idx_l] + [pse_labels[i] for i in idx_p]
            batch_w = np.concatenate([w_lab[idx_l], w_pse[idx_p]])
        else:
            x = x_lab[idx_l]
            batch_labels = [lab_labels[i] for i in idx_l]
            batch_w = w_lab[idx_l]
        total, comps, grad = adjuster_batch_loss(trunk, layout, model.theta, x, batch_labels, batch_w)
        if not np.isfinite(total):
            raise RuntimeError(f"adjuster training diverged at step {step}: {comps}")
        adam.step(model.theta, grad)
        trace.append((step, total, comps["suggestion"], comps["adjustment"], comps["magnitude"]))
    return model, trace


def infer_suggestion(model: AdjusterModel, image: np.ndarray, threshold: float = 0.5) -> Suggestion:
    """Inference cascade: suggest only when the suggestion probability strictly
    exceeds the threshold; then pick the argmax adjustment and its regressed
    magnitude clamped into range."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    prob, dist, mags = predict(model, image)
    if not prob > threshold:
        return NO_ADJUSTMENT
    k = int(np.argmax(dist))
    magnitude = float(np.clip(mags[k], MAG_LO[k], MAG_HI[k]))
    return Suggestion(adjust=True, kind=KIND_ORDER[k], magnitude=magnitude)


def refine_iteratively(
    model: AdjusterModel,
    source_image: np.ndarray,
    viewport: ViewBox,
    max_steps: int = 3,
    threshold: float = 0.5,
):
    """Iteratively adjust a viewport over a wide source image.

    Each entry of the returned trajectory is (viewport, suggestion at that
    viewport); the suggestion is applied to produce the next viewport until
    the model stops suggesting or ``max_steps`` adjustments were applied, so
    the trajectory holds at most max_steps + 1 entries.
    """
    size = model.trunk.input_size
    trajectory = []
    current = viewport
    for step in range(max_steps + 1):
        view = extract_view(source_image, current, size, size)
        suggestion = infer_suggestion(model, view, threshold)
        trajectory.append((current, suggestion))
        if not suggestion.adjust or step == max_steps:
            break
        current = apply_perturbation(current, suggestion_to_perturbation(suggestion))
    return trajectory
