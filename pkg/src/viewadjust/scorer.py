"""Composition scoring model: logistic score head on the shared trunk, the
margin ranking loss, and the joint training loop over scored-crop, best-crop
and unlabeled pair sources.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numpy as np

from .nn import (
    Adam,
    ParamLayout,
    TrunkSpec,
    init_trunk_params,
    sigmoid,
    trunk_backward,
    trunk_forward,
    trunk_param_shapes,
)
from .synthesis import AugmentConfig, pair_from_bestcrop, pair_from_scored, pair_from_unlabeled, random_augment

logger = logging.getLogger(__name__)

PAIR_TERMS = ("scored", "bestcrop", "unlabeled")


@dataclass(frozen=True)
class ScorerTrainConfig:
    """Hyperparameters of the scoring-model training loop."""

    delta: float = 0.1          # ranking margin
    n_scored: int = 16          # crops drawn from one scored image per step
    k_bestcrop: int = 16        # best-crop pairs per step
    p_unlabeled: int = 16       # unlabeled pairs per step
    learning_rate: float = 2e-5
    weight_decay: float = 5e-4
    steps: int = 1000
    seed: int = 0
    augment: AugmentConfig = field(default_factory=AugmentConfig)

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"margin must be in (0, 1), got {self.delta}")
        if self.n_scored < 2 or self.k_bestcrop < 1 or self.p_unlabeled < 1:
            raise ValueError("need n_scored >= 2 and k_bestcrop, p_unlabeled >= 1")
        if self.steps < 0 or self.learning_rate <= 0:
            raise ValueError("bad steps or learning rate")

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "n_scored": self.n_scored,
            "k_bestcrop": self.k_bestcrop,
            "p_unlabeled": self.p_unlabeled,
            "learning_rate": self.learning_rate,
            "weight_decay": self.weight_decay,
            "steps": self.steps,
            "seed": self.seed,
        }


@dataclass
class ScorerModel:
    """Trunk descriptor plus one flat parameter vector (trunk + score head)."""

    trunk: TrunkSpec
    theta: np.ndarray

    @property
    def layout(self) -> ParamLayout:
        return scorer_param_layout(self.trunk)


@functools.lru_cache(maxsize=None)
def scorer_param_layout(trunk: TrunkSpec) -> ParamLayout:
    shapes = trunk_param_shapes(trunk)
    shapes["head_w"] = (trunk.feature_dim,)
    shapes["head_b"] = ()
    return ParamLayout(shapes)


def new_scorer(trunk: TrunkSpec = TrunkSpec(), seed: int = 0) -> ScorerModel:
    """Freshly initialized scorer: He trunk weights, small random head."""
    rng = np.random.default_rng(seed)
    layout = scorer_param_layout(trunk)
    theta = np.zeros(layout.size)
    init_trunk_params(trunk, layout, theta, rng)
    head = layout.view(theta, "head_w")
    head[...] = rng.normal(0.0, 1.0 / np.sqrt(trunk.feature_dim), size=head.shape)
    return ScorerModel(trunk=trunk, theta=theta)


def _flatten_batch(trunk: TrunkSpec, images) -> np.ndarray:
    rows = []
    for img in images:
        arr = np.asarray(img, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        expected = (trunk.input_size, trunk.input_size, trunk.channels)
        if arr.shape != expected:
            raise ValueError(f"image shape {arr.shape} does not match trunk input {expected}")
        rows.append(arr.reshape(-1))
    return np.stack(rows) if rows else np.empty((0, trunk.input_dim))


def forward_scores(trunk: TrunkSpec, layout: ParamLayout, theta: np.ndarray, x: np.ndarray):
    """Scores for a batch of flattened inputs; returns (probs, activations)."""
    feats, acts = trunk_forward(trunk, layout, theta, x)
    logits = feats @ layout.view(theta, "head_w") + layout.view(theta, "head_b")
    return sigmoid(logits), acts


def score(model: ScorerModel, image: np.ndarray) -> float:
    """Composition score in (0, 1). The image must match the trunk input size."""
    x = _flatten_batch(model.trunk, [image])
    probs, _ = forward_scores(model.trunk, model.layout, model.theta, x)
    return float(probs[0])


def score_batch(model: ScorerModel, images) -> np.ndarray:
    x = _flatten_batch(model.trunk, images)
    probs, _ = forward_scores(model.trunk, model.layout, model.theta, x)
    return probs


def ranking_loss(s_p, s_n, delta):
    """Margin ranking loss max(0, delta + s_n - s_p); elementwise on arrays."""
    return np.maximum(0.0, delta + np.asarray(s_n) - np.asarray(s_p))


def scorer_batch_loss(
    trunk: TrunkSpec,
    layout: ParamLayout,
    theta: np.ndarray,
    x: np.ndarray,
    term_pairs: dict,
    delta: float,
    with_grad: bool = True,
):
    """Joint ranking loss over one assembled step batch.

    ``term_pairs`` maps each term name in PAIR_TERMS to a list of
    (better_index, worse_index) pairs into ``x``. The total is the sum of the
    per-term means; empty terms contribute zero. Returns
    (total, per-term dict, grad or None).
    """
    probs, acts = forward_scores(trunk, layout, theta, x)
    dscore = np.zeros(len(x))
    terms = {}
    for term in PAIR_TERMS:
        plist = term_pairs.get(term, ())
        if len(plist) == 0:
            terms[term] = 0.0
            continue
        pi = np.fromiter((p for p, _ in plist), dtype=np.int64)
        ni = np.fromiter((n for _, n in plist), dtype=np.int64)
        margins = delta + probs[ni] - probs[pi]
        losses = np.maximum(margins, 0.0)
        terms[term] = float(losses.mean())
        active = margins > 0.0
        scale = 1.0 / len(plist)
        np.add.at(dscore, ni[active], scale)
        np.add.at(dscore, pi[active], -scale)
    total = float(sum(terms.values()))
    if not with_grad:
        return total, terms, None

    grad = np.zeros(layout.size)
    dlogits = dscore * probs * (1.0 - probs)
    head_w = layout.view(theta, "head_w")
    layout.view(grad, "head_w")[...] = acts[-1].T @ dlogits
    layout.view(grad, "head_b")[...] = dlogits.sum()
    trunk_backward(trunk, layout, theta, acts, np.outer(dlogits, head_w), grad)
    return total, terms, grad


def _assemble_pair_batch(scored_data, bestcrop_data, unlabeled_data, config, trunk, rng):
    """Draw one training step's pairs from the three sources.

    Augmentation follows the training scheme: both members of labeled pairs,
    only the better member of unlabeled pairs.
    """
    size = trunk.input_size
    members = []
    term_pairs = {term: [] for term in PAIR_TERMS}

    def add(img):
        members.append(img)
        return len(members) - 1

    if scored_data:
        image, crops = scored_data[int(rng.integers(len(scored_data)))]
        for rp in pair_from_scored(image, crops, config.n_scored, rng, out_size=size):
            b = random_augment(rp.better, rng, config.augment)
            w = random_augment(rp.worse, rng, config.augment)
            term_pairs["scored"].append((add(b), add(w)))

    if bestcrop_data:
        for _ in range(config.k_bestcrop):
            image, best = bestcrop_data[int(rng.integers(len(bestcrop_data)))]
            rp = pair_from_bestcrop(image, best, rng, out_size=size)
            if rp is None:
                continue
            b = random_augment(rp.better, rng, config.augment)
            w = random_augment(rp.worse, rng, config.augment)
            term_pairs["bestcrop"].append((add(b), add(w)))

    if unlabeled_data:
        for _ in range(config.p_unlabeled):
            image = unlabeled_data[int(rng.integers(len(unlabeled_data)))]
            rp = pair_from_unlabeled(image, rng, out_size=size)
            b = random_augment(rp.better, rng, config.augment)
            term_pairs["unlabeled"].append((add(b), add(rp.worse)))

    x = _flatten_batch(trunk, members)
    return x, term_pairs


def train_scorer(
    scored_data,
    bestcrop_data,
    unlabeled_data,
    config: ScorerTrainConfig,
    trunk: TrunkSpec = TrunkSpec(),
):
    """Train the composition scorer on the three pair sources.

    ``scored_data``: list of (image, [(ViewBox, score), ...]);
    ``bestcrop_data``: list of (image, ViewBox); ``unlabeled_data``: list of
    well-composed images. Any source may be empty (its term contributes 0),
    but not all. Returns (model, trace) where trace rows are
    (step, total, scored, bestcrop, unlabeled).
    """
    if not (scored_data or bestcrop_data or unlabeled_data):
        raise ValueError("at least one data source must be non-empty")
    rng = np.random.default_rng(config.seed)
    layout = scorer_param_layout(trunk)
    model = new_scorer(trunk, seed=config.seed)
    adam = Adam(layout.size, config.learning_rate, config.weight_decay)
    trace = []
    for step in range(config.steps):
        x, term_pairs = _assemble_pair_batch(
            scored_data, bestcrop_data, unlabeled_data, config, trunk, rng
        )
        if sum(len(v) for v in term_pairs.values()) == 0:
            trace.append((step, 0.0, 0.0, 0.0, 0.0))
            continue
        total, terms, grad = scorer_batch_loss(trunk, layout, model.theta, x, term_pairs, config.delta)
        if not np.isfinite(total):
            raise RuntimeError(
                f"scorer training diverged at step {step}: loss={total}, terms={terms}"
            )
        adam.step(model.theta, grad)
        trace.append((step, total, terms["scored"], terms["bestcrop"], terms["unlabeled"]))
    return model, trace


def regression_loss(
    trunk: TrunkSpec,
    layout: ParamLayout,
    theta: np.ndarray,
    x: np.ndarray,
    targets: np.ndarray,
    with_grad: bool = True,
):
    """Mean squared error of the score against targets in [0, 1]."""
    probs, acts = forward_scores(trunk, layout, theta, x)
    residual = probs - targets
    total = float(np.mean(residual**2))
    if not with_grad:
        return total, None
    grad = np.zeros(layout.size)
    dlogits = (2.0 / len(x)) * residual * probs * (1.0 - probs)
    head_w = layout.view(theta, "head_w")
    layout.view(grad, "head_w")[...] = acts[-1].T @ dlogits
    layout.view(grad, "head_b")[...] = dlogits.sum()
    trunk_backward(trunk, layout, theta, acts, np.outer(dlogits, head_w), grad)
    return total, grad


def train_scorer_regression(mos_data, config: ScorerTrainConfig, trunk: TrunkSpec = TrunkSpec()):
    """Aesthetic-regression baseline: fit the score to mean opinion targets.

    ``mos_data``: list of (image, target) with targets normalized to [0, 1].
    Returns (model, trace) with trace rows (step, mse).
    """
    if not mos_data:
        raise ValueError("empty regression dataset")
    from .imaging import resize

    size = trunk.input_size
    images = []
    for img, _ in mos_data:
        arr = np.asarray(img, dtype=np.float64)
        if arr.shape[:2] != (size, size):
            arr = resize(arr, size, size)
        images.append(arr)
    x_all = _flatten_batch(trunk, images)
    targets = np.array([float(t) for _, t in mos_data])
    if targets.min() < 0.0 or targets.max() > 1.0:
        raise ValueError("regression targets must be normalized to [0, 1]")

    rng = np.random.default_rng(config.seed)
    layout = scorer_param_layout(trunk)
    model = new_scorer(trunk, seed=config.seed)
    adam = Adam(layout.size, config.learning_rate, config.weight_decay)
    batch = config.k_bestcrop
    trace = []
    for step in range(config.steps):
        idx = rng.integers(len(mos_data), size=batch)
        total, grad = regression_loss(trunk, layout, model.theta, x_all[idx], targets[idx])
        if not np.isfinite(total):
            raise RuntimeError(f"regression training diverged at step {step}: loss={total}")
        adam.step(model.theta, grad)
        trace.append((step, total))
    return model, trace
