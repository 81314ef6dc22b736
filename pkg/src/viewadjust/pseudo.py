"""Pseudo-label minting: simulate the 72-candidate adjustment grid on an
unlabeled image and keep the best-scoring adjustment when it beats the
original score by the improvement margin.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    FULL_FRAME,
    KIND_ORDER,
    NO_ADJUSTMENT,
    AdjustmentKind,
    Suggestion,
    apply_perturbation,
    suggestion_to_perturbation,
)
from .imaging import extract_view
from .scorer import ScorerModel, score_batch

logger = logging.getLogger(__name__)

GRID_MAGNITUDES_PERCENT = tuple(float(m) for m in range(5, 50, 5))
GRID_MAGNITUDES_RADIANS = tuple((k + 1) * (math.pi / 36) for k in range(9))


def candidate_grid() -> tuple[tuple[AdjustmentKind, float], ...]:
    """The 8 x 9 candidate adjustments: kinds in declaration order, nine
    equally spaced magnitudes ascending (5..45 percent, pi/36..pi/4 radians)."""
    grid = []
    for kind in KIND_ORDER:
        mags = GRID_MAGNITUDES_RADIANS if kind.is_rotation else GRID_MAGNITUDES_PERCENT
        for m in mags:
            grid.append((kind, m))
    return tuple(grid)


@dataclass(frozen=True)
class PseudoLabelConfig:
    """Improvement margin and candidate grid for pseudo-label generation."""

    margin: float = 0.2
    grid: tuple = field(default_factory=candidate_grid)

    def __post_init__(self):
        if not 0.0 <= self.margin <= 1.0:
            raise ValueError(f"margin must be in [0, 1], got {self.margin}")


def simulate_adjustment(image: np.ndarray, kind: AdjustmentKind, magnitude: float) -> np.ndarray:
    """Result of applying an adjustment to the image's full-frame view.

    The viewbox moves/scales/rotates per the adjustment and the view is
    re-extracted at the input resolution; regions without source content are
    zero-filled. Planar simulation; depth is ignored.
    """
    suggestion = Suggestion(adjust=True, kind=kind, magnitude=magnitude)
    box = apply_perturbation(FULL_FRAME, suggestion_to_perturbation(suggestion))
    h, w = np.asarray(image).shape[:2]
    return extract_view(image, box, w, h)


def pseudo_label(model, image: np.ndarray, config: PseudoLabelConfig = PseudoLabelConfig()) -> Suggestion:
    """Mint a view-adjustment pseudo label for one image.

    Scores the original plus every simulated candidate; returns the argmax
    candidate when its score strictly exceeds the original by the margin,
    otherwise "no adjustment". Ties break to the first candidate in grid
    order. ``model`` is a ScorerModel or any callable image -> score.
    """
    views = [simulate_adjustment(image, kind, mag) for kind, mag in config.grid]
    if isinstance(model, ScorerModel):
        scores = score_batch(model, [image] + views)
        original, candidates = float(scores[0]), scores[1:]
    else:
        original = float(model(image))
        candidates = np.array([float(model(v)) for v in views])
    best = int(np.argmax(candidates))
    if candidates[best] > original + config.margin:
        kind, mag = config.grid[best]
        return Suggestion(adjust=True, kind=kind, magnitude=mag)
    return NO_ADJUSTMENT


def pseudo_label_batch(model, images, config: PseudoLabelConfig = PseudoLabelConfig(), log_every: int = 1000):
    """Pseudo labels for an iterable of images; logs progress and the final
    label mix."""
    labels = []
    n_adjust = 0
    for i, image in enumerate(images):
        label = pseudo_label(model, image, config)
        labels.append(label)
        n_adjust += int(label.adjust)
        if log_every and (i + 1) % log_every == 0:
            logger.info("pseudo-labeled %d images (%d adjust)", i + 1, n_adjust)
    logger.info(
        "pseudo labeling done: %d images, %d adjust / %d none",
        len(labels), n_adjust, len(labels) - n_adjust,
    )
    return labels
