"""Sample generation from best-crop annotations: view-adjustment samples with
ground-truth labels, ranking pairs, and zero-border augmentations.

All generators take an explicit numpy ``Generator``; the draw order is part of
the reproducibility contract.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import (
    FULL_FRAME,
    AdjustmentKind,
    KIND_ORDER,
    NO_ADJUSTMENT,
    Perturbation,
    Suggestion,
    ViewBox,
    apply_perturbation,
    box_within_image,
    invert_single_axis,
    suggestion_from_inverse,
)
from .imaging import extract_view, resize

logger = logging.getLogger(__name__)

DEFAULT_ATTEMPTS = 16
DEFAULT_SAMPLE_SIZE = 64

# Perturbation component and range whose inverse yields each adjustment label.
# Shift and zoom ranges are chosen so the ground-truth adjustment magnitude
# falls in [5, 45] percent.
_LABEL_BRANCHES: dict[AdjustmentKind, tuple[str, float, float]] = {
    AdjustmentKind.LEFT: ("ox", 0.05, 0.45),
    AdjustmentKind.RIGHT: ("ox", -0.45, -0.05),
    AdjustmentKind.UP: ("oy", 0.05, 0.45),
    AdjustmentKind.DOWN: ("oy", -0.45, -0.05),
    AdjustmentKind.ZOOM_IN: ("oz", 0.053, 0.818),
    AdjustmentKind.ZOOM_OUT: ("oz", -0.310, -0.048),
    AdjustmentKind.CLOCKWISE: ("oalpha", math.pi / 36, math.pi / 4),
    AdjustmentKind.COUNTER_CLOCKWISE: ("oalpha", -math.pi / 4, -math.pi / 36),
}


class AdjustmentFamily(Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    ZOOM = "zoom"
    ROTATION = "rotation"

    @property
    def kinds(self) -> tuple[AdjustmentKind, AdjustmentKind]:
        return _FAMILY_KINDS[self]


_FAMILY_KINDS = {
    AdjustmentFamily.HORIZONTAL: (AdjustmentKind.LEFT, AdjustmentKind.RIGHT),
    AdjustmentFamily.VERTICAL: (AdjustmentKind.UP, AdjustmentKind.DOWN),
    AdjustmentFamily.ZOOM: (AdjustmentKind.ZOOM_IN, AdjustmentKind.ZOOM_OUT),
    AdjustmentFamily.ROTATION: (AdjustmentKind.CLOCKWISE, AdjustmentKind.COUNTER_CLOCKWISE),
}


@dataclass(frozen=True)
class CropAnnotation:
    """Best-crop annotation for one image, optionally with scored candidate crops."""

    image_id: str
    best_crop: ViewBox
    scored_crops: tuple[tuple[ViewBox, float], ...] | None = None

    def __post_init__(self):
        if self.best_crop.alpha != 0.0:
            raise ValueError("crop annotations must be axis-aligned (alpha = 0)")
        if not box_within_image(self.best_crop):
            raise ValueError(f"best crop outside image: {self.best_crop}")
        if self.scored_crops is not None:
            if len(self.scored_crops) == 0:
                raise ValueError("scored_crops present but empty")
            for box, _ in self.scored_crops:
                if not box_within_image(box):
                    raise ValueError(f"scored crop outside image: {box}")

    def to_json(self) -> dict:
        obj = {"image_id": self.image_id, "best_crop": self.best_crop.to_json()}
        if self.scored_crops is not None:
            obj["scored_crops"] = [
                {"box": box.to_json(), "score": score} for box, score in self.scored_crops
            ]
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "CropAnnotation":
        scored = None
        if "scored_crops" in obj and obj["scored_crops"] is not None:
            scored = tuple(
                (ViewBox.from_json(c["box"]), float(c["score"])) for c in obj["scored_crops"]
            )
        return cls(
            image_id=str(obj["image_id"]),
            best_crop=ViewBox.from_json(obj["best_crop"]),
            scored_crops=scored,
        )


@dataclass(frozen=True)
class LabeledSample:
    """An extracted view with its ground-truth adjustment label."""

    view: np.ndarray
    label: Suggestion
    image_id: str
    sample_box: ViewBox
    best_crop: ViewBox


@dataclass(frozen=True)
class RankPair:
    """Composition comparison pair: ``better`` should outscore ``worse``."""

    better: np.ndarray
    worse: np.ndarray
    source: str  # "scored" | "bestcrop" | "unlabeled"

    def __post_init__(self):
        if self.better.shape != self.worse.shape:
            raise ValueError("pair members must share output dimensions")


@dataclass(frozen=True)
class AugmentConfig:
    """Bounds for the zero-border augmentations (percent, radians)."""

    shift_percent_max: float = 40.0
    zoom_out_percent_max: float = 40.0
    rotation_max: float = math.pi / 4

    def __post_init__(self):
        if self.shift_percent_max < 0 or self.zoom_out_percent_max < 0 or self.rotation_max < 0:
            raise ValueError("augmentation bounds must be non-negative")
        if self.rotation_max > math.pi / 2:
            raise ValueError("rotation bound must not exceed pi/2")


def sample_perturbation_for_label(kind: AdjustmentKind, rng) -> Perturbation:
    """Draw a single-axis perturbation whose inverse is an adjustment of ``kind``."""
    component, lo, hi = _LABEL_BRANCHES[kind]
    value = float(rng.uniform(lo, hi))
    return Perturbation(**{component: value})


def synth_adjustment_sample(
    image: np.ndarray,
    best_crop: ViewBox,
    family: AdjustmentFamily,
    rng,
    out_size: int = DEFAULT_SAMPLE_SIZE,
    attempts: int = DEFAULT_ATTEMPTS,
    image_id: str = "",
) -> LabeledSample | None:
    """Synthesize one labeled view-adjustment sample for a family of adjustments.

    Draws a single-axis perturbation uniformly from the family's range with a
    uniformly chosen sign and applies it to the best crop. Draws whose
    perturbed box leaves the image are resampled up to ``attempts`` times,
    then the sample is discarded (returns None).
    """
    if not box_within_image(best_crop):
        raise ValueError(f"best crop outside image: {best_crop}")
    for _ in range(attempts):
        kind = family.kinds[int(rng.integers(2))]
        p = sample_perturbation_for_label(kind, rng)
        box = apply_perturbation(best_crop, p)
        if box_within_image(box):
            label = suggestion_from_inverse(invert_single_axis(p))
            view = extract_view(image, box, out_size, out_size)
            return LabeledSample(
                view=view, label=label, image_id=image_id, sample_box=box, best_crop=best_crop
            )
    return None


def _sample_for_kind(image, best_crop, kind, rng, out_size, attempts, image_id):
    """Like synth_adjustment_sample but with the adjustment direction fixed."""
    for _ in range(attempts):
        p = sample_perturbation_for_label(kind, rng)
        box = apply_perturbation(best_crop, p)
        if box_within_image(box):
            label = suggestion_from_inverse(invert_single_axis(p))
            view = extract_view(image, box, out_size, out_size)
            return LabeledSample(
                view=view, label=label, image_id=image_id, sample_box=box, best_crop=best_crop
            )
    return None


def synth_adjustment_dataset(
    items,
    rng,
    out_size: int = DEFAULT_SAMPLE_SIZE,
    attempts: int = DEFAULT_ATTEMPTS,
) -> list[LabeledSample]:
    """Build a view-adjustment dataset from (image, CropAnnotation) pairs.

    Per image: one no-adjustment sample (the best crop itself) plus, for each
    of the 8 adjustment kinds, one sample when a feasible perturbation is
    found within the attempt budget.
    """
    samples: list[LabeledSample] = []
    for image, ann in items:
        best = ann.best_crop
        view = extract_view(image, best, out_size, out_size)
        samples.append(
            LabeledSample(
                view=view,
                label=NO_ADJUSTMENT,
                image_id=ann.image_id,
                sample_box=best,
                best_crop=best,
            )
        )
        for kind in KIND_ORDER:
            sample = _sample_for_kind(image, best, kind, rng, out_size, attempts, ann.image_id)
            if sample is not None:
                samples.append(sample)
    if not samples:
        raise ValueError("no samples generated: empty or fully infeasible input")
    counts = kind_counts(samples)
    logger.info("synthesized samples per kind: %s", counts)
    return samples


def kind_counts(samples) -> dict[str, int]:
    """Per-kind sample counts plus "none" and "total", in report order."""
    counts = {kind.value: 0 for kind in KIND_ORDER}
    counts["none"] = 0
    for s in samples:
        label = s.label if isinstance(s, LabeledSample) else s
        counts[label.kind.value if label.adjust else "none"] += 1
    counts["total"] = len(samples)
    return counts


def sample_degrading_perturbation(rng, config: AugmentConfig | None = None) -> Perturbation:
    """Draw one composition-degrading perturbation from the four-way menu:
    shifting, zooming out, cropping (zoom-in plus offset, staying inside the
    box, area ratio in [0.5, 0.8]), or rotation."""
    choice = int(rng.integers(4))
    if choice == 0:  # shifting
        ox, oy = rng.uniform(-0.4, 0.4, size=2)
        return Perturbation(ox=float(ox), oy=float(oy))
    if choice == 1:  # zooming out
        return Perturbation(oz=float(rng.uniform(0.0, 0.4)))
    if choice == 2:  # cropping
        s = float(rng.uniform(math.sqrt(0.5), math.sqrt(0.8)))
        off = (1.0 - s) / 2.0
        ox, oy = rng.uniform(-off, off, size=2)
        return Perturbation(ox=float(ox), oy=float(oy), oz=s - 1.0)
    return Perturbation(oalpha=float(rng.uniform(-math.pi / 4, math.pi / 4)))


def select_scored_pairs(scored_crops, n: int, rng) -> list[tuple[ViewBox, ViewBox]]:
    """Choose ``n`` scored crops (all if fewer) and orient every unordered
    pair by score; equal-score pairs are dropped. Returns (better, worse)
    box pairs."""
    if len(scored_crops) < 2:
        raise ValueError("need at least 2 scored crops")
    k = min(n, len(scored_crops))
    idx = rng.choice(len(scored_crops), size=k, replace=False)
    chosen = [scored_crops[i] for i in idx]
    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            si, sj = chosen[i][1], chosen[j][1]
            if si == sj:
                continue
            hi, lo = (i, j) if si > sj else (j, i)
            pairs.append((chosen[hi][0], chosen[lo][0]))
    return pairs


def sample_bestcrop_pair_box(best_crop: ViewBox, rng, attempts: int = DEFAULT_ATTEMPTS) -> ViewBox | None:
    """Degraded counterpart of a best crop that stays inside the image;
    resampled up to ``attempts`` times, then None."""
    if not box_within_image(best_crop):
        raise ValueError(f"best crop outside image: {best_crop}")
    for _ in range(attempts):
        box = apply_perturbation(best_crop, sample_degrading_perturbation(rng))
        if box_within_image(box):
            return box
    return None


def sample_unlabeled_pair_box(rng) -> ViewBox:
    """Degraded counterpart of the full frame; may extend beyond it."""
    return apply_perturbation(FULL_FRAME, sample_degrading_perturbation(rng))


def pair_from_scored(
    image: np.ndarray,
    scored_crops,
    n: int,
    rng,
    out_size: int = DEFAULT_SAMPLE_SIZE,
) -> list[RankPair]:
    """Ranking pairs from scored candidate crops of one image.

    Selects ``n`` crops (all if fewer), forms every unordered pair oriented
    by score; equal-score pairs are dropped.
    """
    box_pairs = select_scored_pairs(scored_crops, n, rng)
    views: dict[ViewBox, np.ndarray] = {}

    def view_of(box):
        if box not in views:
            views[box] = extract_view(image, box, out_size, out_size)
        return views[box]

    return [
        RankPair(better=view_of(better), worse=view_of(worse), source="scored")
        for better, worse in box_pairs
    ]


def pair_from_bestcrop(
    image: np.ndarray,
    best_crop: ViewBox,
    rng,
    out_size: int = DEFAULT_SAMPLE_SIZE,
    attempts: int = DEFAULT_ATTEMPTS,
) -> RankPair | None:
    """Ranking pair: the best crop versus a degraded perturbation of it.

    The perturbed box must stay inside the image; infeasible draws are
    resampled up to ``attempts`` times, then the pair is skipped (None).
    """
    box = sample_bestcrop_pair_box(best_crop, rng, attempts)
    if box is None:
        return None
    return RankPair(
        better=extract_view(image, best_crop, out_size, out_size),
        worse=extract_view(image, box, out_size, out_size),
        source="bestcrop",
    )


def pair_from_unlabeled(
    image: np.ndarray,
    rng,
    out_size: int = DEFAULT_SAMPLE_SIZE,
) -> RankPair:
    """Ranking pair from a well-composed image: the image itself versus a
    degraded perturbation of the full frame. The perturbed view may extend
    beyond the frame; missing regions are zero-filled."""
    box = sample_unlabeled_pair_box(rng)
    return RankPair(
        better=resize(image, out_size, out_size),
        worse=extract_view(image, box, out_size, out_size),
        source="unlabeled",
    )


def augment_borders(
    image: np.ndarray,
    mode: str,
    rng,
    config: AugmentConfig = AugmentConfig(),
) -> np.ndarray:
    """Zero-border augmentation so borders stop predicting pair orientation.

    Modes: "shift" zeros a random fraction of columns on one side and rows on
    one side; "zoom_out" zeros a symmetric frame on all sides; "rotation"
    rotates by a random angle and back, leaving resampling artifacts and zero
    corners.
    """
    out = np.array(image, dtype=np.float64, copy=True)
    h, w = out.shape[:2]
    if mode == "shift":
        sx = float(rng.uniform(0.0, config.shift_percent_max))
        sy = float(rng.uniform(0.0, config.shift_percent_max))
        ncols = int(round(sx / 100.0 * w))
        nrows = int(round(sy / 100.0 * h))
        left = bool(rng.integers(2))
        top = bool(rng.integers(2))
        if ncols:
            if left:
                out[:, :ncols] = 0.0
            else:
                out[:, w - ncols:] = 0.0
        if nrows:
            if top:
                out[:nrows] = 0.0
            else:
                out[h - nrows:] = 0.0
        return out
    if mode == "zoom_out":
        sz = float(rng.uniform(0.0, config.zoom_out_percent_max))
        ncols = int(round(0.5 * sz / 100.0 * w))
        nrows = int(round(0.5 * sz / 100.0 * h))
        if ncols:
            out[:, :ncols] = 0.0
            out[:, w - ncols:] = 0.0
        if nrows:
            out[:nrows] = 0.0
            out[h - nrows:] = 0.0
        return out
    if mode == "rotation":
        theta = float(rng.uniform(-config.rotation_max, config.rotation_max))
        rotated = extract_view(image, ViewBox(0.5, 0.5, 1.0, 1.0, theta), w, h)
        return extract_view(rotated, ViewBox(0.5, 0.5, 1.0, 1.0, -theta), w, h)
    raise ValueError(f"unknown augmentation mode: {mode!r}")


AUGMENT_MODES = ("shift", "zoom_out", "rotation")


def random_augment(image: np.ndarray, rng, config: AugmentConfig = AugmentConfig()) -> np.ndarray:
    """Apply one uniformly chosen border augmentation."""
    mode = AUGMENT_MODES[int(rng.integers(3))]
    return augment_borders(image, mode, rng, config)
