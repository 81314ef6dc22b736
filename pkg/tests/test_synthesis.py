import math

import numpy as np
import pytest

from viewadjust.geometry import (
    FULL_FRAME,
    AdjustmentKind,
    Perturbation,
    ViewBox,
    apply_perturbation,
    box_corners,
    rotated_iou,
    suggestion_to_perturbation,
)
from viewadjust.imaging import extract_view
from viewadjust.synthesis import (
    AdjustmentFamily,
    CropAnnotation,
    augment_borders,
    kind_counts,
    pair_from_bestcrop,
    pair_from_scored,
    pair_from_unlabeled,
    sample_degrading_perturbation,
    synth_adjustment_dataset,
    synth_adjustment_sample,
)


class FixedRng:
    """Stub RNG returning canned values for uniform/integers draws."""

    def __init__(self, uniforms=(), integers=()):
        self._uniforms = list(uniforms)
        self._integers = list(integers)

    def uniform(self, lo=0.0, hi=1.0, size=None):
        v = self._uniforms.pop(0)
        if size is not None:
            return np.full(size, v)
        return v

    def integers(self, n):
        return self._integers.pop(0)


def checkerboard(size=48):
    y, x = np.mgrid[0:size, 0:size]
    return (((x // 4) + (y // 4)) % 2).astype(float)


def test_fullframe_bestcrop_horizontal_infeasible(rng):
    img = checkerboard()
    got = synth_adjustment_sample(img, FULL_FRAME, AdjustmentFamily.HORIZONTAL, rng)
    assert got is None


def test_sample_round_trip_and_ranges(rng):
    img = checkerboard(64)
    ann = CropAnnotation("img0", ViewBox(0.5, 0.5, 0.3, 0.3))
    samples = synth_adjustment_dataset([(img, ann)], rng, out_size=16)
    counts = kind_counts(samples)
    assert counts["none"] == 1
    assert counts["total"] == 9  # all eight kinds feasible for a small centered crop
    for s in samples:
        if not s.label.adjust:
            assert s.sample_box == s.best_crop
            continue
        # applying the labeled adjustment to the sample box recovers the best crop
        restored = apply_perturbation(s.sample_box, suggestion_to_perturbation(s.label))
        assert rotated_iou(restored, s.best_crop) >= 0.999
        for field in ("cx", "cy", "w", "h", "alpha"):
            assert abs(getattr(restored, field) - getattr(s.best_crop, field)) < 1e-9
        if s.label.kind.is_rotation:
            assert math.pi / 36 - 1e-9 <= s.label.magnitude <= math.pi / 4 + 1e-9
        else:
            assert 5.0 - 1e-9 <= s.label.magnitude <= 45.0 + 1e-9


def test_fullframe_bestcrop_dataset_kinds(rng):
    img = checkerboard()
    ann = CropAnnotation("full", ViewBox(0.5, 0.5, 1.0, 1.0))
    samples = synth_adjustment_dataset([(img, ann)], rng, out_size=8)
    counts = kind_counts(samples)
    assert counts["none"] == 1
    for kind in (AdjustmentKind.LEFT, AdjustmentKind.RIGHT, AdjustmentKind.UP, AdjustmentKind.DOWN):
        assert counts[kind.value] == 0
    # only zoom/rotation can remain; shifts always leave the frame
    allowed = {k.value for k in AdjustmentKind if k.value.startswith("zoom") or k.is_rotation}
    present = {k for k, v in counts.items() if v and k not in ("none", "total")}
    assert present <= allowed


def test_pair_from_scored_orientation(rng):
    img = np.linspace(0, 1, 40 * 40).reshape(40, 40)
    crops = [(ViewBox(0.3, 0.3, 0.2, 0.2), 0.9), (ViewBox(0.7, 0.7, 0.2, 0.2), 0.3)]
    pairs = pair_from_scored(img, crops, 2, rng, out_size=8)
    assert len(pairs) == 1
    best_view = extract_view(img, crops[0][0], 8, 8)
    np.testing.assert_array_equal(pairs[0].better, best_view)
    assert pairs[0].source == "scored"


def test_pair_from_scored_counts(rng):
    img = checkerboard(32)
    crops = [(ViewBox(0.5, 0.5, 0.2 + 0.01 * i, 0.2), float(i)) for i in range(20)]
    pairs = pair_from_scored(img, crops, 16, rng, out_size=4)
    assert len(pairs) == 120

    tied = [(ViewBox(0.5, 0.5, 0.2, 0.2), 1.0)] * 5
    assert pair_from_scored(img, tied, 5, rng, out_size=4) == []

    with pytest.raises(ValueError):
        pair_from_scored(img, tied[:1], 4, rng)


def test_degrading_perturbation_menu(rng):
    saw = set()
    for _ in range(400):
        p = sample_degrading_perturbation(rng)
        if p.oalpha != 0.0:
            saw.add("rotation")
            assert abs(p.oalpha) <= math.pi / 4 and p.ox == p.oy == p.oz == 0
        elif p.oz > 0.0:
            saw.add("zoom_out")
            assert p.oz <= 0.4 and p.ox == p.oy == 0
        elif p.oz < 0.0:
            saw.add("cropping")
            area_ratio = (1.0 + p.oz) ** 2
            assert 0.5 - 1e-9 <= area_ratio <= 0.8 + 1e-9
            off = -p.oz / 2.0  # (1 - s)/2
            assert abs(p.ox) <= off + 1e-12 and abs(p.oy) <= off + 1e-12
        else:
            saw.add("shift")
            assert abs(p.ox) <= 0.4 and abs(p.oy) <= 0.4
    assert saw == {"rotation", "zoom_out", "cropping", "shift"}


def test_cropping_stays_inside_crop(rng):
    best = ViewBox(0.5, 0.5, 0.4, 0.4)
    for _ in range(300):
        p = sample_degrading_perturbation(rng)
        if p.oz >= 0.0 or p.oalpha != 0.0:
            continue
        box = apply_perturbation(best, p)
        corners = box_corners(box)
        assert np.all(corners[:, 0] >= best.cx - best.w / 2 - 1e-12)
        assert np.all(corners[:, 0] <= best.cx + best.w / 2 + 1e-12)
        assert np.all(corners[:, 1] >= best.cy - best.h / 2 - 1e-12)
        assert np.all(corners[:, 1] <= best.cy + best.h / 2 + 1e-12)


def test_pair_from_bestcrop_contract(rng):
    img = checkerboard(64)
    best = ViewBox(0.5, 0.5, 0.5, 0.5)
    n_ok = 0
    for _ in range(50):
        pair = pair_from_bestcrop(img, best, rng, out_size=8)
        if pair is None:
            continue
        n_ok += 1
        assert pair.better.shape == pair.worse.shape
        assert pair.source == "bestcrop"
        np.testing.assert_array_equal(pair.better, extract_view(img, best, 8, 8))
    assert n_ok > 30


def test_pair_from_unlabeled_shift_zero_fraction():
    img = np.ones((50, 50))
    box = apply_perturbation(FULL_FRAME, Perturbation(ox=0.3))
    worse = extract_view(img, box, 50, 50)
    zero_frac = np.mean(worse == 0.0)
    assert abs(zero_frac - 0.3) < 0.02


def test_pair_from_unlabeled_zoom_out_interior():
    img = np.ones((64, 64))
    box = apply_perturbation(FULL_FRAME, Perturbation(oz=0.4))
    worse = extract_view(img, box, 64, 64)
    interior = np.mean(worse > 0.5)
    assert abs(interior - (1 / 1.4) ** 2) < 0.03


def test_pair_from_unlabeled_contract(rng):
    img = np.ones((32, 32, 3))
    pair = pair_from_unlabeled(img, rng, out_size=16)
    assert pair.better.shape == pair.worse.shape == (16, 16, 3)
    assert pair.source == "unlabeled"
    np.testing.assert_allclose(pair.better, 1.0)


def test_augment_shift_zero_magnitude_is_identity():
    img = np.ones((20, 20))
    out = augment_borders(img, "shift", FixedRng(uniforms=[0.0, 0.0], integers=[0, 0]))
    np.testing.assert_array_equal(out, img)


def test_augment_zoom_out_interior_fraction():
    img = np.ones((100, 100))
    out = augment_borders(img, "zoom_out", FixedRng(uniforms=[40.0]))
    assert np.mean(out == 1.0) == pytest.approx(0.36)
    assert np.all(out[:20] == 0) and np.all(out[-20:] == 0)
    assert np.all(out[:, :20] == 0) and np.all(out[:, -20:] == 0)


def test_augment_rotation_zero_angle_is_identity(rng):
    img = rng.uniform(size=(16, 16))
    out = augment_borders(img, "rotation", FixedRng(uniforms=[0.0]))
    np.testing.assert_array_equal(out, img)


def test_augment_rotation_round_trip_keeps_interior(rng):
    img = np.ones((40, 40))
    out = augment_borders(img, "rotation", FixedRng(uniforms=[math.pi / 6]))
    assert out.shape == img.shape
    # center survives, corners are zeroed artifacts
    assert out[20, 20] > 0.9
    assert out[0, 0] == 0.0


def test_labeled_pairs_have_no_zero_fill(rng):
    img = np.ones((48, 48))
    best = ViewBox(0.5, 0.5, 0.5, 0.5)
    for _ in range(40):
        pair = pair_from_bestcrop(img, best, rng, out_size=8)
        if pair is not None:
            assert pair.worse.min() > 0.0
            assert pair.better.min() > 0.0


def test_border_presence_not_predictive_after_augment(rng):
    # with I_p augmented, "has a zero border" identifies the worse member in
    # at most 60% of unlabeled pairs
    img = np.ones((24, 24))
    only_worse = 0
    n = 1000
    for _ in range(n):
        pair = pair_from_unlabeled(img, rng, out_size=24)
        from viewadjust.synthesis import random_augment

        better = random_augment(pair.better, rng)
        worse = pair.worse

        def has_border(a):
            edges = np.concatenate([a[0], a[-1], a[:, 0], a[:, -1]])
            return bool(np.any(edges < 1e-9))

        if has_border(worse) and not has_border(better):
            only_worse += 1
    assert only_worse / n <= 0.60
