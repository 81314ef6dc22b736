import math

import numpy as np
import pytest

from viewadjust.geometry import (
    FULL_FRAME,
    KIND_ORDER,
    AdjustmentKind,
    Perturbation,
    Suggestion,
    ViewBox,
    apply_perturbation,
    box_corners,
    box_within_image,
    invert_single_axis,
    rotated_iou,
    suggestion_from_inverse,
    suggestion_to_perturbation,
)

from conftest import monte_carlo_iou, random_viewbox


def corners_oracle(box):
    """Independent corner computation: build the 2x2 matrix and multiply each
    half-extent vector explicitly."""
    ca, sa = math.cos(box.alpha), math.sin(box.alpha)
    out = []
    for vx, vy in [(-box.w / 2, -box.h / 2), (box.w / 2, -box.h / 2),
                   (box.w / 2, box.h / 2), (-box.w / 2, box.h / 2)]:
        out.append((box.cx + ca * vx + sa * vy, box.cy - sa * vx + ca * vy))
    return np.array(out)


def test_corners_axis_aligned():
    got = box_corners(ViewBox(0.5, 0.5, 0.4, 0.2, 0.0))
    expected = np.array([[0.3, 0.4], [0.7, 0.4], [0.7, 0.6], [0.3, 0.6]])
    np.testing.assert_allclose(got, expected, atol=1e-15)


def test_corners_quarter_turn_swaps_extent():
    got = box_corners(ViewBox(0.5, 0.5, 0.2, 0.4, math.pi / 2))
    extent = got.max(axis=0) - got.min(axis=0)
    np.testing.assert_allclose(extent, [0.4, 0.2], atol=1e-15)


def test_corners_match_matrix_oracle(rng):
    for _ in range(300):
        box = random_viewbox(rng)
        np.testing.assert_allclose(box_corners(box), corners_oracle(box), atol=1e-14)


def test_corner_set_invariant_under_quarter_turn(rng):
    for _ in range(100):
        box = random_viewbox(rng)
        rotated = ViewBox(box.cx, box.cy, box.h, box.w, box.alpha + math.pi / 2)
        a = np.sort(np.round(box_corners(box), 12), axis=0)
        b = np.sort(np.round(box_corners(rotated), 12), axis=0)
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_apply_shift():
    box = apply_perturbation(ViewBox(0.5, 0.5, 0.4, 0.3), Perturbation(ox=0.1))
    np.testing.assert_allclose(
        [box.cx, box.cy, box.w, box.h, box.alpha], [0.54, 0.5, 0.4, 0.3, 0.0], atol=1e-15
    )


def test_apply_identity():
    box = ViewBox(0.3, 0.6, 0.2, 0.25, 0.1)
    assert apply_perturbation(box, Perturbation()) == box


def test_apply_zoom_upper_endpoint():
    box = apply_perturbation(ViewBox(0.5, 0.5, 0.4, 0.4), Perturbation(oz=0.818))
    np.testing.assert_allclose([box.w, box.h], [0.7272, 0.7272], atol=1e-12)


def test_invert_shift_and_rotation():
    assert invert_single_axis(Perturbation(ox=0.2)) == Perturbation(ox=-0.2)
    assert invert_single_axis(Perturbation(oalpha=math.pi / 8)) == Perturbation(
        oalpha=-math.pi / 8
    )


def test_invert_zoom_endpoints():
    # solving 1/(1+oz) - 1 at the zoom sampling endpoints lands on the
    # +/-[0.05, 0.45] adjustment-magnitude range
    assert abs(invert_single_axis(Perturbation(oz=0.818)).oz - (-0.45)) < 1e-3
    assert abs(invert_single_axis(Perturbation(oz=-0.310)).oz - 0.449) < 1e-3
    assert abs(invert_single_axis(Perturbation(oz=0.053)).oz - (-0.05)) < 1e-3
    assert abs(invert_single_axis(Perturbation(oz=-0.048)).oz - 0.05) < 1e-3


def test_invert_rejects_composite():
    with pytest.raises(ValueError):
        invert_single_axis(Perturbation(ox=0.1, oy=0.1))


def test_round_trip_single_axis(rng):
    components = ["ox", "oy", "oz", "oalpha"]
    for _ in range(2000):
        box = random_viewbox(rng)
        which = components[int(rng.integers(4))]
        value = float(rng.uniform(-0.4, 0.8)) if which == "oz" else float(rng.uniform(-0.45, 0.45))
        p = Perturbation(**{which: value})
        back = apply_perturbation(apply_perturbation(box, p), invert_single_axis(p))
        for field in ("cx", "cy", "w", "h", "alpha"):
            assert abs(getattr(back, field) - getattr(box, field)) < 1e-12


def test_suggestion_from_inverse_cases():
    left = suggestion_from_inverse(Perturbation(ox=-0.2))
    assert left.adjust and left.kind is AdjustmentKind.LEFT and abs(left.magnitude - 20) < 1e-12

    assert suggestion_from_inverse(Perturbation()) == Suggestion(adjust=False)

    zoom = suggestion_from_inverse(Perturbation(oz=0.25))
    assert zoom.kind is AdjustmentKind.ZOOM_OUT and abs(zoom.magnitude - 25) < 1e-12


def test_label_for_shrinking_perturbation():
    # a 20% shrink needs a 25% zoom-out to undo: 1/0.8 - 1 = 0.25
    label = suggestion_from_inverse(invert_single_axis(Perturbation(oz=-0.2)))
    assert label.kind is AdjustmentKind.ZOOM_OUT
    assert abs(label.magnitude - 25.0) < 1e-9

    label = suggestion_from_inverse(invert_single_axis(Perturbation(ox=0.2)))
    assert label.kind is AdjustmentKind.LEFT
    assert abs(label.magnitude - 20.0) < 1e-9


def test_suggestion_magnitude_out_of_range_rejected():
    with pytest.raises(ValueError):
        suggestion_from_inverse(Perturbation(ox=-0.7))
    with pytest.raises(ValueError):
        suggestion_from_inverse(Perturbation(ox=0.01))


def test_suggestion_perturbation_round_trip(rng):
    for kind in KIND_ORDER:
        lo, hi = (math.pi / 36, math.pi / 4) if kind.is_rotation else (5.0, 45.0)
        for _ in range(20):
            s = Suggestion(adjust=True, kind=kind, magnitude=float(rng.uniform(lo, hi)))
            back = suggestion_from_inverse(suggestion_to_perturbation(s))
            assert back.kind is s.kind
            assert abs(back.magnitude - s.magnitude) < 1e-9


def test_box_within_image():
    assert box_within_image(FULL_FRAME)
    assert not box_within_image(ViewBox(0.5, 0.5, 0.8, 0.8, math.pi / 4))


def test_box_within_image_matches_corner_oracle(rng):
    for _ in range(1000):
        w = float(rng.uniform(0.05, 1.2))
        h = float(rng.uniform(0.05, 1.2))
        box = ViewBox(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)), w, h,
                      float(rng.uniform(-math.pi / 2, math.pi / 2)))
        corners = corners_oracle(box)
        expected = bool(np.all(corners >= 0) and np.all(corners <= 1))
        assert box_within_image(box) == expected


def test_iou_identical_and_disjoint():
    a = ViewBox(0.3, 0.3, 0.2, 0.15, 0.4)
    assert rotated_iou(a, a) == 1.0
    b = ViewBox(0.8, 0.8, 0.1, 0.1, 0.0)
    assert rotated_iou(a, b) == 0.0


def test_iou_rotated_square_analytic():
    a = ViewBox(0.5, 0.5, 0.5, 0.5, 0.0)
    b = ViewBox(0.5, 0.5, 0.5, 0.5, math.pi / 4)
    assert abs(rotated_iou(a, b) - 1 / math.sqrt(2)) < 1e-9


def test_iou_symmetric_and_bounded(rng):
    for _ in range(200):
        a, b = random_viewbox(rng), random_viewbox(rng)
        iou = rotated_iou(a, b)
        assert 0.0 <= iou <= 1.0
        assert abs(iou - rotated_iou(b, a)) < 1e-12


def test_iou_invariant_under_global_motion(rng):
    for _ in range(100):
        a, b = random_viewbox(rng), random_viewbox(rng)
        theta = float(rng.uniform(-math.pi, math.pi))
        tx, ty = rng.uniform(-0.3, 0.3, size=2)
        ca, sa = math.cos(theta), math.sin(theta)

        def move(box):
            cx = ca * box.cx + sa * box.cy + tx
            cy = -sa * box.cx + ca * box.cy + ty
            return ViewBox(cx, cy, box.w, box.h, box.alpha + theta)

        assert abs(rotated_iou(a, b) - rotated_iou(move(a), move(b))) < 1e-9


def test_iou_against_monte_carlo(rng):
    for _ in range(10):
        a, b = random_viewbox(rng), random_viewbox(rng)
        approx = monte_carlo_iou(a, b, rng, n_samples=200_000)
        assert abs(rotated_iou(a, b) - approx) < 0.02


def test_viewbox_json_schema():
    box = ViewBox(0.5, 0.4, 0.3, 0.2, 0.1)
    obj = box.to_json()
    assert set(obj) == {"cx", "cy", "w", "h", "alpha"}
    assert ViewBox.from_json(obj) == box


def test_perturbation_json_schema():
    p = Perturbation(ox=0.1, oy=-0.2, oz=0.3, oalpha=-0.4)
    obj = p.to_json()
    assert set(obj) == {"ox", "oy", "oz", "oalpha"}
    assert Perturbation.from_json(obj) == p


def test_suggestion_json_schema():
    s = Suggestion(adjust=True, kind=AdjustmentKind.ZOOM_IN, magnitude=12.5)
    obj = s.to_json()
    assert set(obj) == {"adjust", "kind", "magnitude"}
    assert Suggestion.from_json(obj) == s
    assert Suggestion.from_json({"adjust": False}) == Suggestion(adjust=False)


def test_suggestion_validation():
    with pytest.raises(ValueError):
        Suggestion(adjust=False, kind=AdjustmentKind.LEFT, magnitude=10)
    with pytest.raises(ValueError):
        Suggestion(adjust=True, kind=AdjustmentKind.LEFT, magnitude=50)
    with pytest.raises(ValueError):
        Suggestion(adjust=True, kind=AdjustmentKind.CLOCKWISE, magnitude=1.0)


def test_viewbox_validation():
    with pytest.raises(ValueError):
        ViewBox(0.5, 0.5, 0.0, 0.1)
    with pytest.raises(ValueError):
        Perturbation(oz=-1.0)
