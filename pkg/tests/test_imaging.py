import math

import numpy as np
import pytest

from viewadjust.geometry import FULL_FRAME, Perturbation, ViewBox, apply_perturbation
from viewadjust.imaging import extract_view, resize, validate_image

def bilinear_oracle(image, box, out_w, out_h):
    """Per-pixel reference implementation: explicit loop, zero fill."""
    img = np.atleast_3d(np.asarray(image, float))
    src_h, src_w, ch = img.shape
    ca, sa = math.cos(box.alpha), math.sin(box.alpha)
    out = np.zeros((out_h, out_w, ch))

    def read(xi, yi):
        if 0 <= xi < src_w and 0 <= yi < src_h:
            return img[yi, xi]
        return np.zeros(ch)

    for j in range(out_h):
        for i in range(out_w):
            vx = ((i + 0.5) / out_w - 0.5) * box.w
            vy = ((j + 0.5) / out_h - 0.5) * box.h
            ux = box.cx + ca * vx + sa * vy
            uy = box.cy - sa * vx + ca * vy
            px, py = ux * src_w - 0.5, uy * src_h - 0.5
            x0, y0 = math.floor(px), math.floor(py)
            fx, fy = px - x0, py - y0
            out[j, i] = (
                read(x0, y0) * (1 - fx) * (1 - fy)
                + read(x0 + 1, y0) * fx * (1 - fy)
                + read(x0, y0 + 1) * (1 - fx) * fy
                + read(x0 + 1, y0 + 1) * fx * fy
            )
    return out if np.asarray(image).ndim == 3 else out[:, :, 0]


def test_identity_box_reproduces_source(rng):
    img = rng.uniform(size=(23, 17, 3))
    out = extract_view(img, FULL_FRAME, 17, 23)
    assert np.array_equal(out, img)


def test_identity_box_reproduces_source_grayscale(rng):
    img = rng.uniform(size=(9, 31))
    assert np.array_equal(extract_view(img, FULL_FRAME, 31, 9), img)


def test_full_frame_resize_matches_oracle(rng):
    img = rng.uniform(size=(5, 7, 3))
    got = resize(img, 9, 4)
    np.testing.assert_allclose(got, bilinear_oracle(img, FULL_FRAME, 9, 4), atol=1e-12)


def test_rotated_box_matches_oracle(rng):
    img = rng.uniform(size=(12, 10, 3))
    box = ViewBox(0.4, 0.55, 0.5, 0.3, 0.7)
    got = extract_view(img, box, 8, 6)
    np.testing.assert_allclose(got, bilinear_oracle(img, box, 8, 6), atol=1e-12)


def test_box_fully_outside_gives_zeros(rng):
    img = rng.uniform(size=(8, 8, 3))
    out = extract_view(img, ViewBox(2.0, 2.0, 0.5, 0.5, 0.2), 16, 16)
    assert np.all(out == 0.0)


def test_half_outside_mean_matches_area_fraction(rng):
    img = np.ones((128, 128))
    box = ViewBox(0.9, 0.5, 0.5, 0.6, 0.3)
    out = extract_view(img, box, 64, 64)
    pts_local = rng.uniform(-0.5, 0.5, size=(200_000, 2))
    ca, sa = math.cos(box.alpha), math.sin(box.alpha)
    ux = box.cx + (ca * pts_local[:, 0] * box.w + sa * pts_local[:, 1] * box.h)
    uy = box.cy + (-sa * pts_local[:, 0] * box.w + ca * pts_local[:, 1] * box.h)
    inside = (ux >= 0) & (ux <= 1) & (uy >= 0) & (uy <= 1)
    assert abs(out.mean() - inside.mean()) < 0.02


def test_values_stay_in_unit_interval(rng):
    img = rng.uniform(size=(20, 20, 3))
    box = ViewBox(0.5, 0.5, 1.4, 1.4, 0.3)
    out = extract_view(img, box, 33, 21)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_degenerate_output_size_rejected(rng):
    img = rng.uniform(size=(4, 4))
    with pytest.raises(ValueError):
        extract_view(img, FULL_FRAME, 0, 4)
    with pytest.raises(ValueError):
        extract_view(img, FULL_FRAME, 4, 0)


def test_shifted_full_frame_zero_columns():
    img = np.ones((50, 50))
    box = apply_perturbation(FULL_FRAME, Perturbation(ox=0.3))
    out = extract_view(img, box, 50, 50)
    # view moved right: rightmost ~30% of the view has no source content
    assert np.all(out[:, -14:] == 0.0)
    assert np.all(out[:, :34] > 0.99)


def test_validate_image():
    with pytest.raises(ValueError):
        validate_image(np.full((4, 4), 1.5))
    with pytest.raises(ValueError):
        validate_image(np.zeros((4, 4, 2)))
    with pytest.raises(ValueError):
        validate_image(np.zeros((0, 4)))
    out = validate_image(np.zeros((4, 4, 3)))
    assert out.dtype == np.float64
