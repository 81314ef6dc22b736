import math

import numpy as np
import pytest

from viewadjust.geometry import ViewBox


def random_viewbox(rng, allow_rotation=True) -> ViewBox:
    """A random box that fits inside the unit square with room to spare."""
    w = float(rng.uniform(0.1, 0.5))
    h = float(rng.uniform(0.1, 0.5))
    alpha = float(rng.uniform(-math.pi / 2, math.pi / 2)) if allow_rotation else 0.0
    half_diag = 0.5 * math.hypot(w, h)
    cx = float(rng.uniform(half_diag, 1.0 - half_diag))
    cy = float(rng.uniform(half_diag, 1.0 - half_diag))
    return ViewBox(cx, cy, w, h, alpha)


def point_in_box(points: np.ndarray, box: ViewBox) -> np.ndarray:
    """Vectorized membership test for points (n, 2) in an oriented box."""
    ca, sa = math.cos(box.alpha), math.sin(box.alpha)
    dx = points[:, 0] - box.cx
    dy = points[:, 1] - box.cy
    # inverse rotation into box-local coordinates
    lx = ca * dx - sa * dy
    ly = sa * dx + ca * dy
    return (np.abs(lx) <= box.w / 2) & (np.abs(ly) <= box.h / 2)


def monte_carlo_iou(a: ViewBox, b: ViewBox, rng, n_samples: int = 1_000_000) -> float:
    """Point-sampling IoU oracle over the joint bounding box of both boxes."""
    from viewadjust.geometry import box_corners

    corners = np.vstack([box_corners(a), box_corners(b)])
    lo = corners.min(axis=0)
    hi = corners.max(axis=0)
    pts = rng.uniform(lo, hi, size=(n_samples, 2))
    in_a = point_in_box(pts, a)
    in_b = point_in_box(pts, b)
    union = np.count_nonzero(in_a | in_b)
    if union == 0:
        return 0.0
    return np.count_nonzero(in_a & in_b) / union


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
