"""Oriented viewbox arithmetic: perturbations, corners, containment, rotated IoU.

Conventions used throughout the package:

- Coordinates are normalized to [0, 1] with y growing downward.
- ``alpha`` is the counter-clockwise angle (on screen) between the image
  frame and the box, in radians. Clockwise adjustments decrease alpha.
- Up moves the box center along -y, Left along -x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

# Valid magnitude ranges for adjustment suggestions.
SHIFT_ZOOM_PERCENT_MIN = 5.0
SHIFT_ZOOM_PERCENT_MAX = 45.0
ROTATION_RAD_MIN = math.pi / 36
ROTATION_RAD_MAX = math.pi / 4

_RANGE_EPS = 1e-9
_CLIP_EPS = 1e-12


class AdjustmentKind(Enum):
    """The eight camera view adjustments, in canonical report order."""

    LEFT = "left"
    RIGHT = "right"
    UP = "up"
    DOWN = "down"
    ZOOM_IN = "zoom_in"
    ZOOM_OUT = "zoom_out"
    CLOCKWISE = "clockwise"
    COUNTER_CLOCKWISE = "counter_clockwise"

    @property
    def is_rotation(self) -> bool:
        return self in (AdjustmentKind.CLOCKWISE, AdjustmentKind.COUNTER_CLOCKWISE)

    @property
    def label(self) -> str:
        """Display name used in report tables."""
        return _KIND_LABELS[self]


_KIND_LABELS = {
    AdjustmentKind.LEFT: "Left",
    AdjustmentKind.RIGHT: "Right",
    AdjustmentKind.UP: "Up",
    AdjustmentKind.DOWN: "Down",
    AdjustmentKind.ZOOM_IN: "Zoom-in",
    AdjustmentKind.ZOOM_OUT: "Zoom-out",
    AdjustmentKind.CLOCKWISE: "Clockwise",
    AdjustmentKind.COUNTER_CLOCKWISE: "Counter",
}

KIND_ORDER = tuple(AdjustmentKind)


@dataclass(frozen=True)
class ViewBox:
    """Oriented rectangle in normalized source-image coordinates.

    ``cx, cy`` center, ``w, h`` size as fractions of the source image,
    ``alpha`` rotation in radians (counter-clockwise positive).
    """

    cx: float
    cy: float
    w: float
    h: float
    alpha: float = 0.0

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"viewbox size must be positive, got w={self.w}, h={self.h}")

    def to_json(self) -> dict:
        return {"cx": self.cx, "cy": self.cy, "w": self.w, "h": self.h, "alpha": self.alpha}

    @classmethod
    def from_json(cls, obj: dict) -> "ViewBox":
        return cls(
            cx=float(obj["cx"]),
            cy=float(obj["cy"]),
            w=float(obj["w"]),
            h=float(obj["h"]),
            alpha=float(obj.get("alpha", 0.0)),
        )


FULL_FRAME = ViewBox(0.5, 0.5, 1.0, 1.0, 0.0)


@dataclass(frozen=True)
class Perturbation:
    """Offset applied to a ViewBox: shifts in box-size fractions, relative zoom, rotation."""

    ox: float = 0.0
    oy: float = 0.0
    oz: float = 0.0
    oalpha: float = 0.0

    def __post_init__(self):
        if not self.oz > -1.0:
            raise ValueError(f"zoom offset must keep positive size, got oz={self.oz}")

    @property
    def components(self) -> tuple:
        return (self.ox, self.oy, self.oz, self.oalpha)

    def is_single_axis(self) -> bool:
        """True when at most one component is nonzero."""
        return sum(1 for c in self.components if c != 0.0) <= 1

    def to_json(self) -> dict:
        return {"ox": self.ox, "oy": self.oy, "oz": self.oz, "oalpha": self.oalpha}

    @classmethod
    def from_json(cls, obj: dict) -> "Perturbation":
        return cls(
            ox=float(obj.get("ox", 0.0)),
            oy=float(obj.get("oy", 0.0)),
            oz=float(obj.get("oz", 0.0)),
            oalpha=float(obj.get("oalpha", 0.0)),
        )


@dataclass(frozen=True)
class Suggestion:
    """Either "no adjustment" or one of the 8 adjustment kinds plus a magnitude.

    Magnitude is a percent of the current view size in [5, 45] for shifts and
    zoom, radians in [pi/36, pi/4] for rotation.
    """

    adjust: bool
    kind: AdjustmentKind | None = None
    magnitude: float | None = None

    def __post_init__(self):
        if not self.adjust:
            if self.kind is not None or self.magnitude is not None:
                raise ValueError("no-adjustment suggestion must not carry kind or magnitude")
            return
        if self.kind is None or self.magnitude is None:
            raise ValueError("adjustment suggestion requires kind and magnitude")
        lo, hi = magnitude_range(self.kind)
        if not (lo - _RANGE_EPS <= self.magnitude <= hi + _RANGE_EPS):
            raise ValueError(
                f"magnitude {self.magnitude} outside [{lo}, {hi}] for {self.kind.value}"
            )

    def to_json(self) -> dict:
        if not self.adjust:
            return {"adjust": False}
        return {"adjust": True, "kind": self.kind.value, "magnitude": self.magnitude}

    @classmethod
    def from_json(cls, obj: dict) -> "Suggestion":
        if not obj["adjust"]:
            return cls(adjust=False)
        return cls(
            adjust=True,
            kind=AdjustmentKind(obj["kind"]),
            magnitude=float(obj["magnitude"]),
        )


NO_ADJUSTMENT = Suggestion(adjust=False)


def magnitude_range(kind: AdjustmentKind) -> tuple[float, float]:
    """Valid suggestion magnitude range for a kind (percent, or radians for rotation)."""
    if kind.is_rotation:
        return (ROTATION_RAD_MIN, ROTATION_RAD_MAX)
    return (SHIFT_ZOOM_PERCENT_MIN, SHIFT_ZOOM_PERCENT_MAX)


def rotation_matrix(alpha: float) -> np.ndarray:
    """2x2 matrix rotating a vector counter-clockwise (on screen) in y-down coordinates."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array([[ca, sa], [-sa, ca]])


def box_corners(box: ViewBox) -> np.ndarray:
    """Corner positions of a viewbox, shape (4, 2).

    Order: top-left, top-right, bottom-right, bottom-left of the unrotated
    box, each rotated by ``alpha`` about the center (u = c + R_alpha v).
    """
    hw, hh = box.w / 2.0, box.h / 2.0
    v = np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])
    c = np.array([box.cx, box.cy])
    return c + v @ rotation_matrix(box.alpha).T


def apply_perturbation(box: ViewBox, p: Perturbation) -> ViewBox:
    """Apply a perturbation to a viewbox.

    Shifts are fractions of the box's own width/height, zoom is relative
    (w' = w * (1 + oz)), rotation is additive. The result may extend outside
    the unit square; callers check containment.
    """
    return ViewBox(
        cx=box.cx + box.w * p.ox,
        cy=box.cy + box.h * p.oy,
        w=box.w * (1.0 + p.oz),
        h=box.h * (1.0 + p.oz),
        alpha=box.alpha + p.oalpha,
    )


def invert_single_axis(p: Perturbation) -> Perturbation:
    """Exact inverse of a single-axis perturbation.

    Shifts and rotation negate; zoom inverts multiplicatively
    (oz_inv = 1/(1+oz) - 1). Composite perturbations are rejected.
    """
    if not p.is_single_axis():
        raise ValueError(f"perturbation is not single-axis: {p}")
    if p.oz != 0.0:
        return Perturbation(oz=1.0 / (1.0 + p.oz) - 1.0)
    return Perturbation(ox=-p.ox, oy=-p.oy, oalpha=-p.oalpha)


def suggestion_from_inverse(p_inv: Perturbation) -> Suggestion:
    """Map a single-axis inverse perturbation to the suggestion it realizes.

    The zero perturbation maps to "no adjustment". A magnitude outside the
    valid suggestion range raises, signaling a synthesis bug.
    """
    if not p_inv.is_single_axis():
        raise ValueError(f"perturbation is not single-axis: {p_inv}")
    ox, oy, oz, oa = p_inv.components
    if ox != 0.0:
        kind = AdjustmentKind.LEFT if ox < 0 else AdjustmentKind.RIGHT
        return Suggestion(adjust=True, kind=kind, magnitude=abs(ox) * 100.0)
    if oy != 0.0:
        kind = AdjustmentKind.UP if oy < 0 else AdjustmentKind.DOWN
        return Suggestion(adjust=True, kind=kind, magnitude=abs(oy) * 100.0)
    if oz != 0.0:
        kind = AdjustmentKind.ZOOM_IN if oz < 0 else AdjustmentKind.ZOOM_OUT
        return Suggestion(adjust=True, kind=kind, magnitude=abs(oz) * 100.0)
    if oa != 0.0:
        kind = AdjustmentKind.CLOCKWISE if oa < 0 else AdjustmentKind.COUNTER_CLOCKWISE
        return Suggestion(adjust=True, kind=kind, magnitude=abs(oa))
    return NO_ADJUSTMENT


def suggestion_to_perturbation(s: Suggestion) -> Perturbation:
    """Perturbation that applies a suggestion to the current viewbox.

    Inverse of :func:`suggestion_from_inverse` on its output.
    """
    if not s.adjust:
        return Perturbation()
    m = s.magnitude if s.kind.is_rotation else s.magnitude / 100.0
    k = s.kind
    if k is AdjustmentKind.LEFT:
        return Perturbation(ox=-m)
    if k is AdjustmentKind.RIGHT:
        return Perturbation(ox=m)
    if k is AdjustmentKind.UP:
        return Perturbation(oy=-m)
    if k is AdjustmentKind.DOWN:
        return Perturbation(oy=m)
    if k is AdjustmentKind.ZOOM_IN:
        return Perturbation(oz=-m)
    if k is AdjustmentKind.ZOOM_OUT:
        return Perturbation(oz=m)
    if k is AdjustmentKind.CLOCKWISE:
        return Perturbation(oalpha=-m)
    return Perturbation(oalpha=m)


def box_within_image(box: ViewBox) -> bool:
    """True iff all four corners lie in the unit square (boundary inclusive)."""
    corners = box_corners(box)
    return bool(np.all(corners >= 0.0) and np.all(corners <= 1.0))


def _polygon_area(poly: np.ndarray) -> float:
    """Signed shoelace area; positive for the corner order of box_corners."""
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _clip_polygon(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex subject by a convex, positively
    oriented clip polygon. Collinear points count as inside."""
    output = [tuple(pt) for pt in subject]
    n = len(clip)
    for i in range(n):
        if not output:
            break
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        inp = output
        output = []
        m = len(inp)
        for j in range(m):
            cx, cy = inp[j]
            nx, ny = inp[(j + 1) % m]
            cur_cross = ex * (cy - ay) - ey * (cx - ax)
            nxt_cross = ex * (ny - ay) - ey * (nx - ax)
            cur_in = cur_cross >= -_CLIP_EPS
            nxt_in = nxt_cross >= -_CLIP_EPS
            if cur_in:
                output.append((cx, cy))
            if cur_in != nxt_in and cur_cross != nxt_cross:
                # cross varies linearly along the segment; zero at t
                t = cur_cross / (cur_cross - nxt_cross)
                output.append((cx + t * (nx - cx), cy + t * (ny - cy)))
    return np.array(output) if output else np.empty((0, 2))


def rotated_iou(a: ViewBox, b: ViewBox) -> float:
    """Intersection over union of two oriented rectangles, in [0, 1].

    Uses convex polygon clipping; degenerate (zero-area) intersections
    return 0.
    """
    pa, pb = box_corners(a), box_corners(b)
    inter_poly = _clip_polygon(pa, pb)
    if len(inter_poly) < 3:
        return 0.0
    inter = _polygon_area(inter_poly)
    if inter <= _CLIP_EPS:
        return 0.0
    union = _polygon_area(pa) + _polygon_area(pb) - inter
    return float(min(max(inter / union, 0.0), 1.0))
