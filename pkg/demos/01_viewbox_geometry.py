#!/usr/bin/env python3
"""Walkthrough of the oriented-viewbox algebra.

A ViewBox is the camera's simulated field of view inside a source image:
center, size and rotation in normalized coordinates. Perturbations deform a
box; their inverses are exactly the adjustment a photographer would apply to
undo the deformation, which is how ground-truth labels get minted.
"""

import math

from viewadjust import (
    Perturbation,
    ViewBox,
    apply_perturbation,
    box_corners,
    box_within_image,
    invert_single_axis,
    rotated_iou,
    suggestion_from_inverse,
)

best_crop = ViewBox(cx=0.5, cy=0.45, w=0.4, h=0.3, alpha=0.0)
print("a best-crop annotation:", best_crop)
print("its corners:\n", box_corners(best_crop))

# shift the view 20% of its width to the right; the photographer should pan
# left by the same amount to recover the good composition
nudge = Perturbation(ox=0.2)
shifted = apply_perturbation(best_crop, nudge)
print("\nafter a 20% rightward shift:", shifted)
correction = invert_single_axis(nudge)
print("corrective perturbation:", correction)
print("as a suggestion:", suggestion_from_inverse(correction).to_json())

# zoom works multiplicatively, so its inverse is not a sign flip
zoom = Perturbation(oz=0.25)
print("\nzoom-out by 25% has inverse oz =", round(invert_single_axis(zoom).oz, 4))
round_trip = apply_perturbation(apply_perturbation(best_crop, zoom), invert_single_axis(zoom))
worst = max(abs(getattr(round_trip, f) - getattr(best_crop, f)) for f in ("cx", "cy", "w", "h", "alpha"))
print(f"round trip restores the box to within {worst:.1e}")

# rotation containment: a large box cannot rotate without leaving the frame
tilted = ViewBox(0.5, 0.5, 0.8, 0.8, math.pi / 4)
print("\n0.8-sized box rotated 45 degrees stays inside the frame?", box_within_image(tilted))

# rotated IoU measures how well a suggested view matches the target view
square = ViewBox(0.5, 0.5, 0.5, 0.5, 0.0)
diamond = ViewBox(0.5, 0.5, 0.5, 0.5, math.pi / 4)
print("IoU of a square with its 45-degree rotation:", round(rotated_iou(square, diamond), 6))
print("(analytic value 1/sqrt(2) =", round(1 / math.sqrt(2), 6), ")")
