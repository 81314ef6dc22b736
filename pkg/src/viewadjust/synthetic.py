"""Synthetic scene generator: a bright disk above a level horizon.

A view is well composed when the disk sits at the view center at a fixed
size ratio with the horizon level. Scenes are analytic, so any viewbox can
be rendered directly (an infinite world, no zero borders), while finite
rasters of the full frame feed the regular extraction machinery. This is the
desk-scale task used to exercise the full two-stage pipeline.

Scenes come in two appearance domains: "full" spans wide palettes, disk
sizes and background textures; "narrow" is a tight sub-distribution standing
in for a small annotated corpus. Composition rules are shared, so a model
trained on narrow-domain labels alone generalizes poorly to the full domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    FULL_FRAME,
    KIND_ORDER,
    ViewBox,
    apply_perturbation,
    box_within_image,
    rotation_matrix,
)
from .synthesis import CropAnnotation, sample_perturbation_for_label

# disk radius as a fraction of a well-composed view's width
GOOD_RATIO = 0.20


@dataclass(frozen=True)
class Scene:
    disk_x: float
    disk_y: float
    disk_r: float
    sky: tuple
    ground: tuple
    disk_color: tuple
    tex_amp: float = 0.0
    tex_kx: float = 10.0
    tex_ky: float = 10.0
    tex_px: float = 0.0
    tex_py: float = 0.0

    @property
    def horizon_y(self) -> float:
        return self.disk_y + 1.6 * self.disk_r


def random_scene(rng, domain: str = "full") -> Scene:
    """Draw a scene from the chosen appearance domain."""
    if domain == "full":
        return Scene(
            disk_x=float(rng.uniform(0.35, 0.65)),
            disk_y=float(rng.uniform(0.35, 0.65)),
            disk_r=float(rng.uniform(0.05, 0.075)),
            sky=tuple(rng.uniform(0.30, 0.80, size=3)),
            ground=tuple(rng.uniform(0.02, 0.40, size=3)),
            disk_color=tuple(rng.uniform(0.85, 1.0, size=3)),
            tex_amp=float(rng.uniform(0.0, 0.12)),
            tex_kx=float(rng.uniform(8.0, 30.0)),
            tex_ky=float(rng.uniform(8.0, 30.0)),
            tex_px=float(rng.uniform(0.0, 2 * math.pi)),
            tex_py=float(rng.uniform(0.0, 2 * math.pi)),
        )
    if domain == "narrow":
        return Scene(
            disk_x=float(rng.uniform(0.42, 0.58)),
            disk_y=float(rng.uniform(0.42, 0.58)),
            disk_r=float(rng.uniform(0.052, 0.060)),
            sky=(float(rng.uniform(0.50, 0.58)), float(rng.uniform(0.62, 0.70)), float(rng.uniform(0.82, 0.90))),
            ground=(float(rng.uniform(0.12, 0.18)), float(rng.uniform(0.24, 0.30)), float(rng.uniform(0.08, 0.14))),
            disk_color=(float(rng.uniform(0.95, 1.0)), float(rng.uniform(0.85, 0.92)), float(rng.uniform(0.60, 0.70))),
            tex_amp=float(rng.uniform(0.0, 0.03)),
            tex_kx=12.0,
            tex_ky=12.0,
            tex_px=float(rng.uniform(0.0, 2 * math.pi)),
            tex_py=float(rng.uniform(0.0, 2 * math.pi)),
        )
    raise ValueError(f"unknown scene domain: {domain!r}")


def ideal_view(scene: Scene) -> ViewBox:
    """The well-composed view: disk centered at the good size ratio, level."""
    w = scene.disk_r / GOOD_RATIO
    return ViewBox(scene.disk_x, scene.disk_y, w, w, 0.0)


def render_scene(scene: Scene, view: ViewBox, size: int) -> np.ndarray:
    """Render the world seen through a viewbox as an (size, size, 3) image."""
    vx = ((np.arange(size) + 0.5) / size - 0.5) * view.w
    vy = ((np.arange(size) + 0.5) / size - 0.5) * view.h
    lx = vx[None, :]
    ly = vy[:, None]
    rot = rotation_matrix(view.alpha)
    ux = view.cx + rot[0, 0] * lx + rot[0, 1] * ly
    uy = view.cy + rot[1, 0] * lx + rot[1, 1] * ly

    band = 1.5 * view.w / size
    t_ground = np.clip((uy - scene.horizon_y) / band + 0.5, 0.0, 1.0)
    sky = np.array(scene.sky)
    ground = np.array(scene.ground)
    depth = np.clip(uy - scene.horizon_y, 0.0, 1.0)
    shading = (1.0 - 0.3 * depth)[:, :, None]
    base = sky * (1.0 - t_ground)[:, :, None] + ground * t_ground[:, :, None] * shading

    if scene.tex_amp > 0.0:
        # banded textures: horizontal cloud bands in the sky, vertical
        # furrows on the ground; stripes cannot be mistaken for the disk
        sky_tex = 1.0 + scene.tex_amp * np.sin(scene.tex_ky * uy + scene.tex_py)
        ground_tex = 1.0 + scene.tex_amp * np.sin(scene.tex_kx * ux + scene.tex_px)
        tex = sky_tex * (1.0 - t_ground) + ground_tex * t_ground
        base = base * tex[:, :, None]

    dist = np.hypot(ux - scene.disk_x, uy - scene.disk_y)
    cov = np.clip((scene.disk_r - dist) / band + 0.5, 0.0, 1.0)[:, :, None]
    out = base * (1.0 - cov) + np.array(scene.disk_color) * cov
    return np.clip(out, 0.0, 1.0)


def quality(scene: Scene, view: ViewBox) -> float:
    """Composition quality in (0, 1]: penalizes disk offset, size mismatch
    and tilt relative to the ideal view."""
    ideal = ideal_view(scene)
    dx = (view.cx - ideal.cx) / ideal.w
    dy = (view.cy - ideal.cy) / ideal.h
    dz = math.log(view.w / ideal.w)
    return float(math.exp(-6.0 * (dx * dx + dy * dy) - 4.0 * dz * dz - 5.0 * view.alpha**2))


def make_source(scene: Scene, size: int = 96) -> tuple[np.ndarray, CropAnnotation]:
    """Full-frame raster of the scene plus its best-crop annotation."""
    image = render_scene(scene, FULL_FRAME, size)
    return image, CropAnnotation(image_id=_scene_id(scene), best_crop=ideal_view(scene))


def make_scored_annotation(scene: Scene, rng, n_crops: int = 8, size: int = 96):
    """Source image plus axis-aligned candidate crops scored by quality."""
    image = render_scene(scene, FULL_FRAME, size)
    ideal = ideal_view(scene)
    crops = [(ideal, quality(scene, ideal))]
    while len(crops) < n_crops:
        ox = float(rng.uniform(-0.4, 0.4))
        oy = float(rng.uniform(-0.4, 0.4))
        oz = float(rng.uniform(-0.3, 0.6))
        box = ViewBox(ideal.cx + ideal.w * ox, ideal.cy + ideal.h * oy,
                      ideal.w * (1 + oz), ideal.h * (1 + oz), 0.0)
        if box_within_image(box):
            crops.append((box, quality(scene, box)))
    return image, crops


def make_well_composed(scene: Scene, size: int = 32) -> np.ndarray:
    """A photographer's shot: the ideal view rendered directly."""
    return render_scene(scene, ideal_view(scene), size)


def make_user_photo(scene: Scene, rng, size: int = 32, p_good: float = 0.35):
    """A casually framed shot: the ideal view, possibly mis-framed along one
    axis. Returns (image, ground-truth corrective kind or None)."""
    if rng.uniform() < p_good:
        return render_scene(scene, ideal_view(scene), size), None
    kind = KIND_ORDER[int(rng.integers(len(KIND_ORDER)))]
    # perturbation whose inverse (the needed correction) is `kind`
    p = sample_perturbation_for_label(kind, rng)
    view = apply_perturbation(ideal_view(scene), p)
    return render_scene(scene, view, size), kind


def _scene_id(scene: Scene) -> str:
    return f"scene_{abs(hash((scene.disk_x, scene.disk_y, scene.disk_r))) % 10**10:010d}"
