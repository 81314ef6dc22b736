"""Image buffers and oriented-view extraction.

Images are numpy float arrays with values in [0, 1], shaped (H, W) for a
single channel or (H, W, C) with C in {1, 3}, row-major, y growing downward.
"""

from __future__ import annotations

import io

import numpy as np

from .geometry import FULL_FRAME, ViewBox, rotation_matrix

# Sample coordinates this close to an integer snap to it, so integer-aligned
# grids reproduce source pixels exactly despite rounding in the grid math.
_SNAP_EPS = 1e-9


def validate_image(image: np.ndarray) -> np.ndarray:
    """Check image shape, dtype and value range; returns the array as float64."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        pass
    elif img.ndim == 3:
        if img.shape[2] not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {img.shape[2]}")
    else:
        raise ValueError(f"image must be 2D or 3D, got shape {img.shape}")
    if img.size == 0:
        raise ValueError("image is empty")
    if not np.isfinite(img).all():
        raise ValueError("image contains non-finite values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image values must lie in [0, 1]")
    return img


def extract_view(image: np.ndarray, box: ViewBox, out_w: int, out_h: int) -> np.ndarray:
    """Sample the source under an oriented viewbox onto an out_w x out_h grid.

    Bilinear interpolation with half-pixel centers; reads outside the source
    are zero (not clamped), so views extending past the frame get zero-pixel
    fill. Output values stay in [0, 1].
    """
    if out_w <= 0 or out_h <= 0:
        raise ValueError(f"output size must be positive, got {out_w}x{out_h}")
    img = np.asarray(image, dtype=np.float64)
    squeeze = img.ndim == 2
    if squeeze:
        img = img[:, :, None]
    src_h, src_w, channels = img.shape

    # Box-local offsets of output pixel centers, rotated into source coords.
    vx = (np.arange(out_w) + 0.5) / out_w - 0.5
    vy = (np.arange(out_h) + 0.5) / out_h - 0.5
    lx = vx[None, :] * box.w
    ly = vy[:, None] * box.h
    rot = rotation_matrix(box.alpha)
    ux = box.cx + rot[0, 0] * lx + rot[0, 1] * ly
    uy = box.cy + rot[1, 0] * lx + rot[1, 1] * ly

    px = ux * src_w - 0.5
    py = uy * src_h - 0.5
    px_r = np.round(px)
    py_r = np.round(py)
    px = np.where(np.abs(px - px_r) < _SNAP_EPS, px_r, px)
    py = np.where(np.abs(py - py_r) < _SNAP_EPS, py_r, py)

    x0 = np.floor(px).astype(np.int64)
    y0 = np.floor(py).astype(np.int64)
    fx = (px - x0)[:, :, None]
    fy = (py - y0)[:, :, None]

    def read(xi, yi):
        valid = (xi >= 0) & (xi < src_w) & (yi >= 0) & (yi < src_h)
        vals = img[np.clip(yi, 0, src_h - 1), np.clip(xi, 0, src_w - 1)]
        return np.where(valid[:, :, None], vals, 0.0)

    out = (
        read(x0, y0) * (1.0 - fx) * (1.0 - fy)
        + read(x0 + 1, y0) * fx * (1.0 - fy)
        + read(x0, y0 + 1) * (1.0 - fx) * fy
        + read(x0 + 1, y0 + 1) * fx * fy
    )
    return out[:, :, 0] if squeeze else out


def resize(image: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resize of the whole image (full-frame extraction)."""
    return extract_view(image, FULL_FRAME, out_w, out_h)


def load_image(path) -> np.ndarray:
    """Load a PNG/JPEG file as an (H, W, 3) float array in [0, 1]."""
    from PIL import Image

    with Image.open(path) as im:
        rgb = im.convert("RGB")
        return np.asarray(rgb, dtype=np.float64) / 255.0


def decode_image_bytes(data: bytes) -> np.ndarray:
    """Decode PNG/JPEG bytes as an (H, W, 3) float array in [0, 1]."""
    from PIL import Image

    with Image.open(io.BytesIO(data)) as im:
        rgb = im.convert("RGB")
        return np.asarray(rgb, dtype=np.float64) / 255.0


def save_image(path, image: np.ndarray) -> None:
    """Write an image array to PNG/JPEG (rounded to 8-bit)."""
    from PIL import Image

    img = validate_image(image)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    data = np.round(img * 255.0).astype(np.uint8)
    Image.fromarray(data).save(path)
