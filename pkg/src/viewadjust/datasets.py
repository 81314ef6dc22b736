"""Annotation and dataset I/O: JSON-lines annotations, converters for
published crop-annotation formats, sample shards, and count reports.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import KIND_ORDER, Suggestion, ViewBox
from .imaging import extract_view, load_image
from .synthesis import CropAnnotation, LabeledSample

logger = logging.getLogger(__name__)


def derive_seed(base_seed: int, *parts) -> int:
    """Deterministic per-item seed: hash of the base seed and item keys.

    Parallel generation partitions work by deriving one seed per image.
    """
    digest = hashlib.sha256()
    digest.update(str(int(base_seed)).encode())
    for part in parts:
        digest.update(b"|")
        digest.update(str(part).encode())
    return int.from_bytes(digest.digest()[:8], "big")


def read_annotations_jsonl(path) -> list[CropAnnotation]:
    """Read annotations from JSON lines: {image_id, best_crop, scored_crops?}."""
    annotations = []
    with open(path) as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                annotations.append(CropAnnotation.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: bad annotation record: {exc}") from exc
    return annotations


def write_annotations_jsonl(path, annotations) -> None:
    with open(path, "w") as f:
        for ann in annotations:
            f.write(json.dumps(ann.to_json(), sort_keys=True) + "\n")


def iter_annotation_images(annotations, image_dir):
    """Yield (image, annotation) pairs, skipping unreadable images with a warning."""
    image_dir = Path(image_dir)
    for ann in annotations:
        path = image_dir / ann.image_id
        try:
            image = load_image(path)
        except Exception as exc:  # unreadable file: skip, keep going
            logger.warning("skipping unreadable image %s: %s", path, exc)
            continue
        yield image, ann


def _normalize_pixel_crop(x, y, w, h, img_w, img_h) -> ViewBox:
    if w <= 0 or h <= 0:
        raise ValueError(f"bad crop size {w}x{h}")
    cx = (x + w / 2.0) / img_w
    cy = (y + h / 2.0) / img_h
    return ViewBox(cx, cy, min(w / img_w, 1.0), min(h / img_h, 1.0), 0.0)


def convert_fcdb(json_path, image_dir) -> list[CropAnnotation]:
    """Convert an FCDB-style annotation file: a JSON array of entries with an
    image reference ("url", "image" or "image_file") and a pixel "crop"
    [x, y, w, h]. Crops are normalized by the actual image dimensions; entries
    whose image is missing are skipped with a warning."""
    from PIL import Image

    image_dir = Path(image_dir)
    with open(json_path) as f:
        entries = json.load(f)
    annotations = []
    for entry in entries:
        name = entry.get("image_file") or entry.get("image") or entry.get("url", "")
        name = name.rsplit("/", 1)[-1]
        path = image_dir / name
        if not path.exists():
            logger.warning("skipping missing image %s", path)
            continue
        with Image.open(path) as im:
            img_w, img_h = im.size
        x, y, w, h = entry["crop"]
        annotations.append(
            CropAnnotation(image_id=name, best_crop=_normalize_pixel_crop(x, y, w, h, img_w, img_h))
        )
    return annotations


def convert_gaicd(annotation_dir, image_dir) -> list[CropAnnotation]:
    """Convert GAICD-style annotations: per image "<stem>.txt" holding one
    crop per line as "x1 y1 x2 y2 score" in pixels. The best crop is the
    highest-scored one; all crops are kept as scored candidates."""
    from PIL import Image

    annotation_dir = Path(annotation_dir)
    image_dir = Path(image_dir)
    annotations = []
    for txt in sorted(annotation_dir.glob("*.txt")):
        image_name = None
        for ext in (".jpg", ".jpeg", ".png"):
            candidate = image_dir / (txt.stem + ext)
            if candidate.exists():
                image_name = candidate.name
                break
        if image_name is None:
            logger.warning("skipping annotation without image: %s", txt)
            continue
        with Image.open(image_dir / image_name) as im:
            img_w, img_h = im.size
        scored = []
        for line in txt.read_text().splitlines():
            fields = line.split()
            if len(fields) < 5:
                continue
            x1, y1, x2, y2, s = (float(v) for v in fields[:5])
            box = _normalize_pixel_crop(x1, y1, x2 - x1, y2 - y1, img_w, img_h)
            scored.append((box, s))
        if not scored:
            logger.warning("skipping empty annotation file: %s", txt)
            continue
        best = max(scored, key=lambda bs: bs[1])[0]
        annotations.append(
            CropAnnotation(image_id=image_name, best_crop=best, scored_crops=tuple(scored))
        )
    return annotations


@dataclass(frozen=True)
class SampleRecord:
    """Shard record referencing a source image: the sample viewbox, its
    label, and optionally the best crop for round-trip checks."""

    image_id: str
    box: ViewBox
    label: Suggestion
    best_crop: ViewBox | None = None

    def to_json(self) -> dict:
        obj = {"image_id": self.image_id, "box": self.box.to_json(), "label": self.label.to_json()}
        if self.best_crop is not None:
            obj["best_crop"] = self.best_crop.to_json()
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "SampleRecord":
        return cls(
            image_id=str(obj["image_id"]),
            box=ViewBox.from_json(obj["box"]),
            label=Suggestion.from_json(obj["label"]),
            best_crop=ViewBox.from_json(obj["best_crop"]) if "best_crop" in obj else None,
        )


def sample_to_record(sample: LabeledSample) -> SampleRecord:
    return SampleRecord(
        image_id=sample.image_id,
        box=sample.sample_box,
        label=sample.label,
        best_crop=sample.best_crop,
    )


def write_samples_jsonl(path, records) -> None:
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def read_samples_jsonl(path) -> list[SampleRecord]:
    records = []
    with open(path) as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(SampleRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: bad sample record: {exc}") from exc
    return records


def materialize_samples(records, image_dir, out_size: int = 64) -> list[LabeledSample]:
    """Load shard records back into labeled samples by re-extracting views."""
    image_dir = Path(image_dir)
    samples = []
    cache: dict[str, np.ndarray] = {}
    for rec in records:
        if rec.image_id not in cache:
            cache[rec.image_id] = load_image(image_dir / rec.image_id)
        image = cache[rec.image_id]
        view = extract_view(image, rec.box, out_size, out_size)
        samples.append(
            LabeledSample(
                view=view,
                label=rec.label,
                image_id=rec.image_id,
                sample_box=rec.box,
                best_crop=rec.best_crop if rec.best_crop is not None else rec.box,
            )
        )
    return samples


def write_kind_counts_csv(path, counts: dict) -> None:
    """Count report in the benchmark table layout (kinds, none, total)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        labels = [k.label for k in KIND_ORDER]
        writer.writerow(labels + ["None", "Total"])
        writer.writerow([counts.get(k.value, 0) for k in KIND_ORDER]
                        + [counts.get("none", 0), counts.get("total", 0)])
