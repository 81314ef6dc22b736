"""Benchmark harness: ROC AUC, TPR at a fixed false-positive rate, per-kind
F1, rotated IoU of the predicted view, confusion matrix, and report files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .adjuster import MAG_HI, MAG_LO, AdjusterModel, predict_batch
from .geometry import (
    KIND_ORDER,
    NO_ADJUSTMENT,
    Suggestion,
    apply_perturbation,
    rotated_iou,
    suggestion_to_perturbation,
)
from .imaging import resize

N_KINDS = len(KIND_ORDER)
NONE_CLASS = N_KINDS

CLASS_NAMES = tuple(k.value for k in KIND_ORDER) + ("none",)
KIND_LABELS = tuple(k.label for k in KIND_ORDER)


def roc_auc(scores, positives) -> float:
    """Area under the ROC curve by the rank (Mann-Whitney) formulation:
    P(score_pos > score_neg) + 0.5 P(tie) over all positive/negative pairs."""
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    n_pos = int(positives.sum())
    n_neg = len(scores) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    midranks = starts + (counts + 1) / 2.0  # 1-based average ranks
    ranks = midranks[inverse]
    return float((ranks[positives].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_curve(scores, positives):
    """ROC points (fpr, tpr) stepping through tied score groups jointly,
    starting at (0, 0); trapezoidal integration over it equals roc_auc."""
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    n_pos = int(positives.sum())
    n_neg = len(scores) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs at least one positive and one negative")
    order = np.argsort(-scores, kind="mergesort")
    sorted_scores = scores[order]
    sorted_pos = positives[order]
    # group boundaries where the score value changes
    boundary = np.flatnonzero(np.diff(sorted_scores) != 0)
    ends = np.concatenate([boundary, [len(scores) - 1]])
    tp = np.cumsum(sorted_pos)[ends]
    fp = np.cumsum(~sorted_pos)[ends]
    fpr = np.concatenate([[0.0], fp / n_neg])
    tpr = np.concatenate([[0.0], tp / n_pos])
    return fpr, tpr


def threshold_at_fpr(scores, negatives, target_fpr: float = 0.3) -> float:
    """Smallest threshold whose false positive rate (strict >) is <= target.

    With k = floor(target * n_neg), the returned threshold admits exactly the
    top k negatives on tie-free data. For target 1 every negative passes; the
    minimal threshold 0.0 is returned (scores are probabilities in (0, 1)).
    """
    scores = np.asarray(scores, dtype=np.float64)
    negatives = np.asarray(negatives, dtype=bool)
    neg = scores[negatives]
    if neg.size == 0:
        raise ValueError("need at least one negative")
    k = int(math.floor(target_fpr * neg.size + 1e-9))
    if k >= neg.size:
        return 0.0
    return float(np.sort(neg)[::-1][k])


@dataclass
class MetricsReport:
    """Evaluation results at the chosen operating point."""

    auc: float
    tpr: float
    fpr_target: float
    threshold: float
    f1_per_kind: dict
    mean_iou: float
    confusion: list  # 9x9 row-normalized, rows/cols in CLASS_NAMES order
    counts: dict
    n_samples: int

    def to_json(self) -> dict:
        return {
            "auc": self.auc,
            "tpr": self.tpr,
            "fpr_target": self.fpr_target,
            "threshold": self.threshold,
            "f1_per_kind": self.f1_per_kind,
            "mean_iou": self.mean_iou,
            "confusion": self.confusion,
            "counts": self.counts,
            "n_samples": self.n_samples,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MetricsReport":
        return cls(**{k: obj[k] for k in (
            "auc", "tpr", "fpr_target", "threshold", "f1_per_kind",
            "mean_iou", "confusion", "counts", "n_samples",
        )})


def _default_predictions(model: AdjusterModel, dataset):
    size = model.trunk.input_size
    views = []
    for s in dataset:
        v = s.view
        if v.shape[:2] != (size, size):
            v = resize(v, size, size)
        views.append(v)
    return predict_batch(model, views)


def evaluate(model, dataset, fpr: float = 0.3, predict_fn=None) -> MetricsReport:
    """Evaluate an adjustment model on labeled samples.

    AUC is computed over suggestion probabilities (positives are samples whose
    label requires adjustment); TPR, per-kind F1, mean rotated IoU of the
    predicted view against the best crop, and the 9x9 confusion matrix are all
    computed at the threshold whose FPR is ``fpr``. ``predict_fn``, when
    given, maps a sample to (probability, distribution, magnitudes) and
    replaces model inference.
    """
    if not dataset:
        raise ValueError("empty evaluation dataset")
    if predict_fn is not None:
        rows = [predict_fn(s) for s in dataset]
        probs = np.array([r[0] for r in rows], dtype=np.float64)
        dists = np.array([r[1] for r in rows], dtype=np.float64)
        mags = np.array([r[2] for r in rows], dtype=np.float64)
    else:
        probs, dists, mags = _default_predictions(model, dataset)

    positives = np.array([s.label.adjust for s in dataset], dtype=bool)
    if not positives.any() or positives.all():
        raise ValueError("evaluation dataset needs both adjustment and no-adjustment samples")

    auc = roc_auc(probs, positives)
    threshold = threshold_at_fpr(probs, ~positives, fpr)
    suggests = probs > threshold
    tpr = float(suggests[positives].mean())

    pred_kind = np.argmax(dists, axis=1)
    pred_class = np.where(suggests, pred_kind, NONE_CLASS)
    true_class = np.array(
        [KIND_ORDER.index(s.label.kind) if s.label.adjust else NONE_CLASS for s in dataset]
    )

    f1_per_kind = {}
    for k, kind in enumerate(KIND_ORDER):
        tp = int(np.sum((pred_class == k) & (true_class == k)))
        fp = int(np.sum((pred_class == k) & (true_class != k)))
        fn = int(np.sum((true_class == k) & (pred_class != k)))
        denom = 2 * tp + fp + fn
        f1_per_kind[kind.value] = (2.0 * tp / denom) if denom else 0.0

    ious = []
    for i, s in enumerate(dataset):
        if suggests[i]:
            k = pred_kind[i]
            magnitude = float(np.clip(mags[i, k], MAG_LO[k], MAG_HI[k]))
            suggestion = Suggestion(adjust=True, kind=KIND_ORDER[k], magnitude=magnitude)
        else:
            suggestion = NO_ADJUSTMENT
        predicted_box = apply_perturbation(s.sample_box, suggestion_to_perturbation(suggestion))
        ious.append(rotated_iou(predicted_box, s.best_crop))
    mean_iou = float(np.mean(ious))

    confusion = np.zeros((N_KINDS + 1, N_KINDS + 1))
    for t, p in zip(true_class, pred_class):
        confusion[t, p] += 1.0
    row_sums = confusion.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        confusion = np.where(row_sums > 0, confusion / row_sums, 0.0)

    counts = {name: int(np.sum(true_class == i)) for i, name in enumerate(CLASS_NAMES)}
    counts["total"] = len(dataset)

    return MetricsReport(
        auc=auc,
        tpr=tpr,
        fpr_target=fpr,
        threshold=threshold,
        f1_per_kind=f1_per_kind,
        mean_iou=mean_iou,
        confusion=confusion.tolist(),
        counts=counts,
        n_samples=len(dataset),
    )


def emit_report(report: MetricsReport, fmt: str, path) -> None:
    """Write a report file: lossless JSON, CSV metric/count tables, or a
    markdown summary with the confusion matrix."""
    if fmt == "json":
        with open(path, "w") as f:
            json.dump(report.to_json(), f, indent=2, sort_keys=True)
            f.write("\n")
        return
    if fmt == "csv":
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["AUC", "TPR", *KIND_LABELS, "IoU"])
            writer.writerow(
                [f"{report.auc:.6f}", f"{report.tpr:.6f}"]
                + [f"{report.f1_per_kind[k.value]:.6f}" for k in KIND_ORDER]
                + [f"{report.mean_iou:.6f}"]
            )
            writer.writerow([])
            writer.writerow([*KIND_LABELS, "None", "Total"])
            writer.writerow(
                [report.counts[k.value] for k in KIND_ORDER]
                + [report.counts["none"], report.counts["total"]]
            )
        return
    if fmt == "markdown":
        lines = [
            "# Evaluation report",
            "",
            f"- samples: {report.n_samples}",
            f"- AUC: {report.auc:.4f}",
            f"- TPR at FPR {report.fpr_target}: {report.tpr:.4f} (threshold {report.threshold:.4f})",
            f"- mean IoU: {report.mean_iou:.4f}",
            "",
            "| metric | " + " | ".join(KIND_LABELS) + " |",
            "| --- |" + " --- |" * N_KINDS,
            "| F1 | " + " | ".join(f"{report.f1_per_kind[k.value]:.3f}" for k in KIND_ORDER) + " |",
            "| count | " + " | ".join(str(report.counts[k.value]) for k in KIND_ORDER) + " |",
            "",
            "## Confusion (rows = truth, row-normalized)",
            "",
            "| | " + " | ".join(CLASS_NAMES) + " |",
            "| --- |" + " --- |" * (N_KINDS + 1),
        ]
        for i, name in enumerate(CLASS_NAMES):
            row = report.confusion[i]
            lines.append(f"| {name} | " + " | ".join(f"{v:.3f}" for v in row) + " |")
        absent = [name for name in CLASS_NAMES if report.counts.get(name, 0) == 0]
        if absent:
            lines += ["", f"*Classes absent from the dataset (rows forced to zero): {', '.join(absent)}*"]
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")
        return
    raise ValueError(f"unknown report format: {fmt!r}")
