"""Camera view adjustment suggestion toolkit.

Synthesizes adjustment-labeled data from crop annotations, trains a
composition scorer with a pairwise ranking loss, mints pseudo labels by
simulating candidate adjustments, trains a three-head adjustment predictor,
and evaluates with AUC / TPR / F1 / rotated IoU.
"""

from .geometry import (
    FULL_FRAME,
    KIND_ORDER,
    NO_ADJUSTMENT,
    AdjustmentKind,
    Perturbation,
    Suggestion,
    ViewBox,
    apply_perturbation,
    box_corners,
    box_within_image,
    invert_single_axis,
    magnitude_range,
    rotated_iou,
    suggestion_from_inverse,
    suggestion_to_perturbation,
)
from .adjuster import (
    AdjusterModel,
    AdjusterTrainConfig,
    adjuster_loss,
    class_weights,
    infer_suggestion,
    new_adjuster,
    predict,
    refine_iteratively,
    train_adjuster,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .evaluation import MetricsReport, emit_report, evaluate, roc_auc, roc_curve, threshold_at_fpr
from .imaging import extract_view, load_image, resize, save_image
from .nn import TrunkSpec
from .pseudo import PseudoLabelConfig, candidate_grid, pseudo_label, simulate_adjustment
from .scorer import (
    ScorerModel,
    ScorerTrainConfig,
    new_scorer,
    ranking_loss,
    score,
    train_scorer,
    train_scorer_regression,
)
from .synthesis import (
    AdjustmentFamily,
    AugmentConfig,
    CropAnnotation,
    LabeledSample,
    RankPair,
    augment_borders,
    kind_counts,
    pair_from_bestcrop,
    pair_from_scored,
    pair_from_unlabeled,
    synth_adjustment_dataset,
    synth_adjustment_sample,
)

__all__ = [
    "FULL_FRAME",
    "KIND_ORDER",
    "NO_ADJUSTMENT",
    "AdjusterModel",
    "AdjusterTrainConfig",
    "AdjustmentFamily",
    "AdjustmentKind",
    "AugmentConfig",
    "CropAnnotation",
    "LabeledSample",
    "MetricsReport",
    "Perturbation",
    "PseudoLabelConfig",
    "RankPair",
    "ScorerModel",
    "ScorerTrainConfig",
    "Suggestion",
    "TrunkSpec",
    "ViewBox",
    "adjuster_loss",
    "apply_perturbation",
    "augment_borders",
    "box_corners",
    "box_within_image",
    "candidate_grid",
    "class_weights",
    "emit_report",
    "evaluate",
    "extract_view",
    "infer_suggestion",
    "invert_single_axis",
    "kind_counts",
    "load_checkpoint",
    "load_image",
    "magnitude_range",
    "new_adjuster",
    "new_scorer",
    "pair_from_bestcrop",
    "pair_from_scored",
    "pair_from_unlabeled",
    "predict",
    "pseudo_label",
    "ranking_loss",
    "refine_iteratively",
    "resize",
    "roc_auc",
    "roc_curve",
    "rotated_iou",
    "save_checkpoint",
    "save_image",
    "score",
    "simulate_adjustment",
    "suggestion_from_inverse",
    "suggestion_to_perturbation",
    "synth_adjustment_dataset",
    "synth_adjustment_sample",
    "threshold_at_fpr",
    "train_adjuster",
    "train_scorer",
    "train_scorer_regression",
]

__version__ = "0.1.0"
