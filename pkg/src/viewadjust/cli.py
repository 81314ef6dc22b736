"""Command-line surface: one deterministic subcommand per pipeline stage.

Every artifact-writing stage also writes ``<out>.manifest.json`` recording
the resolved parameters, the seed, and content hashes of inputs and outputs,
so a clean tree plus the manifests replays the full pipeline. Exit codes:
0 success, 2 usage error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .adjuster import AdjusterTrainConfig, infer_suggestion, refine_iteratively, train_adjuster
from .checkpoint import load_checkpoint, save_checkpoint
from .config import load_config
from .datasets import (
    SampleRecord,
    iter_annotation_images,
    materialize_samples,
    read_annotations_jsonl,
    read_samples_jsonl,
    sample_to_record,
    write_kind_counts_csv,
    write_samples_jsonl,
)
from .evaluation import emit_report, evaluate
from .geometry import FULL_FRAME, ViewBox
from .imaging import load_image, resize
from .pseudo import PseudoLabelConfig, pseudo_label
from .scorer import ScorerTrainConfig, train_scorer, train_scorer_regression
from .synthesis import (
    kind_counts,
    sample_bestcrop_pair_box,
    sample_unlabeled_pair_box,
    select_scored_pairs,
    synth_adjustment_dataset,
)

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class UsageError(Exception):
    """Bad flag combination or invalid value: exit 2."""


class DataError(Exception):
    """Missing or malformed input data: exit 3."""


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_path, command: str, params: dict, seed, inputs, outputs) -> None:
    manifest = {
        "command": command,
        "params": params,
        "seed": seed,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
    }
    path = Path(str(out_path) + ".manifest.json")
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"{what} not found: {p}")
    return p


def _require_dir(path, what: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise DataError(f"{what} not found: {p}")
    return p


def _list_images(directory: Path) -> list[Path]:
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise DataError(f"no images (png/jpeg) in {directory}")
    return files


def _load_annotation_data(annotations_path, image_dir, scored_only=False):
    annotations = read_annotations_jsonl(_require_file(annotations_path, "annotations file"))
    if not annotations:
        raise DataError(f"empty annotations file: {annotations_path}")
    items = list(iter_annotation_images(annotations, _require_dir(image_dir, "image directory")))
    if not items:
        raise DataError("no readable annotated images")
    if scored_only:
        items = [(img, ann) for img, ann in items if ann.scored_crops]
    return items


# stages -------------------------------------------------------------------


def cmd_synth_dataset(args, config) -> int:
    items = _load_annotation_data(args.annotations, args.image_dir)
    rng = np.random.default_rng(args.seed if args.seed is not None else config.seed)
    out_size = args.sample_size or config.sample_size
    try:
        samples = synth_adjustment_dataset(items, rng, out_size=out_size)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    records = [sample_to_record(s) for s in samples]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_samples_jsonl(out, records)
    counts = kind_counts(samples)
    counts_path = Path(args.counts) if args.counts else out.with_suffix(".counts.csv")
    write_kind_counts_csv(counts_path, counts)
    print(json.dumps(counts, indent=2))
    _write_manifest(
        out, "synth-dataset",
        {"annotations": str(args.annotations), "image_dir": str(args.image_dir), "sample_size": out_size},
        args.seed if args.seed is not None else config.seed,
        [args.annotations], [out, counts_path],
    )
    return 0


def cmd_make_pairs(args, config) -> int:
    seed = args.seed if args.seed is not None else config.seed
    rng = np.random.default_rng(seed)
    records = []

    if args.annotations:
        items = _load_annotation_data(args.annotations, args.image_dir)
        for _, ann in items:
            if ann.scored_crops:
                for better, worse in select_scored_pairs(ann.scored_crops, args.n_scored, rng):
                    records.append({"source": "scored", "image_id": ann.image_id,
                                    "better": better.to_json(), "worse": worse.to_json()})
            for _ in range(args.pairs_per_image):
                worse = sample_bestcrop_pair_box(ann.best_crop, rng)
                if worse is None:
                    continue
                records.append({"source": "bestcrop", "image_id": ann.image_id,
                                "better": ann.best_crop.to_json(), "worse": worse.to_json()})

    if args.unlabeled_dir:
        for path in _list_images(_require_dir(args.unlabeled_dir, "unlabeled directory")):
            for _ in range(args.pairs_per_image):
                worse = sample_unlabeled_pair_box(rng)
                records.append({"source": "unlabeled", "image_id": path.name,
                                "better": FULL_FRAME.to_json(), "worse": worse.to_json()})

    if not records:
        raise DataError("no pairs generated: provide --annotations and/or --unlabeled-dir")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")
    inputs = [p for p in (args.annotations,) if p]
    _write_manifest(out, "make-pairs",
                    {"n_scored": args.n_scored, "pairs_per_image": args.pairs_per_image},
                    seed, inputs, [out])
    print(f"wrote {len(records)} pairs to {out}")
    return 0


def cmd_train_scorer(args, config) -> int:
    cfg = config.scorer
    overrides = {}
    if args.steps is not None:
        overrides["steps"] = args.steps
    if args.learning_rate is not None:
        overrides["learning_rate"] = args.learning_rate
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = ScorerTrainConfig(**{**cfg.to_json(), **overrides})

    if args.regression_data:
        mos_path = _require_file(args.regression_data, "regression data")
        image_dir = _require_dir(args.image_dir, "image directory")
        data = []
        with open(mos_path) as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                try:
                    data.append((load_image(image_dir / obj["image_id"]), float(obj["score"])))
                except FileNotFoundError:
                    logger.warning("skipping missing image %s", obj["image_id"])
        if not data:
            raise DataError("no regression samples loaded")
        model, trace = train_scorer_regression(data, cfg, config.trunk)
        inputs = [mos_path]
    else:
        if not args.annotations and not args.unlabeled_dir:
            raise UsageError("train-scorer needs --annotations and/or --unlabeled-dir")
        scored_data, bestcrop_data, unlabeled = [], [], []
        inputs = []
        if args.annotations:
            items = _load_annotation_data(args.annotations, args.image_dir)
            inputs.append(args.annotations)
            for image, ann in items:
                bestcrop_data.append((image, ann.best_crop))
                if ann.scored_crops:
                    scored_data.append((image, list(ann.scored_crops)))
        if args.unlabeled_dir:
            for path in _list_images(_require_dir(args.unlabeled_dir, "unlabeled directory")):
                try:
                    unlabeled.append(load_image(path))
                except Exception as exc:
                    logger.warning("skipping unreadable image %s: %s", path, exc)
        model, trace = train_scorer(scored_data, bestcrop_data, unlabeled, cfg, config.trunk)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out, model, fingerprint={"stage": "train-scorer", "config": cfg.to_json()})
    trace_path = out.with_suffix(".trace.csv")
    with open(trace_path, "w") as f:
        f.write("step,total,scored,bestcrop,unlabeled\n" if not args.regression_data else "step,mse\n")
        for row in trace:
            f.write(",".join(f"{v:.10g}" if isinstance(v, float) else str(v) for v in row) + "\n")
    _write_manifest(out, "train-scorer", {"config": cfg.to_json()}, cfg.seed, inputs, [out, trace_path])
    print(f"scorer checkpoint written to {out}")
    return 0


def cmd_pseudo_label(args, config) -> int:
    model, _ = load_checkpoint(_require_file(args.checkpoint, "checkpoint"))
    from .scorer import ScorerModel

    if not isinstance(model, ScorerModel):
        raise DataError(f"{args.checkpoint} is not a scorer checkpoint")
    margin = args.margin if args.margin is not None else config.pseudo.margin
    plc = PseudoLabelConfig(margin=margin)
    size = model.trunk.input_size
    records = []
    n_adjust = 0
    for path in _list_images(_require_dir(args.image_dir, "image directory")):
        try:
            image = load_image(path)
        except Exception as exc:
            logger.warning("skipping unreadable image %s: %s", path, exc)
            continue
        label = pseudo_label(model, resize(image, size, size), plc)
        n_adjust += int(label.adjust)
        records.append(SampleRecord(image_id=path.name, box=FULL_FRAME, label=label))
        if len(records) % 500 == 0:
            logger.info("pseudo-labeled %d images (%d adjust)", len(records), n_adjust)
    if not records:
        raise DataError("no images pseudo-labeled")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_samples_jsonl(out, records)
    _write_manifest(out, "pseudo-label", {"margin": margin, "image_dir": str(args.image_dir)},
                    config.seed, [args.checkpoint], [out])
    print(f"wrote {len(records)} pseudo labels ({n_adjust} adjust) to {out}")
    return 0


def cmd_train_adjuster(args, config) -> int:
    cfg = config.adjuster
    overrides = {}
    if args.steps is not None:
        overrides["steps"] = args.steps
    if args.learning_rate is not None:
        overrides["learning_rate"] = args.learning_rate
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = AdjusterTrainConfig(**{**cfg.to_json(), **overrides})

    size = config.trunk.input_size
    labeled = materialize_samples(
        read_samples_jsonl(_require_file(args.labeled, "labeled shard")),
        _require_dir(args.image_dir, "image directory"),
        out_size=size,
    )
    pseudo = []
    inputs = [args.labeled]
    if args.pseudo:
        pseudo_dir = args.pseudo_image_dir or args.image_dir
        pseudo = materialize_samples(
            read_samples_jsonl(_require_file(args.pseudo, "pseudo shard")),
            _require_dir(pseudo_dir, "pseudo image directory"),
            out_size=size,
        )
        inputs.append(args.pseudo)
    try:
        model, trace = train_adjuster(labeled, pseudo, cfg, config.trunk)
    except ValueError as exc:
        raise DataError(str(exc)) from exc

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out, model, fingerprint={"stage": "train-adjuster", "config": cfg.to_json()})
    trace_path = out.with_suffix(".trace.csv")
    with open(trace_path, "w") as f:
        f.write("step,total,suggestion,adjustment,magnitude\n")
        for row in trace:
            f.write(",".join(f"{v:.10g}" if isinstance(v, float) else str(v) for v in row) + "\n")
    _write_manifest(out, "train-adjuster", {"config": cfg.to_json()}, cfg.seed, inputs, [out, trace_path])
    print(f"adjuster checkpoint written to {out}")
    return 0


def cmd_evaluate(args, config) -> int:
    model, _ = load_checkpoint(_require_file(args.checkpoint, "checkpoint"))
    from .adjuster import AdjusterModel

    if not isinstance(model, AdjusterModel):
        raise DataError(f"{args.checkpoint} is not an adjuster checkpoint")
    samples = materialize_samples(
        read_samples_jsonl(_require_file(args.dataset, "evaluation shard")),
        _require_dir(args.image_dir, "image directory"),
        out_size=model.trunk.input_size,
    )
    fpr = args.fpr if args.fpr is not None else config.evaluation_fpr
    try:
        report = evaluate(model, samples, fpr=fpr)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    outputs = []
    for fmt, suffix in (("json", ".json"), ("csv", ".csv"), ("markdown", ".md")):
        path = prefix.with_suffix(suffix)
        emit_report(report, fmt, path)
        outputs.append(path)
    _write_manifest(prefix.with_suffix(".json"), "evaluate",
                    {"fpr": fpr, "dataset": str(args.dataset)}, config.seed,
                    [args.checkpoint, args.dataset], outputs)
    print(f"AUC {report.auc:.4f}  TPR@{fpr} {report.tpr:.4f}  mean IoU {report.mean_iou:.4f}")
    return 0


def _load_adjuster(path):
    from .adjuster import AdjusterModel

    model, _ = load_checkpoint(_require_file(path, "checkpoint"))
    if not isinstance(model, AdjusterModel):
        raise DataError(f"{path} is not an adjuster checkpoint")
    return model


def cmd_suggest(args, config) -> int:
    model = _load_adjuster(args.checkpoint)
    image = load_image(_require_file(args.image, "image"))
    size = model.trunk.input_size
    suggestion = infer_suggestion(model, resize(image, size, size), args.threshold)
    print(json.dumps(suggestion.to_json(), sort_keys=True))
    return 0


def cmd_refine(args, config) -> int:
    model = _load_adjuster(args.checkpoint)
    image = load_image(_require_file(args.image, "image"))
    try:
        viewport = ViewBox.from_json(json.loads(args.viewport))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise UsageError(f"bad --viewport JSON: {exc}") from exc
    trajectory = refine_iteratively(model, image, viewport, args.max_steps, args.threshold)
    print(json.dumps(
        {"trajectory": [{"viewport": b.to_json(), "suggestion": s.to_json()} for b, s in trajectory]},
        sort_keys=True,
    ))
    return 0


def cmd_serve(args, config) -> int:
    from .scorer import ScorerModel
    from .service import SuggestionService, serve

    adjuster = _load_adjuster(args.checkpoint)
    scorer = None
    if args.scorer_checkpoint:
        scorer, _ = load_checkpoint(_require_file(args.scorer_checkpoint, "scorer checkpoint"))
        if not isinstance(scorer, ScorerModel):
            raise DataError(f"{args.scorer_checkpoint} is not a scorer checkpoint")
    frontend_dir = _require_dir(args.frontend_dir, "frontend directory") if args.frontend_dir else None
    service = SuggestionService(adjuster, scorer, config.service, threshold=args.threshold,
                                frontend_dir=frontend_dir)
    host = args.host if args.host is not None else config.service.host
    port = args.port if args.port is not None else config.service.port
    serve(service, host, port)
    return 0


# parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viewadjust",
        description="Camera view adjustment pipeline: synthesize data, train, label, evaluate, serve.",
    )
    parser.add_argument("--config", help="pipeline config JSON file")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-dataset", help="synthesize adjustment samples from annotations")
    p.add_argument("--annotations", required=True)
    p.add_argument("--image-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--counts")
    p.add_argument("--sample-size", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth_dataset)

    p = sub.add_parser("make-pairs", help="emit ranking-pair records")
    p.add_argument("--annotations")
    p.add_argument("--image-dir")
    p.add_argument("--unlabeled-dir")
    p.add_argument("--out", required=True)
    p.add_argument("--n-scored", type=int, default=16)
    p.add_argument("--pairs-per-image", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_make_pairs)

    p = sub.add_parser("train-scorer", help="train the composition scoring model")
    p.add_argument("--annotations")
    p.add_argument("--image-dir")
    p.add_argument("--unlabeled-dir")
    p.add_argument("--regression-data", help="JSONL of {image_id, score}: aesthetic baseline mode")
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train_scorer)

    p = sub.add_parser("pseudo-label", help="mint pseudo labels for an image directory")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--margin", type=float)
    p.set_defaults(func=cmd_pseudo_label)

    p = sub.add_parser("train-adjuster", help="train the view adjustment model")
    p.add_argument("--labeled", required=True)
    p.add_argument("--image-dir", required=True)
    p.add_argument("--pseudo")
    p.add_argument("--pseudo-image-dir")
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train_adjuster)

    p = sub.add_parser("evaluate", help="run the benchmark metrics")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--image-dir", required=True)
    p.add_argument("--fpr", type=float)
    p.add_argument("--out-prefix", default="report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("suggest", help="one suggestion for one image")
    p.add_argument("--image", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("refine", help="iterative viewport refinement over a wide image")
    p.add_argument("--image", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--viewport", required=True, help='viewbox JSON, e.g. {"cx":0.5,...}')
    p.add_argument("--max-steps", type=int, default=3)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("serve", help="run the HTTP suggestion service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scorer-checkpoint")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--frontend-dir", help="serve the viewfinder UI from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
    except FileNotFoundError as exc:
        print(f"error: config file not found: {exc.filename}", file=sys.stderr)
        return 2
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
