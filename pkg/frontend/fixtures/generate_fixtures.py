#!/usr/bin/env python3
"""Regenerate the shared vector-test fixtures from the Python implementation.

geometry_vectors.json  - perturbation application/inversion cases the client
                         geometry must reproduce to 1e-9 per field
refine_trajectory.json - an actual server-side refine run; three client-side
                         Applies must land on the same viewports
"""

import json
import math
from pathlib import Path

import numpy as np

from viewadjust.adjuster import adjuster_param_layout, AdjusterModel, refine_iteratively
from viewadjust.geometry import (
    KIND_ORDER,
    AdjustmentKind,
    Perturbation,
    Suggestion,
    ViewBox,
    apply_perturbation,
    invert_single_axis,
    suggestion_to_perturbation,
)
from viewadjust.nn import TrunkSpec
from viewadjust.synthetic import make_source, random_scene

HERE = Path(__file__).parent


def geometry_vectors():
    rng = np.random.default_rng(20250808)
    cases = []
    for _ in range(100):
        box = ViewBox(
            cx=float(rng.uniform(0.2, 0.8)),
            cy=float(rng.uniform(0.2, 0.8)),
            w=float(rng.uniform(0.1, 0.6)),
            h=float(rng.uniform(0.1, 0.6)),
            alpha=float(rng.uniform(-math.pi / 2, math.pi / 2)),
        )
        p = Perturbation(
            ox=float(rng.uniform(-0.4, 0.4)),
            oy=float(rng.uniform(-0.4, 0.4)),
            oz=float(rng.uniform(-0.3, 0.8)),
            oalpha=float(rng.uniform(-math.pi / 4, math.pi / 4)),
        )
        cases.append({
            "box": box.to_json(),
            "perturbation": p.to_json(),
            "applied": apply_perturbation(box, p).to_json(),
        })

    inverses = []
    for component in ("ox", "oy", "oz", "oalpha"):
        for _ in range(10):
            value = float(rng.uniform(0.05, 0.45)) * (1 if rng.uniform() < 0.5 else -1)
            p = Perturbation(**{component: value})
            inverses.append({
                "perturbation": p.to_json(),
                "inverse": invert_single_axis(p).to_json(),
            })

    suggestions = []
    for kind in KIND_ORDER:
        lo, hi = (math.pi / 36, math.pi / 4) if kind.is_rotation else (5.0, 45.0)
        for _ in range(5):
            s = Suggestion(adjust=True, kind=kind, magnitude=float(rng.uniform(lo, hi)))
            box = ViewBox(0.5, 0.5, float(rng.uniform(0.2, 0.5)), float(rng.uniform(0.2, 0.5)), 0.0)
            suggestions.append({
                "box": box.to_json(),
                "suggestion": s.to_json(),
                "applied": apply_perturbation(box, suggestion_to_perturbation(s)).to_json(),
            })

    return {"apply": cases, "invert": inverses, "suggestions": suggestions}


def refine_trajectory():
    trunk = TrunkSpec(input_size=8, channels=3, hidden=(16, 8))
    layout = adjuster_param_layout(trunk)
    theta = np.zeros(layout.size)
    layout.view(theta, "sugg_b")[...] = 30.0
    k = KIND_ORDER.index(AdjustmentKind.RIGHT)
    layout.view(theta, "adj_b")[k] = 10.0
    # logistic maps this bias to a 12.5% magnitude on the [5, 45] range
    t = (12.5 - 5.0) / 40.0
    layout.view(theta, "mag_b")[k] = math.log(t / (1.0 - t))
    model = AdjusterModel(trunk, theta)

    image, _ = make_source(random_scene(np.random.default_rng(3), "full"), 64)
    start = ViewBox(0.25, 0.5, 0.2, 0.2, 0.0)
    trajectory = refine_iteratively(model, image, start, max_steps=3, threshold=0.5)
    return {
        "max_steps": 3,
        "trajectory": [
            {"viewport": box.to_json(), "suggestion": sugg.to_json()}
            for box, sugg in trajectory
        ],
    }


if __name__ == "__main__":
    (HERE / "geometry_vectors.json").write_text(
        json.dumps(geometry_vectors(), indent=1, sort_keys=True) + "\n"
    )
    (HERE / "refine_trajectory.json").write_text(
        json.dumps(refine_trajectory(), indent=1, sort_keys=True) + "\n"
    )
    print("fixtures written to", HERE)
