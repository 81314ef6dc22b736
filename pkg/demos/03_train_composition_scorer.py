#!/usr/bin/env python3
"""Train the composition scorer on the synthetic world and sanity-check it.

The scorer learns from three pair sources at once: scored candidate crops,
best-crop-versus-degraded pairs, and well-composed images versus their
degraded counterparts. A couple of minutes on a laptop CPU.
"""

import numpy as np

from viewadjust.nn import TrunkSpec
from viewadjust.scorer import ScorerTrainConfig, score, train_scorer
from viewadjust.synthesis import pair_from_bestcrop
from viewadjust.synthetic import (
    ideal_view,
    make_scored_annotation,
    make_source,
    make_well_composed,
    quality,
    random_scene,
    render_scene,
)

rng = np.random.default_rng(21)
trunk = TrunkSpec(input_size=16, channels=3, hidden=(64, 32))

scored = [make_scored_annotation(random_scene(rng, "full"), rng, n_crops=6, size=64) for _ in range(40)]
bestcrop = []
for _ in range(60):
    image, ann = make_source(random_scene(rng, "full"), 64)
    bestcrop.append((image, ann.best_crop))
unlabeled = [make_well_composed(random_scene(rng, "full"), 16) for _ in range(200)]

config = ScorerTrainConfig(
    delta=0.1, n_scored=5, k_bestcrop=6, p_unlabeled=6,
    learning_rate=1e-3, weight_decay=1e-5, steps=900, seed=3,
)
model, trace = train_scorer(scored, bestcrop, unlabeled, config, trunk)
first = np.mean([row[1] for row in trace[:100]])
last = np.mean([row[1] for row in trace[-100:]])
print(f"ranking loss, first 100 steps {first:.4f} -> last 100 steps {last:.4f}")

# held-out check: the model should rank the good view above a degraded one
holdout = np.random.default_rng(99)
wins = total = 0
for _ in range(100):
    image, ann = make_source(random_scene(holdout, "full"), 64)
    pair = pair_from_bestcrop(image, ann.best_crop, holdout, out_size=16)
    if pair is None:
        continue
    wins += score(model, pair.better) > score(model, pair.worse)
    total += 1
print(f"held-out pair ranking accuracy: {wins}/{total}")

# scores should track the world's own quality function
scene = random_scene(holdout, "full")
for label, view in (("ideal view", ideal_view(scene)),):
    s = score(model, render_scene(scene, view, 16))
    print(f"{label}: quality={quality(scene, view):.3f} score={s:.3f}")
