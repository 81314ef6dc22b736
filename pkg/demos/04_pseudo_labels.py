#!/usr/bin/env python3
"""Mint pseudo adjustment labels by simulating the 72-candidate grid.

For each unlabeled image the scorer rates the original view plus all 8 kinds
x 9 magnitudes of simulated adjustment; the best candidate becomes the label
when it beats the original score by the margin (default 0.2), otherwise the
image is labeled "no adjustment".
"""

from collections import Counter

import numpy as np

from viewadjust.nn import TrunkSpec
from viewadjust.pseudo import PseudoLabelConfig, candidate_grid, pseudo_label
from viewadjust.scorer import ScorerTrainConfig, train_scorer
from viewadjust.synthetic import (
    make_scored_annotation,
    make_source,
    make_user_photo,
    make_well_composed,
    random_scene,
)

grid = candidate_grid()
print(f"candidate grid: {len(grid)} entries; first {grid[0]}, last {grid[-1]}")

rng = np.random.default_rng(4)
trunk = TrunkSpec(input_size=16, channels=3, hidden=(64, 32))
scored = [make_scored_annotation(random_scene(rng, "full"), rng, 6, 64) for _ in range(40)]
bestcrop = []
for _ in range(60):
    image, ann = make_source(random_scene(rng, "full"), 64)
    bestcrop.append((image, ann.best_crop))
unlabeled = [make_well_composed(random_scene(rng, "full"), 16) for _ in range(200)]
config = ScorerTrainConfig(delta=0.1, n_scored=5, k_bestcrop=6, p_unlabeled=6,
                           learning_rate=1e-3, weight_decay=1e-5, steps=900, seed=3)
scorer, _ = train_scorer(scored, bestcrop, unlabeled, config, trunk)
print("scorer trained; labeling 150 user shots...")

mix = Counter()
hits = eligible = 0
gen = np.random.default_rng(123)
for _ in range(150):
    image, true_kind = make_user_photo(random_scene(gen, "full"), gen, 16)
    label = pseudo_label(scorer, image, PseudoLabelConfig(margin=0.2))
    mix[label.kind.value if label.adjust else "none"] += 1
    if true_kind is not None and label.adjust:
        eligible += 1
        hits += label.kind is true_kind

print("pseudo label mix:", dict(mix))
print(f"agreement with the generating mis-framing: {hits}/{eligible}")
