#!/usr/bin/env python3
"""Turn best-crop annotations into adjustment-labeled samples and ranking pairs.

Runs on the bundled synthetic disk-and-horizon world so it needs no datasets.
Writes a contact sheet (demo_samples.png) of labeled views with their
adjustment labels, plus examples of the three zero-border augmentations.
"""

import numpy as np

from viewadjust import kind_counts, pair_from_bestcrop, pair_from_unlabeled, synth_adjustment_dataset
from viewadjust.synthesis import augment_borders
from viewadjust.imaging import save_image
from viewadjust.synthetic import make_source, make_well_composed, random_scene

rng = np.random.default_rng(7)

# a handful of annotated sources
items = [make_source(random_scene(rng, "full"), size=96) for _ in range(6)]
samples = synth_adjustment_dataset(items, rng, out_size=48)
print("per-kind sample counts:", kind_counts(samples))

for s in samples[:6]:
    label = s.label.to_json()
    print(f"  image {s.image_id[:18]}… box=({s.sample_box.cx:.2f},{s.sample_box.cy:.2f},"
          f"{s.sample_box.w:.2f}) label={label}")

# contact sheet: first 8 labeled views side by side
views = [s.view for s in samples[:8]]
sheet = np.concatenate(views, axis=1)
save_image("demo_samples.png", sheet)
print("wrote demo_samples.png")

# ranking pairs: better-composed versus degraded
image, ann = items[0]
pair = pair_from_bestcrop(image, ann.best_crop, rng, out_size=48)
print("\nbest-crop pair: better/worse shapes", pair.better.shape, pair.worse.shape)

well = make_well_composed(random_scene(rng, "full"), 48)
upair = pair_from_unlabeled(well, rng, out_size=48)
print("unlabeled pair may contain zero-filled regions:",
      float((upair.worse == 0).mean()).__round__(3), "of pixels are zero")

# the augmentations that stop a scorer from keying on zero borders
augmented = [augment_borders(well, mode, rng) for mode in ("shift", "zoom_out", "rotation")]
save_image("demo_augmentations.png", np.concatenate([well, *augmented], axis=1))
print("wrote demo_augmentations.png (original, shift, zoom_out, rotation)")
