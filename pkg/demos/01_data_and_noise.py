"""
Datasets and label noise
========================

Build a small synthetic dataset, split it, corrupt the training labels and
check the corruption record against the stored true labels.
"""

import tempfile
from pathlib import Path

import numpy as np

from noiselab import (NoiseSpec, SyntheticSpec, generate_synthetic, inject_noise, load_dataset, save_dataset,
                      split_dataset)

# four Gaussian clusters in an 8-dimensional unit cube
d = generate_synthetic(SyntheticSpec(n=400, c=4, feature_dim=8, cluster_spread=0.12, seed=1))
print(d.n, "samples,", d.c, "classes, class counts", np.bincount(d.observed_labels))

train, val, test = split_dataset(d, (0.7, 0.1, 0.2), seed=0)
print("split sizes:", train.n, val.n, test.n)

# symmetric noise: a flipped label moves to one of the other classes uniformly
noisy, record = inject_noise(train, NoiseSpec("symmetric", 0.3, seed=7))
print("flipped", record.n_flipped, "of", train.n, "-> realized rate", round(record.realized_rate, 4))
assert np.array_equal(record.flipped, noisy.observed_labels != noisy.true_labels)

# asymmetric noise always moves to the next class, cyclically
asym, rec2 = inject_noise(train, NoiseSpec("asymmetric", 0.2, seed=7))
moved = rec2.flipped
print("asymmetric flips follow y -> y+1:",
      bool(np.all(asym.observed_labels[moved] == (train.observed_labels[moved] + 1) % d.c)))

# datasets round-trip through JSON unchanged
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "noisy.json"
    save_dataset(noisy, path)
    back = load_dataset(path)
    print("JSON round trip identical:", back.features.tobytes() == noisy.features.tobytes()
          and np.array_equal(back.true_labels, noisy.true_labels))
