"""
Estimating the noise rate
=========================

Fit the loss-histogram regressor on a few auxiliary datasets with known
injected noise, then estimate the noise rate of a dataset it has not seen.
Takes under a minute.
"""

import numpy as np

from noiselab import (NoiseSpec, RunConfig, SyntheticSpec, build_training_rows, estimate_noise_rate,
                      featurize_losses, fit_estimator, generate_synthetic, inject_noise, phase1_pretrain)

rates = [0.0, 0.1, 0.2, 0.3, 0.4]
# a mix of binary and three-class sets with varying cluster spread
aux = [generate_synthetic(SyntheticSpec(n=500, c=2 + i % 2, feature_dim=50,
                                        cluster_spread=0.3 * (0.85 + 0.3 * ((i * 7) % 5) / 4), seed=100 + i))
       for i in range(8)]

# one row per (dataset, rate): corrupt, pre-train with plain CE, histogram the per-sample losses
rows = build_training_rows(aux, rates, run_cfg=RunConfig(seed=1))
model = fit_estimator(rows)
print(len(rows), "training rows; training RMSE", round(float(np.sqrt(np.mean(model.training_residuals ** 2))), 4))

held = generate_synthetic(SyntheticSpec(n=500, c=2, feature_dim=50, cluster_spread=0.3, seed=300))
# single runs jitter by a few points, so average three independently seeded ones
for rate in rates:
    runs = []
    for run in range(3):
        noisy, _ = inject_noise(held, NoiseSpec("symmetric", rate, seed=run))
        _, losses = phase1_pretrain(noisy, RunConfig(seed=10 + run))
        runs.append(estimate_noise_rate(model, featurize_losses(losses, noisy.n, noisy.c)).clamped)
    print(f"true {rate:.1f}  estimated {np.mean(runs):.3f}  (runs {np.round(runs, 3)})")
