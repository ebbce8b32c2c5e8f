"""
The robust objective
====================

Generalized cross entropy, the sparsity penalty on the output distribution
and temperature scaling, evaluated on a few hand-picked probability vectors.
"""

import numpy as np

from noiselab import ObjectiveConfig, ce_loss, gce_loss, lp_penalty, tempered_softmax, total_loss

probs = np.array([0.7, 0.2, 0.1])

# GCE sits between cross entropy (q near 0) and half the L1 distance to the one-hot label (q = 1)
for q in (1e-6, 0.3, 0.7, 1.0):
    print(f"q={q:<6} GCE={gce_loss(probs, 0, q):.6f}")
print("CE         ", round(float(ce_loss(probs, 0)), 6))
print("half L1    ", 0.5 * np.abs(probs - [1, 0, 0]).sum())

# the penalty is smallest at one-hot outputs when p < 1
for p in (0.1, 0.5, 1.0):
    print(f"p={p}: penalty(one-hot)={lp_penalty(np.array([1.0, 0, 0]), 1.0, p):.4f}  "
          f"penalty(uniform)={lp_penalty(np.full(3, 1 / 3), 1.0, p):.4f}")

# lowering the temperature sharpens the output without changing the argmax
logits = np.array([1.0, 0.4, -0.3])
for tau in (1.0, 0.5, 0.1, 0.05):
    s = tempered_softmax(logits, tau)
    print(f"tau={tau:<4} probs={np.round(s, 4)}")

cfg = ObjectiveConfig()  # q=0.7, tau=0.5, lam=0.1, p=0.1
print("default objective on", probs, "->", round(float(total_loss(probs, 0, cfg)), 6))
