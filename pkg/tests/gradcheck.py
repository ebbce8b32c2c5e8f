"""Central finite differences, independent of the analytic backward pass."""

import numpy as np

from noiselab.model import ModelParams, forward
from noiselab.objective import ObjectiveConfig, batch_objective


def rel_err(a, b) -> float:
    a, b = np.ravel(a), np.ravel(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-12))


def objective_value(params: ModelParams, X, y, cfg: ObjectiveConfig) -> float:
    probs, _ = forward(params, X, cfg.tau)
    return batch_objective(probs, y, cfg)


def numeric_param_grads(params: ModelParams, X, y, cfg: ObjectiveConfig, eps: float = 1e-5):
    ws = [w.copy() for w in params.weights]
    bs = [b.copy() for b in params.biases]

    def value():
        return objective_value(ModelParams(params.spec, tuple(ws), tuple(bs)), X, y, cfg)

    out_w, out_b = [], []
    for arrs, out in ((ws, out_w), (bs, out_b)):
        for a in arrs:
            g = np.zeros_like(a)
            for idx in np.ndindex(a.shape):
                orig = a[idx]
                a[idx] = orig + eps
                up = value()
                a[idx] = orig - eps
                down = value()
                a[idx] = orig
                g[idx] = (up - down) / (2 * eps)
            out.append(g)
    return out_w, out_b
