"""
Metrics and the command line
============================

Compute accuracy, macro-F1 and per-class AUC directly, then drive the same
workflow through the ``noiselab`` command on files in a temporary directory.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from noiselab import compute_metrics

probs = np.array([[0.8, 0.1, 0.1], [0.3, 0.6, 0.1], [0.2, 0.2, 0.6], [0.5, 0.4, 0.1]])
m = compute_metrics(probs, [0, 1, 2, 1])
print("accuracy", m.accuracy, "macro-F1", round(m.macro_f1, 4), "AUC per class", m.per_class_auc)
print(m.confusion)


def noiselab(*args):
    out = subprocess.run([sys.executable, "-m", "noiselab.cli", *map(str, args)], capture_output=True, text=True)
    if out.returncode:
        print("error:", out.stderr.strip())
    return out.stdout


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cfg = tmp / "cfg.json"
    cfg.write_text(json.dumps({"batch_size": 32, "hidden_sizes": [32]}))
    noiselab("make-synth", "--n", 400, "--c", 3, "--dim", 10, "--spread", 0.2, "--seed", 1,
             "--splits", "0.6,0.1,0.3", "--out", tmp / "d.json")
    noiselab("make-synth", "--n", 300, "--c", 3, "--dim", 10, "--spread", 0.2, "--seed", 2, "--out", tmp / "aux.json")
    noiselab("inject-noise", "--data", tmp / "d.train.json", "--rate", 0.3, "--seed", 5,
             "--out", tmp / "noisy.json", "--record", tmp / "record.json")
    noiselab("train-estimator", "--aux", tmp / "aux.json", "--config", cfg, "--out", tmp / "est.json")
    noiselab("run", "--train", tmp / "noisy.json", "--val", tmp / "d.validation.json", "--test", tmp / "d.test.json",
             "--config", cfg, "--estimator", tmp / "est.json", "--corruption-record", tmp / "record.json",
             "--params-out", tmp / "params.json", "--out", tmp / "report.json")
    report = json.loads((tmp / "report.json").read_text())
    print("run: eta_hat", round(report["eta_hat"], 3), "selection", report["selection"],
          "test accuracy", report["metrics"]["accuracy"])
    noiselab("eval", "--params", tmp / "params.json", "--data", tmp / "noisy.json", "--out", tmp / "eval.json",
             "--losses-out", tmp / "losses.csv")
    print("estimate from saved losses:",
          noiselab("estimate", "--model", tmp / "est.json", "--losses", tmp / "losses.csv", "--classes", 3).strip())
    # failures come back as one JSON line on stderr with a nonzero exit code
    noiselab("inject-noise", "--data", tmp / "d.test.json", "--rate", 0.3, "--out", tmp / "x.json")
