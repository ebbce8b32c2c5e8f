"""Three-phase training: pre-train, loss-ranked data filtering, robust retraining."""

from __future__ import annotations

import contextlib
import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .data import Dataset
from .errors import ArgumentError, NoiselabError, RunError, TrainingError
from .estimator import EstimatorModel, estimate_noise_rate, featurize_losses
from .metrics import compute_metrics
from .model import MlpSpec, ModelParams, backward, forward, init_params, predict_proba, sgd_step
from .noise import CorruptionRecord, NoiseSpec, inject_noise
from .objective import CE_OBJECTIVE, ObjectiveConfig, ce_loss, total_loss, total_loss_grad
from .rng import MASK64, Rng, derive_seed

# stream tags for derive_seed
_SHUFFLE = 1
_PHASE3_INIT = 3

# Which weights produce the per-sample losses that are ranked and featurized.
LOSS_SNAPSHOTS = ("phase1", "phase2")


@dataclass(frozen=True)
class RunConfig:
    phase1_epochs: int = 90
    phase2_epochs: int = 20
    phase3_epochs: int = 90
    batch_size: int = 128
    phase2_batch_size: int = 16
    lr: float = 0.01
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    forget_margin: float = 0.05
    forget_rate_override: float | None = None
    reinit_phase3: bool = True
    loss_snapshot: str = "phase1"
    seed: int = 0
    model_spec: MlpSpec | None = None
    hidden_sizes: tuple = (128, 64)
    estimator_path: str | None = None

    def __post_init__(self):
        for name in ("phase1_epochs", "phase2_epochs", "phase3_epochs"):
            if getattr(self, name) < 0:
                raise ArgumentError(f"{name} must be >= 0")
        if self.batch_size < 1 or self.phase2_batch_size < 1:
            raise ArgumentError("batch sizes must be positive")
        if not self.lr > 0:
            raise ArgumentError("lr must be > 0")
        if self.forget_margin < 0:
            raise ArgumentError("forget_margin must be >= 0")
        if self.loss_snapshot not in LOSS_SNAPSHOTS:
            raise ArgumentError(f"loss_snapshot must be one of {LOSS_SNAPSHOTS}")
        if self.forget_rate_override is not None and not 0 <= self.forget_rate_override < 1:
            raise ArgumentError("forget_rate_override must lie in [0, 1)")
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))

    @property
    def total_epochs(self) -> int:
        return self.phase1_epochs + self.phase2_epochs + self.phase3_epochs

    def spec_for(self, d: Dataset) -> MlpSpec:
        if self.model_spec is None:
            return MlpSpec((d.feature_dim, *self.hidden_sizes, d.c), init_seed=self.seed)
        sizes = self.model_spec.layer_sizes
        if sizes[0] != d.feature_dim or sizes[-1] != d.c:
            raise ArgumentError(f"model layer sizes {sizes} do not fit data ({d.feature_dim} features, {d.c} classes)")
        return self.model_spec

    def to_dict(self) -> dict:
        return {
            "phase1_epochs": self.phase1_epochs, "phase2_epochs": self.phase2_epochs,
            "phase3_epochs": self.phase3_epochs, "batch_size": self.batch_size,
            "phase2_batch_size": self.phase2_batch_size, "lr": self.lr,
            "objective": self.objective.to_dict(), "forget_margin": self.forget_margin,
            "forget_rate_override": self.forget_rate_override, "reinit_phase3": self.reinit_phase3,
            "loss_snapshot": self.loss_snapshot, "seed": self.seed,
            "model_spec": None if self.model_spec is None else self.model_spec.to_dict(),
            "hidden_sizes": list(self.hidden_sizes), "estimator_path": self.estimator_path,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ArgumentError(f"unknown config fields: {sorted(unknown)}")
        if isinstance(d.get("objective"), dict):
            d["objective"] = ObjectiveConfig.from_dict(d["objective"])
        if isinstance(d.get("model_spec"), dict):
            d["model_spec"] = MlpSpec.from_dict(d["model_spec"])
        if "hidden_sizes" in d:
            d["hidden_sizes"] = tuple(d["hidden_sizes"])
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class SelectionResult:
    kept_indices: np.ndarray
    removed_indices: np.ndarray
    forget_rate: float
    eta_hat: float | None
    eta_hat_raw: float | None
    losses: np.ndarray


@dataclass
class RunReport:
    mode: str
    config: dict
    eta_hat: float | None
    eta_hat_raw: float | None
    forget_rate: float | None
    selection: dict | None
    metrics: dict
    metrics_best_val: dict | None
    best_val_epoch: int | None
    curves: list
    params: ModelParams | None = field(default=None, repr=False)  # final weights, not serialized

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "config": self.config, "eta_hat": self.eta_hat,
               "eta_hat_raw": self.eta_hat_raw, "forget_rate": self.forget_rate}
        if self.selection is not None:
            out["selection"] = self.selection
        out.update({"metrics": self.metrics, "metrics_best_val": self.metrics_best_val,
                    "best_val_epoch": self.best_val_epoch, "curves": self.curves})
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def curves_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "phase", "train_loss", "val_acc"])
        for row in self.curves:
            w.writerow([row["epoch"], row["phase"], repr(row["train_loss"]),
                        "" if row["val_accuracy"] is None else repr(row["val_accuracy"])])
        return buf.getvalue()


EpochHook = Callable[[int, ModelParams, "float | None"], None]


def accuracy(params: ModelParams, d: Dataset, tau: float = 1.0) -> float:
    probs = predict_proba(params, d.features, tau)
    return float(np.mean(np.argmax(probs, axis=1) == d.observed_labels))


def per_sample_ce(params: ModelParams, d: Dataset) -> np.ndarray:
    """Cross-entropy of every sample against its observed label, weights frozen."""
    if d.n == 0:
        return np.zeros(0)
    return ce_loss(predict_proba(params, d.features, 1.0), d.observed_labels)


def train_epochs(params: ModelParams, d: Dataset, *, epochs: int, batch_size: int, lr: float,
                 objective: ObjectiveConfig, seed: int, phase: str, first_epoch: int = 1,
                 d_val: Dataset | None = None, curves: list | None = None,
                 on_epoch: EpochHook | None = None) -> ModelParams:
    """Minibatch SGD on the mean batch objective.

    Epoch ``e`` (numbered globally across phases) shuffles with the stream
    ``derive_seed(seed, _SHUFFLE, e)``.
    """
    X, Y = d.features, d.observed_labels
    for epoch in range(first_epoch, first_epoch + epochs):
        order = Rng(derive_seed(seed, _SHUFFLE, epoch)).permutation(d.n)
        loss_sum = 0.0
        for b, start in enumerate(range(0, d.n, batch_size)):
            idx = order[start:start + batch_size]
            probs, cache = forward(params, X[idx], objective.tau)
            losses = total_loss(probs, Y[idx], objective)
            if not np.all(np.isfinite(losses)):
                raise RunError("non-finite loss", phase, epoch, b)
            loss_sum += float(losses.sum())
            dprobs = total_loss_grad(probs, Y[idx], objective) / idx.size
            try:
                params = sgd_step(params, backward(params, cache, dprobs), lr, b)
            except TrainingError as exc:
                raise RunError(str(exc), phase, epoch, b) from exc
        val_acc = accuracy(params, d_val, objective.tau) if d_val is not None and d_val.n else None
        if curves is not None:
            curves.append({"epoch": epoch, "phase": phase, "train_loss": loss_sum / d.n,
                           "val_accuracy": val_acc})
        if on_epoch is not None:
            on_epoch(epoch, params, val_acc)
    return params


def phase1_pretrain(d_train: Dataset, cfg: RunConfig, *, d_val: Dataset | None = None,
                    curves: list | None = None, epochs: int | None = None,
                    on_epoch: EpochHook | None = None) -> tuple[ModelParams, np.ndarray]:
    """Plain CE training from a fresh init; returns the weights and per-sample CE losses."""
    if d_train.n == 0:
        raise RunError("training set is empty", "phase1")
    params = init_params(cfg.spec_for(d_train))
    params = train_epochs(params, d_train, epochs=cfg.phase1_epochs if epochs is None else epochs,
                          batch_size=cfg.batch_size, lr=cfg.lr, objective=CE_OBJECTIVE,
                          seed=cfg.seed, phase="phase1", d_val=d_val, curves=curves, on_epoch=on_epoch)
    return params, per_sample_ce(params, d_train)


def phase2_train(params: ModelParams, d_train: Dataset, cfg: RunConfig, *,
                 d_val: Dataset | None = None, curves: list | None = None) -> tuple[ModelParams, np.ndarray]:
    """Continue CE training at the small phase-2 batch size, then recompute per-sample losses."""
    params = train_epochs(params, d_train, epochs=cfg.phase2_epochs, batch_size=cfg.phase2_batch_size,
                          lr=cfg.lr, objective=CE_OBJECTIVE, seed=cfg.seed, phase="phase2",
                          first_epoch=cfg.phase1_epochs + 1, d_val=d_val, curves=curves)
    return params, per_sample_ce(params, d_train)


def phase2_select(d_train: Dataset, losses, cfg: RunConfig,
                  estimator: EstimatorModel | None = None) -> SelectionResult:
    """Drop the ``floor(k * n)`` highest-loss samples.

    ``k`` is ``cfg.forget_rate_override`` when set, otherwise the estimated
    noise rate minus ``cfg.forget_margin`` (floored at 0). Equal losses are
    removed in ascending index order.
    """
    losses = np.asarray(losses, dtype=np.float64)
    n = d_train.n
    if losses.shape != (n,):
        raise ArgumentError(f"expected {n} losses, got shape {losses.shape}")
    eta_hat = eta_raw = None
    if estimator is not None:
        est = estimate_noise_rate(estimator, featurize_losses(losses, n, d_train.c, estimator.n_bins))
        eta_hat, eta_raw = est.clamped, est.raw
    if cfg.forget_rate_override is not None:
        k = float(cfg.forget_rate_override)
    elif eta_hat is not None:
        k = max(0.0, eta_hat - cfg.forget_margin)
    else:
        raise ArgumentError("selection needs an estimator model or a forget_rate_override")
    n_remove = math.floor(k * n + 1e-9)
    order = np.lexsort((np.arange(n), -losses))
    removed = np.sort(order[:n_remove])
    kept = np.sort(order[n_remove:])
    return SelectionResult(kept, removed, k, eta_hat, eta_raw, losses)


def selection_quality(selection: SelectionResult, record: CorruptionRecord) -> dict:
    """Precision and recall of the removed set against the corruption ledger."""
    flipped = np.asarray(record.flipped, dtype=bool)
    if flipped.shape[0] != selection.losses.shape[0]:
        raise ArgumentError("corruption record does not match the training set size")
    hits = int(flipped[selection.removed_indices].sum())
    removed = int(selection.removed_indices.size)
    total = int(flipped.sum())
    return {"precision": hits / removed if removed else None,
            "recall": hits / total if total else None,
            "removed_count": removed}


def phase3_train(d_clean: Dataset, cfg: RunConfig, warm_params: ModelParams | None = None, *,
                 d_val: Dataset | None = None, curves: list | None = None,
                 on_epoch: EpochHook | None = None) -> ModelParams:
    """Train on the filtered set with the robust objective.

    Starts from a fresh initialization (seeded separately from phase 1)
    when ``cfg.reinit_phase3`` is set, otherwise from ``warm_params``.
    """
    if d_clean.n == 0:
        raise RunError("cleaned training set is empty (forget rate removed every sample)", "phase3")
    if cfg.reinit_phase3:
        spec = cfg.spec_for(d_clean)
        spec = replace(spec, init_seed=derive_seed(spec.init_seed, _PHASE3_INIT) & (MASK64 >> 1))
        params = init_params(spec)
    elif warm_params is None:
        raise ArgumentError("reinit_phase3=false requires warm_params")
    else:
        params = warm_params
    first = cfg.phase1_epochs + cfg.phase2_epochs + 1
    return train_epochs(params, d_clean, epochs=cfg.phase3_epochs, batch_size=cfg.batch_size, lr=cfg.lr,
                        objective=cfg.objective, seed=cfg.seed, phase="phase3", first_epoch=first,
                        d_val=d_val, curves=curves, on_epoch=on_epoch)


@contextlib.contextmanager
def _phase(label: str):
    try:
        yield
    except NoiselabError as exc:
        if getattr(exc, "phase", None) is None:
            exc.phase = label
        raise


class _BestTracker:
    def __init__(self):
        self.best_acc = -1.0
        self.epoch = None
        self.params = None

    def __call__(self, epoch, params, val_acc):
        if val_acc is not None and val_acc > self.best_acc:
            self.best_acc, self.epoch, self.params = val_acc, epoch, params


def _check_splits(*ds: Dataset):
    present = [d for d in ds if d is not None]
    if len({(d.c, d.feature_dim) for d in present}) > 1:
        raise ArgumentError("train/validation/test disagree on class count or feature dimension")


def _test_metrics(params, d_test, tau):
    if d_test is None or d_test.n == 0:
        return None
    labels = np.where(d_test.true_labels >= 0, d_test.true_labels, d_test.observed_labels)
    return compute_metrics(predict_proba(params, d_test.features, tau), labels).to_dict()


def run_pipeline(d_train: Dataset, d_val: Dataset | None, d_test: Dataset | None, cfg: RunConfig,
                 estimator: EstimatorModel | None = None, corruption: CorruptionRecord | None = None,
                 baseline: bool = False) -> RunReport:
    """Run all three phases (or the phase-1-only baseline) and evaluate on the test set.

    Selection ranks the losses of the snapshot named by ``cfg.loss_snapshot``
    (the end of phase 1 by default, the protocol the estimator is fitted on).
    Phase 3 warm-starts from the end-of-phase-2 weights when
    ``cfg.reinit_phase3`` is false.

    Test metrics are reported for the last epoch and for the epoch of the
    final training phase with the best validation accuracy.
    """
    _check_splits(d_train, d_val, d_test)
    curves: list = []
    best = _BestTracker()
    if baseline:
        with _phase("phase1"):
            params, _ = phase1_pretrain(d_train, cfg, d_val=d_val, curves=curves,
                                        epochs=cfg.total_epochs, on_epoch=best)
        tau = CE_OBJECTIVE.tau
        return RunReport("baseline", cfg.to_dict(), None, None, None, None,
                         _test_metrics(params, d_test, tau),
                         _test_metrics(best.params, d_test, tau) if best.params is not None else None,
                         best.epoch, curves, params)

    with _phase("phase1"):
        params, losses = phase1_pretrain(d_train, cfg, d_val=d_val, curves=curves)
    with _phase("phase2"):
        params, phase2_losses = phase2_train(params, d_train, cfg, d_val=d_val, curves=curves)
        if cfg.loss_snapshot == "phase2":
            losses = phase2_losses
        sel = phase2_select(d_train, losses, cfg, estimator)
        selection = {"precision": None, "recall": None, "removed_count": int(sel.removed_indices.size)}
        if corruption is not None:
            selection = selection_quality(sel, corruption)
    with _phase("phase3"):
        d_clean = d_train.subset(sel.kept_indices)
        params = phase3_train(d_clean, cfg, params, d_val=d_val, curves=curves, on_epoch=best)
    tau = cfg.objective.tau
    return RunReport("pipeline", cfg.to_dict(), sel.eta_hat, sel.eta_hat_raw, sel.forget_rate, selection,
                     _test_metrics(params, d_test, tau),
                     _test_metrics(best.params, d_test, tau) if best.params is not None else None,
                     best.epoch, curves, params)


FIXED_FORGET_RATES = (0.0, 0.1, 0.2, 0.3, 0.4)


def ablate_forget_rate(d_train: Dataset, d_val: Dataset | None, d_test: Dataset, cfg: RunConfig,
                       estimator: EstimatorModel, noise_rates: Sequence[float] | None = None,
                       noise_kind: str = "symmetric", noise_seed: int = 0,
                       fixed_rates: Sequence[float] = FIXED_FORGET_RATES) -> list[dict]:
    """Test accuracy of the pipeline under each fixed forget rate and the estimated one.

    With ``noise_rates`` the clean ``d_train`` is corrupted at each rate and
    every configuration is evaluated on every corrupted copy; otherwise
    ``d_train`` is used as given. Returns one row per configuration with
    per-noise-rate accuracies and their mean.
    """
    if noise_rates is None:
        variants = [(None, d_train)]
    else:
        variants = [(r, inject_noise(d_train, NoiseSpec(noise_kind, float(r), derive_seed(noise_seed, i)))[0])
                    for i, r in enumerate(noise_rates)]
    configs = [(f"{r:g}", replace(cfg, forget_rate_override=float(r))) for r in fixed_rates]
    configs.append(("estimated", replace(cfg, forget_rate_override=None)))
    rows = []
    for label, c in configs:
        accs = {}
        for rate, d in variants:
            rep = run_pipeline(d, d_val, d_test, c, estimator)
            accs["as_given" if rate is None else f"{rate:g}"] = rep.metrics["accuracy"]
        rows.append({"forget_rate": label, "accuracy": {k: accs[k] for k in accs},
                     "mean_accuracy": float(np.mean(list(accs.values())))})
    return rows


def ablation_csv(rows: list[dict]) -> str:
    keys = list(rows[0]["accuracy"]) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["forget_rate", *[f"acc_noise_{k}" for k in keys], "mean_accuracy"])
    for r in rows:
        w.writerow([r["forget_rate"], *[repr(r["accuracy"][k]) for k in keys], repr(r["mean_accuracy"])])
    return buf.getvalue()
