"""Noise-rate estimation from the distribution of per-sample training losses.

A dataset is summarised by a histogram of its cross-entropy losses (ratios
of samples per loss interval, highest interval first), plus its sample and
class counts. A linear model fitted on auxiliary datasets with known,
injected noise rates maps that summary to a noise-rate estimate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import Dataset
from .errors import ArgumentError, DataError, FormatError, RunError
from .noise import NoiseSpec, inject_noise, max_noise_rate
from .rng import derive_seed

N_BINS = 1000
CLAMP_MARGIN = 1e-6


@dataclass(frozen=True, eq=False)
class LossHistogramFeatures:
    ratios: np.ndarray
    n_samples: int
    n_classes: int

    def vector(self) -> np.ndarray:
        """Regression inputs: the ratios followed by N and c."""
        return np.concatenate([self.ratios, [float(self.n_samples), float(self.n_classes)]])


@dataclass(frozen=True, eq=False)
class EstimatorTrainingRow:
    features: LossHistogramFeatures
    target: float


@dataclass(frozen=True)
class NoiseRateEstimate:
    raw: float
    clamped: float


@dataclass(frozen=True, eq=False)
class EstimatorModel:
    """Affine map on standardized features.

    The prediction is ``bias + sum_k weights[k] * (x[k] - feature_means[k]) / feature_scales[k]``,
    which is the same affine map on raw features that ``raw_coefficients`` returns.
    """

    weights: np.ndarray
    bias: float
    feature_means: np.ndarray
    feature_scales: np.ndarray
    n_bins: int = N_BINS
    training_residuals: np.ndarray | None = None

    def __post_init__(self):
        dim = self.n_bins + 2
        for name in ("weights", "feature_means", "feature_scales"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (dim,):
                raise ArgumentError(f"{name} must have length {dim}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ArgumentError(f"{name} has non-finite entries")
            object.__setattr__(self, name, arr)
        if not np.all(self.feature_scales > 0):
            raise ArgumentError("feature_scales must be strictly positive")
        if not np.isfinite(self.bias):
            raise ArgumentError("bias must be finite")

    def raw_coefficients(self) -> tuple[np.ndarray, float]:
        """Coefficients ``k`` and intercept ``b`` acting on unstandardized features."""
        k = self.weights / self.feature_scales
        return k, float(self.bias - k @ self.feature_means)

    def predict_raw(self, x: np.ndarray) -> np.ndarray:
        return self.bias + ((x - self.feature_means) / self.feature_scales) @ self.weights

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias,
                "feature_means": self.feature_means.tolist(),
                "feature_scales": self.feature_scales.tolist(), "j": self.n_bins}

    @classmethod
    def from_dict(cls, d: dict) -> "EstimatorModel":
        try:
            return cls(np.asarray(d["weights"]), float(d["bias"]), np.asarray(d["feature_means"]),
                       np.asarray(d["feature_scales"]), int(d.get("j", N_BINS)))
        except KeyError as exc:
            raise FormatError(str(exc.args[0]), "missing field in estimator model") from None

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "EstimatorModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def featurize_losses(losses, N: int | None = None, c: int = 2, n_bins: int = N_BINS) -> LossHistogramFeatures:
    """Histogram of losses over ``n_bins`` equal-width intervals of ``[0, max(losses)]``.

    ``ratios[0]`` is the highest-loss interval. A loss equal to the maximum
    falls in that interval; if every loss is zero, all mass lands there too.
    """
    losses = np.asarray(losses, dtype=np.float64).reshape(-1)
    if losses.size == 0:
        raise ArgumentError("cannot featurize an empty loss vector")
    if N is None:
        N = losses.size
    if N != losses.size:
        raise ArgumentError(f"N={N} does not match {losses.size} losses")
    if c < 2:
        raise ArgumentError("c must be >= 2")
    if not np.all(np.isfinite(losses)) or losses.min() < 0:
        raise DataError("losses must be finite and nonnegative")
    hi = losses.max()
    if hi > 0:
        ascending = np.minimum(np.floor(losses / hi * n_bins).astype(np.int64), n_bins - 1)
    else:
        ascending = np.full(losses.size, n_bins - 1)
    counts = np.bincount(ascending, minlength=n_bins)[::-1]
    return LossHistogramFeatures(counts / N, int(N), int(c))


def fit_ridge(X, y, ridge: float = 0.0):
    """Ridge regression on standardized features with an unpenalized intercept.

    Returns ``(weights, bias, means, scales)``. Zero-variance columns keep
    scale 1. With ``ridge == 0`` the minimum-norm least-squares solution is
    returned; otherwise the ridge normal equations are solved directly, in
    whichever of the primal or dual form is smaller.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if ridge < 0:
        raise ArgumentError("ridge must be >= 0")
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    scales[scales == 0] = 1.0
    Z = (X - means) / scales
    bias = float(y.mean())
    yc = y - bias
    if ridge == 0:
        w = np.linalg.lstsq(Z, yc, rcond=None)[0]
    elif Z.shape[0] < Z.shape[1]:
        alpha = np.linalg.solve(Z @ Z.T + ridge * np.eye(Z.shape[0]), yc)
        w = Z.T @ alpha
    else:
        w = np.linalg.solve(Z.T @ Z + ridge * np.eye(Z.shape[1]), Z.T @ yc)
    return w, bias, means, scales


def fit_estimator(rows: Sequence[EstimatorTrainingRow], ridge: float = 1e-6) -> EstimatorModel:
    if len(rows) < 2:
        raise ArgumentError("fitting the estimator needs at least two rows")
    n_bins = rows[0].features.ratios.shape[0]
    X = np.stack([r.features.vector() for r in rows])
    y = np.array([r.target for r in rows], dtype=np.float64)
    w, b, means, scales = fit_ridge(X, y, ridge)
    model = EstimatorModel(w, b, means, scales, n_bins)
    residuals = y - model.predict_raw(X)
    object.__setattr__(model, "training_residuals", residuals)
    return model


def estimate_noise_rate(model: EstimatorModel, feats: LossHistogramFeatures) -> NoiseRateEstimate:
    """Affine prediction, clamped to ``[0, (c-1)/c - 1e-6]``."""
    x = feats.vector()
    if x.shape[0] != model.weights.shape[0]:
        raise ArgumentError(f"features have {x.shape[0] - 2} bins, model expects {model.n_bins}")
    raw = float(model.predict_raw(x))
    hi = max_noise_rate(feats.n_classes) - CLAMP_MARGIN
    return NoiseRateEstimate(raw, float(min(max(raw, 0.0), hi)))


def build_training_rows(auxiliary: Sequence[Dataset], rates: Sequence[float],
                        noise_kinds: Sequence[str] = ("symmetric",), run_cfg=None,
                        n_bins: int = N_BINS) -> list[EstimatorTrainingRow]:
    """One row per (dataset, rate, kind): corrupt, train with plain CE, featurize losses.

    Training uses the phase-1 settings of ``run_cfg`` (a ``RunConfig``),
    followed by phase-2 training when ``run_cfg.loss_snapshot == "phase2"``,
    so rows match the losses the pipeline later ranks.
    """
    from .pipeline import RunConfig, phase1_pretrain, phase2_train

    cfg = run_cfg if run_cfg is not None else RunConfig()
    for d in auxiliary:
        for rate in rates:
            if rate >= max_noise_rate(d.c):
                raise ArgumentError(f"rate {rate} is not below (c-1)/c for dataset {d.name!r}")
    rows = []
    for di, d in enumerate(auxiliary):
        for ri, rate in enumerate(rates):
            for ki, kind in enumerate(noise_kinds):
                noise_seed = derive_seed(cfg.seed, 101, di, ri, ki)
                noisy, _ = inject_noise(d, NoiseSpec(kind, float(rate), noise_seed))
                try:
                    params, losses = phase1_pretrain(noisy, cfg)
                    if cfg.loss_snapshot == "phase2":
                        _, losses = phase2_train(params, noisy, cfg)
                except RunError as exc:
                    raise RunError(f"estimator training diverged on dataset {d.name!r} at rate {rate}: {exc}",
                                   phase="phase1") from exc
                rows.append(EstimatorTrainingRow(featurize_losses(losses, noisy.n, d.c, n_bins), float(rate)))
    return rows
