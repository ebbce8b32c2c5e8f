"""Fully-connected ReLU classifier with a temperature-scaled softmax head.

Forward and backward passes are written out by hand in float64 so the
gradients can be audited against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ArgumentError, FormatError, TrainingError, UsageError
from .rng import Rng


@dataclass(frozen=True)
class MlpSpec:
    layer_sizes: tuple
    activation: str = "relu"
    init_seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ArgumentError(f"layer_sizes needs >= 2 positive entries, got {sizes}")
        if sizes[-1] < 2:
            raise ArgumentError("the output layer needs at least two classes")
        if self.activation != "relu":
            raise ArgumentError(f"unsupported activation {self.activation!r}")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]

    def to_dict(self) -> dict:
        return {"layer_sizes": list(self.layer_sizes), "activation": self.activation,
                "init_seed": self.init_seed}

    @classmethod
    def from_dict(cls, d: dict) -> "MlpSpec":
        return cls(tuple(d["layer_sizes"]), d.get("activation", "relu"), int(d.get("init_seed", 0)))


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Weights ``W[k]`` of shape ``(fan_in, fan_out)`` and biases ``b[k]``."""

    spec: MlpSpec
    weights: tuple
    biases: tuple

    def __post_init__(self):
        ws = tuple(np.array(w, dtype=np.float64) for w in self.weights)
        bs = tuple(np.array(b, dtype=np.float64).reshape(-1) for b in self.biases)
        sizes = self.spec.layer_sizes
        if len(ws) != len(sizes) - 1 or len(bs) != len(ws):
            raise ArgumentError("layer count does not match spec")
        for k, (w, b) in enumerate(zip(ws, bs)):
            if w.shape != (sizes[k], sizes[k + 1]) or b.shape != (sizes[k + 1],):
                raise ArgumentError(f"layer {k} shapes {w.shape}/{b.shape} do not match spec")
            w.setflags(write=False)
            b.setflags(write=False)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in (*self.weights, *self.biases))

    def to_dict(self) -> dict:
        return {"spec": self.spec.to_dict(),
                "layers": [{"w": w.tolist(), "b": b.tolist()} for w, b in zip(self.weights, self.biases)]}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        try:
            spec = MlpSpec.from_dict(d["spec"])
            layers = d["layers"]
            return cls(spec, tuple(np.asarray(l["w"]) for l in layers),
                       tuple(np.asarray(l["b"]) for l in layers))
        except KeyError as exc:
            raise FormatError(str(exc.args[0]), "missing field in model params") from None

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "ModelParams":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Gradients:
    weights: tuple
    biases: tuple


@dataclass(frozen=True, eq=False)
class ForwardCache:
    params: ModelParams
    activations: list  # input to each layer
    pre_activations: list  # hidden pre-activations (before ReLU)
    probs: np.ndarray
    tau: float
    single: bool = field(default=False)


def init_params(spec: MlpSpec) -> ModelParams:
    """He-uniform weights in ``[-sqrt(6/fan_in), sqrt(6/fan_in)]``; zero biases."""
    rng = Rng(spec.init_seed)
    sizes = spec.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform_array(fan_in * fan_out, -bound, bound).reshape(fan_in, fan_out))
        biases.append(np.zeros(fan_out))
    return ModelParams(spec, tuple(weights), tuple(biases))


def tempered_softmax(z, tau: float) -> np.ndarray:
    """``exp(z_i / tau) / sum_j exp(z_j / tau)`` along the last axis."""
    if not tau > 0:
        raise ArgumentError(f"temperature must be > 0, got {tau}")
    z = np.asarray(z, dtype=np.float64)
    s = (z - z.max(axis=-1, keepdims=True)) / tau
    e = np.exp(s)
    return e / e.sum(axis=-1, keepdims=True)


def forward(params: ModelParams, x, tau: float = 1.0) -> tuple[np.ndarray, ForwardCache]:
    """Class probabilities for one sample ``(d,)`` or a batch ``(n, d)``."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x[None, :] if single else x
    d_in = params.spec.layer_sizes[0]
    if a.ndim != 2 or a.shape[1] != d_in:
        raise ArgumentError(f"expected {d_in} input features, got shape {x.shape}")
    activations, pre = [], []
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        activations.append(a)
        h = a @ w + b
        if k < last:
            pre.append(h)
            a = np.maximum(h, 0.0)
        else:
            a = h
    probs = tempered_softmax(a, tau)
    cache = ForwardCache(params, activations, pre, probs, tau, single)
    return (probs[0] if single else probs), cache


def predict_proba(params: ModelParams, x, tau: float = 1.0) -> np.ndarray:
    return forward(params, x, tau)[0]


def backward(params: ModelParams, cache: ForwardCache, dprobs) -> Gradients:
    """Gradients of a scalar loss given its derivative w.r.t. the probabilities."""
    if cache.params is not params:
        raise UsageError("forward cache was produced by different parameters")
    g = np.asarray(dprobs, dtype=np.float64)
    if cache.single:
        g = g[None, :]
    if g.shape != cache.probs.shape:
        raise ArgumentError(f"dprobs shape {g.shape} does not match probs {cache.probs.shape}")
    s = cache.probs
    # softmax Jacobian: dz_j = s_j (g_j - <g, s>) / tau
    dz = s * (g - np.sum(g * s, axis=1, keepdims=True)) / cache.tau
    n_layers = len(params.weights)
    gw = [None] * n_layers
    gb = [None] * n_layers
    for k in range(n_layers - 1, -1, -1):
        gw[k] = cache.activations[k].T @ dz
        gb[k] = dz.sum(axis=0)
        if k > 0:
            dz = (dz @ params.weights[k].T) * (cache.pre_activations[k - 1] > 0)
    return Gradients(tuple(gw), tuple(gb))


def sgd_step(params: ModelParams, grads: Gradients, lr: float,
             batch_index: int | None = None) -> ModelParams:
    """Plain gradient descent update ``params - lr * grads``."""
    if not lr > 0:
        raise ArgumentError(f"learning rate must be > 0, got {lr}")
    for a in (*grads.weights, *grads.biases):
        if not np.all(np.isfinite(a)):
            raise TrainingError("non-finite gradient", batch_index)
    ws = tuple(w - lr * gw for w, gw in zip(params.weights, grads.weights))
    bs = tuple(b - lr * gb for b, gb in zip(params.biases, grads.biases))
    return ModelParams(params.spec, ws, bs)
