"""Per-sample losses on softmax outputs and their derivatives.

All functions accept a single probability vector ``(c,)`` with an integer
label, or a batch ``(n, c)`` with a label vector; batch inputs return one
value (or gradient row) per sample.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ArgumentError

PROB_FLOOR = 1e-12
LOSS_KINDS = ("ce", "gce")


@dataclass(frozen=True)
class ObjectiveConfig:
    q: float = 0.7
    tau: float = 0.5
    lam: float = 0.1
    p: float = 0.1
    loss_kind: str = "gce"

    def __post_init__(self):
        _check_q(self.q)
        _check_p(self.p)
        if not self.lam >= 0:
            raise ArgumentError(f"lam must be >= 0, got {self.lam}")
        if not self.tau > 0:
            raise ArgumentError(f"tau must be > 0, got {self.tau}")
        if self.loss_kind not in LOSS_KINDS:
            raise ArgumentError(f"loss_kind must be one of {LOSS_KINDS}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ObjectiveConfig":
        return cls(**d)


def _check_q(q):
    if not 0.0 < q <= 1.0:
        raise ArgumentError(f"q must lie in (0, 1], got {q}")


def _check_p(p):
    if not 0.0 < p <= 1.0:
        raise ArgumentError(f"p must lie in (0, 1], got {p}")


# Plain cross entropy at temperature 1: what phases 1 and 2 train with.
CE_OBJECTIVE = ObjectiveConfig(q=1.0, tau=1.0, lam=0.0, p=1.0, loss_kind="ce")


def _label_prob(probs, y):
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim == 1:
        return probs, probs[int(y)]
    y = np.asarray(y, dtype=np.int64)
    return probs, probs[np.arange(probs.shape[0]), y]


def ce_loss(probs, y):
    """``-log(max(probs[y], 1e-12))``."""
    _, py = _label_prob(probs, y)
    return -np.log(np.maximum(py, PROB_FLOOR))


def gce_loss(probs, y, q: float):
    """Generalized cross entropy ``(1 - probs[y]**q) / q``."""
    _check_q(q)
    _, py = _label_prob(probs, y)
    return (1.0 - np.maximum(py, PROB_FLOOR) ** q) / q


def lp_penalty(probs, lam: float, p: float):
    """``lam * sum_i probs_i**p`` along the class axis."""
    _check_p(p)
    if not lam >= 0:
        raise ArgumentError(f"lam must be >= 0, got {lam}")
    probs = np.asarray(probs, dtype=np.float64)
    if p == 1.0:
        return lam * probs.sum(axis=-1)
    return lam * (np.maximum(probs, PROB_FLOOR) ** p).sum(axis=-1)


def total_loss(probs, y, cfg: ObjectiveConfig):
    base = ce_loss(probs, y) if cfg.loss_kind == "ce" else gce_loss(probs, y, cfg.q)
    if cfg.lam == 0:
        return base
    return base + lp_penalty(probs, cfg.lam, cfg.p)


def batch_objective(probs, y, cfg: ObjectiveConfig) -> float:
    """Mean of ``total_loss`` over a batch."""
    return float(np.mean(total_loss(probs, y, cfg)))


def total_loss_grad(probs, y, cfg: ObjectiveConfig) -> np.ndarray:
    """Derivative of ``total_loss`` with respect to each probability.

    Derivatives are evaluated at the floored probabilities, so they stay
    finite at the simplex boundary.
    """
    probs = np.asarray(probs, dtype=np.float64)
    single = probs.ndim == 1
    P = probs[None, :] if single else probs
    Y = np.atleast_1d(np.asarray(y, dtype=np.int64))
    rows = np.arange(P.shape[0])
    py = np.maximum(P[rows, Y], PROB_FLOOR)
    grad = np.zeros_like(P)
    if cfg.loss_kind == "ce":
        grad[rows, Y] = -1.0 / py
    else:
        grad[rows, Y] = -py ** (cfg.q - 1.0)
    if cfg.lam > 0:
        if cfg.p == 1.0:
            grad += cfg.lam
        else:
            grad += cfg.lam * cfg.p * np.maximum(P, PROB_FLOOR) ** (cfg.p - 1.0)
    return grad[0] if single else grad
