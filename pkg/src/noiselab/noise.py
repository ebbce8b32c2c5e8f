"""Synthetic label corruption with a per-sample ledger."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import ArgumentError, FormatError, UsageError
from .rng import Rng

NOISE_KINDS = ("symmetric", "asymmetric")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    rate: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ArgumentError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.rate < 1.0:
            raise ArgumentError(f"noise rate must lie in [0, 1), got {self.rate}")


@dataclass(frozen=True, eq=False)
class CorruptionRecord:
    flipped: np.ndarray
    original_label: np.ndarray
    realized_rate: float

    @property
    def n_flipped(self) -> int:
        return int(self.flipped.sum())

    def to_dict(self) -> dict:
        return {"flipped": [bool(v) for v in self.flipped],
                "original_label": [int(v) for v in self.original_label],
                "realized_rate": self.realized_rate}

    @classmethod
    def from_dict(cls, d: dict) -> "CorruptionRecord":
        try:
            flipped = np.asarray(d["flipped"], dtype=bool)
            original = np.asarray(d["original_label"], dtype=np.int64)
            rate = float(d["realized_rate"])
        except KeyError as exc:
            raise FormatError(str(exc.args[0]), "missing field in corruption record") from None
        if flipped.shape != original.shape:
            raise FormatError("flipped", "length differs from original_label")
        return cls(flipped, original, rate)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "CorruptionRecord":
        return cls.from_dict(json.loads(Path(path).read_text()))


def max_noise_rate(c: int) -> float:
    """Noise rates must stay strictly below this bound for labels to stay informative."""
    return (c - 1) / c


def inject_noise(d: Dataset, spec: NoiseSpec) -> tuple[Dataset, CorruptionRecord]:
    """Flip exactly ``round(rate * n)`` training labels.

    The flipped samples are the prefix of a seeded permutation. Symmetric
    noise relabels each one uniformly among the other ``c - 1`` classes;
    asymmetric noise maps label ``y`` to ``(y + 1) % c``.
    """
    if d.split != "train":
        raise UsageError(f"label noise is only injected into the train split, got {d.split!r}")
    if spec.rate >= max_noise_rate(d.c):
        raise ArgumentError(f"noise rate {spec.rate} must be below (c-1)/c = {max_noise_rate(d.c):.6f}")
    n = d.n
    n_flip = math.floor(spec.rate * n + 0.5)
    original = d.observed_labels.copy()
    labels = original.copy()
    flipped = np.zeros(n, dtype=bool)
    rng = Rng(spec.seed)
    chosen = rng.permutation(n)[:n_flip]
    for i in chosen:
        old = int(labels[i])
        if spec.kind == "symmetric":
            r = rng.integers(d.c - 1)
            new = r if r < old else r + 1
        else:
            new = (old + 1) % d.c
        labels[i] = new
        flipped[i] = True
    record = CorruptionRecord(flipped, original, n_flip / n if n else 0.0)
    return d.with_labels(labels), record
