"""Labeled sample collections: IDX ingestion, synthetic generation, splits, JSON I/O."""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ConsistencyError, DataError, FormatError, RangeError
from .rng import Rng

SPLITS = ("train", "validation", "test")
IDX_UBYTE = 0x08
IDX_LABEL_MAGIC = 0x00000801
IDX_IMAGE_MAGIC = 0x00000803

# Stored in ``Dataset.true_labels`` when a sample's ground truth is unknown.
UNKNOWN_LABEL = -1


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    observed_label: int
    true_label: int | None = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """A collection of samples sharing one split tag.

    Samples are stored column-wise: ``features`` is ``(n, feature_dim)``,
    ``observed_labels`` and ``true_labels`` are length ``n``. A true label
    of ``UNKNOWN_LABEL`` means the ground truth is hidden/unavailable.
    """

    features: np.ndarray
    observed_labels: np.ndarray
    true_labels: np.ndarray
    c: int
    split: str = "train"
    name: str = "dataset"

    def __post_init__(self):
        feats = np.array(self.features, dtype=np.float64, copy=True)
        if feats.ndim != 2:
            raise ArgumentError(f"features must be 2-D (n, feature_dim), got shape {feats.shape}")
        obs = np.array(self.observed_labels, dtype=np.int64, copy=True).reshape(-1)
        true = np.array(self.true_labels, dtype=np.int64, copy=True).reshape(-1)
        n = feats.shape[0]
        if self.c < 2:
            raise ArgumentError(f"class count c must be >= 2, got {self.c}")
        if feats.shape[1] < 1:
            raise ArgumentError("feature_dim must be positive")
        if obs.shape[0] != n or true.shape[0] != n:
            raise ArgumentError("features and labels disagree on the sample count")
        if self.split not in SPLITS:
            raise ArgumentError(f"unknown split {self.split!r}")
        if not np.all(np.isfinite(feats)) or (n and (feats.min() < 0.0 or feats.max() > 1.0)):
            raise DataError("features must be finite and lie in [0, 1]")
        if n and (obs.min() < 0 or obs.max() >= self.c):
            raise RangeError(f"observed label outside [0, {self.c})")
        if n and (true.min() < UNKNOWN_LABEL or true.max() >= self.c):
            raise RangeError(f"true label outside [0, {self.c})")
        for arr in (feats, obs, true):
            arr.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "observed_labels", obs)
        object.__setattr__(self, "true_labels", true)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Sample:
        t = int(self.true_labels[i])
        return Sample(self.features[i], int(self.observed_labels[i]),
                      None if t == UNKNOWN_LABEL else t)

    @property
    def samples(self) -> list[Sample]:
        return [self[i] for i in range(self.n)]

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], c: int, feature_dim: int,
                     split: str = "train", name: str = "dataset") -> "Dataset":
        feats = np.zeros((len(samples), feature_dim))
        for i, s in enumerate(samples):
            f = np.asarray(s.features, dtype=np.float64).reshape(-1)
            if f.shape[0] != feature_dim:
                raise ArgumentError(f"sample {i} has {f.shape[0]} features, expected {feature_dim}")
            feats[i] = f
        obs = [s.observed_label for s in samples]
        true = [UNKNOWN_LABEL if s.true_label is None else s.true_label for s in samples]
        return cls(feats, obs, true, c, split, name)

    def subset(self, indices, split: str | None = None, name: str | None = None) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.observed_labels[idx], self.true_labels[idx],
                       self.c, split or self.split, name or self.name)

    def with_labels(self, observed_labels) -> "Dataset":
        return Dataset(self.features, observed_labels, self.true_labels, self.c, self.split, self.name)

    def with_split(self, split: str) -> "Dataset":
        return Dataset(self.features, self.observed_labels, self.true_labels, self.c, split, self.name)

    def to_dict(self) -> dict:
        samples = []
        for i in range(self.n):
            t = int(self.true_labels[i])
            samples.append({
                "features": self.features[i].tolist(),
                "observed_label": int(self.observed_labels[i]),
                "true_label": None if t == UNKNOWN_LABEL else t,
            })
        return {"name": self.name, "c": self.c, "feature_dim": self.feature_dim,
                "split": self.split, "samples": samples}

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        try:
            c = int(d["c"])
            dim = int(d["feature_dim"])
            rows = d["samples"]
            feats = np.array([s["features"] for s in rows], dtype=np.float64).reshape(len(rows), dim)
            obs = [int(s["observed_label"]) for s in rows]
            true = [UNKNOWN_LABEL if s.get("true_label") is None else int(s["true_label"]) for s in rows]
        except KeyError as exc:
            raise FormatError(str(exc.args[0]), "missing field in dataset JSON") from None
        except (TypeError, ValueError) as exc:
            raise FormatError("samples", str(exc)) from None
        return cls(feats, obs, true, c, d.get("split", "train"), d.get("name", "dataset"))


def save_dataset(d: Dataset, path) -> None:
    Path(path).write_text(json.dumps(d.to_dict()))


def load_dataset(path) -> Dataset:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError("json", str(exc)) from None
    return Dataset.from_dict(raw)


# -- IDX ---------------------------------------------------------------------

def read_idx(path, expect_ndim: int | None = None, min_ndim: int = 1) -> np.ndarray:
    """Read an unsigned-byte IDX tensor.

    Header: two zero bytes, type code 0x08, number of dimensions, then one
    big-endian u32 per dimension; the payload is row-major u8.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise FormatError("magic", f"{path}: file too short for an IDX header")
    zero, dtype, ndim = struct.unpack(">HBB", raw[:4])
    magic = int.from_bytes(raw[:4], "big")
    if zero != 0 or dtype != IDX_UBYTE:
        raise FormatError("magic", f"{path}: unsupported magic 0x{magic:08x}")
    if (expect_ndim is not None and ndim != expect_ndim) or ndim < min_ndim:
        raise FormatError("magic", f"{path}: magic 0x{magic:08x} has wrong dimension count {ndim}")
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise FormatError("dims", f"{path}: truncated dimension header")
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    expected = math.prod(dims)
    payload = raw[header:]
    if len(payload) != expected:
        raise FormatError("payload", f"{path}: dims {dims} need {expected} bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def write_idx(path, array) -> None:
    arr = np.asarray(array)
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ArgumentError("IDX payload must fit in u8")
        arr = arr.astype(np.uint8)
    header = struct.pack(">HBB", 0, IDX_UBYTE, arr.ndim) + struct.pack(f">{arr.ndim}I", *arr.shape)
    Path(path).write_bytes(header + np.ascontiguousarray(arr).tobytes())


def load_idx_pair(images_path, labels_path, c: int, name: str | None = None) -> Dataset:
    """Load an IDX image/label pair as a clean train-split Dataset.

    Images may carry any number of dimensions beyond the sample axis (3-D
    volumes included); they are flattened and scaled by 1/255.
    """
    labels = read_idx(labels_path, expect_ndim=1)
    if labels.shape[0] == 0:
        raise FormatError("dims", f"{labels_path}: label file holds no samples")
    images = read_idx(images_path, min_ndim=3)
    if images.shape[0] != labels.shape[0]:
        raise ConsistencyError("dims", f"{images.shape[0]} images but {labels.shape[0]} labels")
    if labels.max() >= c:
        raise RangeError(f"label {int(labels.max())} is not below c={c}")
    feats = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    lab = labels.astype(np.int64)
    return Dataset(feats, lab, lab, c, "train", name or Path(images_path).stem)


# -- synthetic ----------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    n: int
    c: int
    feature_dim: int
    cluster_spread: float
    seed: int
    name: str = "synthetic"


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Gaussian clusters, one per class, clipped to the unit cube.

    Sample ``i`` belongs to class ``i % c``. Cluster means are drawn
    uniformly from ``[0.2, 0.8]^feature_dim``; features are
    ``mean + cluster_spread * N(0, I)`` clipped to ``[0, 1]``.
    """
    if spec.c < 2:
        raise ArgumentError("c must be >= 2")
    if spec.n < spec.c:
        raise ArgumentError(f"n={spec.n} must be >= c={spec.c}")
    if spec.feature_dim < 1:
        raise ArgumentError("feature_dim must be positive")
    if not spec.cluster_spread > 0:
        raise ArgumentError("cluster_spread must be positive")
    rng = Rng(spec.seed)
    means = rng.uniform_array(spec.c * spec.feature_dim, 0.2, 0.8).reshape(spec.c, spec.feature_dim)
    labels = np.arange(spec.n, dtype=np.int64) % spec.c
    noise = rng.normal_array(spec.n * spec.feature_dim).reshape(spec.n, spec.feature_dim)
    feats = np.clip(means[labels] + spec.cluster_spread * noise, 0.0, 1.0)
    return Dataset(feats, labels, labels, spec.c, "train", spec.name)


# -- splitting ----------------------------------------------------------------

def split_dataset(d: Dataset, fractions, seed: int) -> tuple[Dataset, Dataset, Dataset]:
    """Shuffle and split into (train, validation, test).

    ``fractions`` is a mapping with keys train/validation/test or a 3-tuple
    in that order. Validation and test sizes are ``floor(fraction * n)``;
    the remainder goes to train. Each part keeps the original sample order.
    """
    if isinstance(fractions, dict):
        fr = [float(fractions.get(k, 0.0)) for k in SPLITS]
    else:
        fr = [float(v) for v in fractions]
    if len(fr) != 3 or any(f < 0 for f in fr) or abs(sum(fr) - 1.0) > 1e-9:
        raise ArgumentError(f"split fractions must be nonnegative and sum to 1, got {fr}")
    n = d.n
    # the epsilon absorbs representation error such as 0.29 * 100 = 28.999...
    n_val = math.floor(fr[1] * n + 1e-9)
    n_test = math.floor(fr[2] * n + 1e-9)
    n_train = n - n_val - n_test
    perm = Rng(seed).permutation(n)
    parts = (perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:])
    return tuple(d.subset(np.sort(idx), split=s) for idx, s in zip(parts, SPLITS))
