"""Two-domain data: synthetic generators, IDX ingestion, label-shift subsampling.

Datasets are immutable value objects; every generator is a pure function of
its seed. The label-shift protocol thins chosen classes of the *source*
domain, which is where imbalance is applied throughout this package.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContractError,
    DegenerateDatasetError,
    DimensionError,
    IdxFormatError,
    IdxLengthError,
)

IDX_MAGIC_LABELS = 2049
IDX_MAGIC_IMAGES = 2051


@dataclass(frozen=True)
class DomainDataset:
    """Feature matrix with one-hot labels and a domain tag."""

    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n, C) one-hot float64
    domain: str  # "source" | "target"
    class_priors: np.ndarray = field(default=None)
    note: str = ""

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.float64)
        if feats.ndim != 2 or labels.ndim != 2 or feats.shape[0] != labels.shape[0]:
            raise DimensionError("features and labels must be aligned 2-D arrays")
        if feats.shape[0] < 1:
            raise ContractError("a dataset needs at least one sample")
        if self.domain not in ("source", "target"):
            raise ContractError(f"domain must be 'source' or 'target', got {self.domain!r}")
        onehot = (labels.sum(axis=1) == 1.0) & np.all((labels == 0.0) | (labels == 1.0), axis=1)
        if not np.all(onehot):
            raise ContractError("labels must be one-hot rows")
        priors = self.class_priors
        if priors is None:
            priors = labels.mean(axis=0)
        priors = np.asarray(priors, dtype=np.float64)
        if abs(priors.sum() - 1.0) > 1e-9:
            raise ContractError("class priors must sum to 1")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_priors", priors)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def num_classes(self) -> int:
        return self.labels.shape[1]

    @property
    def label_indices(self) -> np.ndarray:
        return self.labels.argmax(axis=1)


@dataclass(frozen=True)
class ShiftSpec:
    """Keep only a fraction of the samples of the affected classes."""

    classes: tuple[int, ...]
    keep_fraction: float

    def __post_init__(self):
        if not self.classes:
            raise ContractError("the affected class set must be nonempty")
        if not 0.0 < self.keep_fraction <= 1.0:
            raise ContractError(f"keep fraction must lie in (0, 1], got {self.keep_fraction}")
        object.__setattr__(self, "classes", tuple(sorted(set(int(c) for c in self.classes))))


def one_hot(indices, num_classes: int) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    out = np.zeros((indices.size, num_classes))
    out[np.arange(indices.size), indices] = 1.0
    return out


def _stratified_counts(n: int, priors) -> np.ndarray:
    """Integer class counts matching the priors exactly (largest remainder)."""
    priors = np.asarray(priors, dtype=np.float64)
    if abs(priors.sum() - 1.0) > 1e-9 or np.any(priors < 0):
        raise ContractError("priors must be nonnegative and sum to 1")
    raw = n * priors
    counts = np.floor(raw).astype(np.int64)
    remainder = n - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:remainder]] += 1
    return counts


def gen_two_moons(n_per_domain: int, noise_sd: float, source_priors, target_priors,
                  seed: int, rotation_deg: float = 20.0):
    """Two interleaved half-circles, one dataset per domain.

    Both domains share the moon geometry; the target cloud is rotated by
    ``rotation_deg`` about the figure's midpoint and class counts follow the
    requested priors exactly. Class 0 is the upper arc, class 1 the lower.
    """
    if noise_sd < 0.0:
        raise ContractError(f"noise_sd must be >= 0, got {noise_sd}")
    rng = np.random.default_rng(seed)
    out = []
    for domain, priors, angle in (
        ("source", source_priors, 0.0),
        ("target", target_priors, float(rotation_deg)),
    ):
        counts = _stratified_counts(n_per_domain, priors)
        if np.any(counts == 0):
            warnings.warn(
                f"{domain} domain requests zero samples for classes "
                f"{np.nonzero(counts == 0)[0].tolist()}",
                stacklevel=2,
            )
        xs, ys = [], []
        for cls, count in enumerate(counts):
            t = rng.uniform(0.0, np.pi, size=count)
            if cls == 0:
                pts = np.column_stack([np.cos(t), np.sin(t)])
            else:
                pts = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
            pts = pts + rng.normal(0.0, noise_sd, size=pts.shape)
            xs.append(pts)
            ys.append(np.full(count, cls))
        feats = np.vstack(xs)
        labels = np.concatenate(ys)
        if angle != 0.0:
            theta = np.deg2rad(angle)
            rot = np.array([[np.cos(theta), -np.sin(theta)],
                            [np.sin(theta), np.cos(theta)]])
            center = np.array([0.5, 0.25])
            feats = (feats - center) @ rot.T + center
        perm = rng.permutation(n_per_domain)
        out.append(
            DomainDataset(feats[perm], one_hot(labels[perm], len(counts)), domain,
                          note=f"two_moons(seed={seed}, rotation={angle})")
        )
    return out[0], out[1]


# ---------------------------------------------------------------------------
# IDX container (big-endian; magic 2051 = images rank 3, 2049 = labels rank 1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdxTensor:
    magic: int
    dims: tuple[int, ...]
    payload: np.ndarray  # uint8, flat

    def __post_init__(self):
        expected = int(np.prod(self.dims)) if self.dims else 0
        if self.payload.size != expected:
            raise IdxLengthError(
                f"payload has {self.payload.size} bytes, dims {self.dims} need {expected}"
            )


def parse_idx(data: bytes) -> IdxTensor:
    if len(data) < 4:
        raise IdxFormatError("IDX data shorter than the 4-byte magic")
    magic = struct.unpack(">I", data[:4])[0]
    if magic not in (IDX_MAGIC_LABELS, IDX_MAGIC_IMAGES):
        raise IdxFormatError(f"unsupported IDX magic {magic}")
    rank = data[3]
    header_len = 4 + 4 * rank
    if len(data) < header_len:
        raise IdxLengthError("IDX header truncated")
    dims = struct.unpack(f">{rank}I", data[4:header_len])
    expected = int(np.prod(dims))
    payload = data[header_len:]
    if len(payload) != expected:
        raise IdxLengthError(
            f"payload has {len(payload)} bytes, dims {dims} need {expected}"
        )
    return IdxTensor(magic=magic, dims=tuple(int(d) for d in dims),
                     payload=np.frombuffer(payload, dtype=np.uint8))


def write_idx(magic: int, dims, payload) -> bytes:
    """Serialize to the IDX wire format (inverse of :func:`parse_idx`)."""
    dims = tuple(int(d) for d in dims)
    payload = np.ascontiguousarray(payload, dtype=np.uint8).reshape(-1)
    if payload.size != int(np.prod(dims)):
        raise IdxLengthError("payload does not fill the declared dimensions")
    return struct.pack(">I", magic) + struct.pack(f">{len(dims)}I", *dims) + payload.tobytes()


def _mean_pool(images: np.ndarray, k: int) -> np.ndarray:
    n, h, w = images.shape
    if h % k or w % k:
        raise ContractError(f"image size {h}x{w} not divisible by pool {k}")
    return images.reshape(n, h // k, k, w // k, k).mean(axis=(2, 4))


def load_idx_dataset(image_bytes: bytes, label_bytes: bytes, domain: str,
                     num_classes: int = 10, pool: int = 1) -> DomainDataset:
    """Build a flat-feature dataset from raw IDX image/label containers.

    Pixels are scaled to [0, 1]; with ``pool`` > 1 the images are first
    downsampled by k x k mean pooling (which keeps the [0, 1] range).
    """
    images = parse_idx(image_bytes)
    labels = parse_idx(label_bytes)
    if images.magic != IDX_MAGIC_IMAGES or len(images.dims) != 3:
        raise IdxFormatError("expected a rank-3 image container")
    if labels.magic != IDX_MAGIC_LABELS or len(labels.dims) != 1:
        raise IdxFormatError("expected a rank-1 label container")
    if images.dims[0] != labels.dims[0]:
        raise IdxLengthError("image and label counts disagree")
    pixels = images.payload.reshape(images.dims).astype(np.float64) / 255.0
    if pool > 1:
        pixels = _mean_pool(pixels, pool)
    feats = pixels.reshape(images.dims[0], -1)
    return DomainDataset(feats, one_hot(labels.payload, num_classes), domain,
                         note=f"idx(pool={pool})")


# ---------------------------------------------------------------------------
# label-shift protocol and batching
# ---------------------------------------------------------------------------


def subsample_label_shift(ds: DomainDataset, spec: ShiftSpec, seed: int) -> DomainDataset:
    """Keep ceil(fraction * count) samples of each affected class.

    Samples are chosen uniformly without replacement; unaffected classes are
    untouched, feature/label pairings are preserved, and the prior vector is
    recomputed from the survivors.
    """
    idx_by_class = ds.label_indices
    present = set(np.unique(idx_by_class).tolist())
    missing = [c for c in spec.classes if c not in present]
    if missing:
        raise ContractError(f"classes {missing} not present in the dataset")
    rng = np.random.default_rng(seed)
    keep = []
    for cls in range(ds.num_classes):
        rows = np.nonzero(idx_by_class == cls)[0]
        if cls in spec.classes and rows.size:
            target = int(np.ceil(spec.keep_fraction * rows.size))
            if target < 1:
                raise DegenerateDatasetError(f"class {cls} would become empty")
            rows = np.sort(rng.choice(rows, size=target, replace=False))
        keep.append(rows)
    keep = np.concatenate(keep)
    keep.sort()
    return DomainDataset(ds.features[keep], ds.labels[keep], ds.domain,
                         note=ds.note + f" | shift(keep={spec.keep_fraction}, classes={spec.classes})")


def batch_iterator(ds: DomainDataset, batch_size: int, seed: int, epochs: int):
    """Seeded epoch-wise batches; the final ragged batch of an epoch is dropped.

    Each epoch draws a fresh permutation from (seed, epoch), so the whole
    stream is reproducible and two iterators with the same arguments yield
    identical batches.
    """
    if batch_size > ds.n:
        raise ContractError(f"batch size {batch_size} exceeds dataset size {ds.n}")
    if batch_size < 1:
        raise ContractError("batch size must be >= 1")
    for epoch in range(epochs):
        rng = np.random.default_rng([seed, epoch])
        perm = rng.permutation(ds.n)
        for start in range(0, ds.n - batch_size + 1, batch_size):
            rows = perm[start:start + batch_size]
            yield ds.features[rows], ds.labels[rows]


def to_csv(source: DomainDataset, target: DomainDataset) -> str:
    """Headered CSV with feature columns, integer label and domain tag."""
    if source.features.shape[1] != target.features.shape[1]:
        raise DimensionError("domains must share the feature dimension")
    d = source.features.shape[1]
    lines = [",".join([f"f{i}" for i in range(d)] + ["label", "domain"])]
    for ds in (source, target):
        labels = ds.label_indices
        for row, lab in zip(ds.features, labels):
            cells = [repr(float(v)) for v in row] + [str(int(lab)), ds.domain]
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
