"""Per-class partitioning into batches and construction of global states."""

from __future__ import annotations

import csv
import enum
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans

from .errors import BatchingError, DimensionError
from .qcore import TRACE_TOL, fidelity_matrix, pure_to_density_many, seed_sequence

_MAX_KMEANS_ATTEMPTS = 20
_KMEANS_RESTARTS = 50


@dataclass(frozen=True)
class Batch:
    member_indices: tuple[int, ...]
    label: int
    class_id: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "member_indices", tuple(int(i) for i in self.member_indices))
        if not self.member_indices:
            raise BatchingError("empty batch")

    @property
    def size(self) -> int:
        return len(self.member_indices)


@dataclass(frozen=True)
class GlobalState:
    state: np.ndarray
    label: int
    size: int
    weight: float

    def __post_init__(self):
        if self.size < 1:
            raise BatchingError("global state of an empty batch")
        if not self.weight > 0:
            raise BatchingError("weight must be positive")
        if self.label not in (0, 1):
            raise BatchingError("label must be 0 or 1")


class WeightMode(str, enum.Enum):
    UNIT = "unit"
    BATCH_SIZE = "batch-size"


def _check_count(population: int, n_batches: int) -> None:
    if n_batches < 1:
        raise BatchingError("need at least one batch")
    if n_batches > population:
        raise BatchingError(f"{n_batches} batches requested for {population} samples")


def random_batches(class_samples, n_batches: int, rng_seed=None, label: int = 0) -> list[Batch]:
    """Uniform random partition with sizes differing by at most one.

    With ``r = len(class_samples) % n_batches`` the first ``r`` batches carry
    the extra element.
    """
    samples = np.asarray(class_samples, dtype=np.int64).ravel()
    _check_count(samples.size, n_batches)
    perm = np.random.default_rng(rng_seed).permutation(samples)
    return [Batch(part, label, label) for part in np.array_split(perm, n_batches)]


def spectral_embedding(affinity: np.ndarray, k: int) -> np.ndarray:
    """Row-normalised eigenvectors of the ``k`` smallest normalised-Laplacian eigenvalues."""
    a = np.asarray(affinity, dtype=np.float64)
    deg = a.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    lap = np.eye(a.shape[0]) - inv_sqrt[:, None] * a * inv_sqrt[None, :]
    _, vecs = np.linalg.eigh(0.5 * (lap + lap.T))
    emb = vecs[:, :k]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    return emb / np.where(norms > 0, norms, 1.0)


def cluster_labels(embedding: np.ndarray, k: int, rng_seed=None) -> np.ndarray:
    """k-means on the embedding, re-seeded until no cluster is empty.

    When the embedding has fewer than ``k`` distinct rows (e.g. identical
    states) any partition is as good as another, so a seeded random balanced
    assignment is returned instead.
    """
    n = embedding.shape[0]
    seeds = seed_sequence(rng_seed).generate_state(_MAX_KMEANS_ATTEMPTS + 1)
    distinct = np.unique(np.round(embedding, 10), axis=0).shape[0]
    if distinct < k:
        perm = np.random.default_rng(seeds[-1]).permutation(n)
        out = np.empty(n, dtype=np.int64)
        for b, part in enumerate(np.array_split(perm, k)):
            out[part] = b
        return out
    for attempt in range(_MAX_KMEANS_ATTEMPTS):
        km = KMeans(k, init="k-means++", n_init=_KMEANS_RESTARTS, random_state=int(seeds[attempt] % 2**31))
        with warnings.catch_warnings():
            # duplicate points trigger a ConvergenceWarning; the empty-cluster check covers it
            warnings.simplefilter("ignore")
            labels = km.fit_predict(embedding)
        if np.unique(labels).size == k:
            return labels
    raise BatchingError(f"k-means left a cluster empty after {_MAX_KMEANS_ATTEMPTS} attempts")


def smart_batches(class_states, n_batches: int, rng_seed=None, label: int = 0, indices=None) -> list[Batch]:
    """Spectral clustering of one class on the pairwise-fidelity affinity.

    ``class_states`` are amplitude vectors ``(N, d)`` or densities
    ``(N, d, d)``; ``indices`` maps positions to dataset indices (defaults
    to ``0..N-1``). Batch sizes may be uneven and singletons are allowed.
    """
    states = np.asarray(class_states)
    n = states.shape[0]
    if n < 2:
        raise BatchingError("smart batching needs at least two states")
    _check_count(n, n_batches)
    idx = np.arange(n) if indices is None else np.asarray(indices, dtype=np.int64)
    if idx.size != n:
        raise DimensionError(f"{idx.size} indices for {n} states")
    if n_batches == 1:
        return [Batch(idx, label, label)]
    emb = spectral_embedding(fidelity_matrix(states), n_batches)
    assign = cluster_labels(emb, n_batches, rng_seed)
    # order batches by their smallest member so the output is canonical
    groups = [idx[assign == b] for b in range(n_batches)]
    groups.sort(key=lambda g: int(g.min()))
    return [Batch(g, label, label) for g in groups]


def _as_density_stack(states: np.ndarray) -> np.ndarray:
    states = np.asarray(states)
    if states.ndim == 2:
        return pure_to_density_many(states)
    return states.astype(np.complex128, copy=False)


def build_global_state(batch: Batch, states, weight_mode=WeightMode.UNIT) -> GlobalState:
    """Uniform mixture of the batch members; weight 1 or the batch size."""
    mode = WeightMode(weight_mode)
    members = np.asarray(states)[list(batch.member_indices)]
    dens = _as_density_stack(members)
    rho = dens.sum(axis=0) / batch.size
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e3 * TRACE_TOL:
        raise DimensionError(f"global state has trace {tr}")
    weight = float(batch.size) if mode is WeightMode.BATCH_SIZE else 1.0
    return GlobalState(rho, batch.label, batch.size, weight)


def make_batches(
    states, labels, n_batches: int, strategy: str = "random", rng_seed=None, allow_missing_class: bool = False
) -> list[Batch]:
    """Batch each class separately into ``n_batches``; class 0 first, then class 1.

    With ``allow_missing_class`` a class without members is skipped, which
    suits a data holder that owns only cases or only controls.
    """
    labels = np.asarray(labels)
    states = np.asarray(states)
    seq = seed_sequence(rng_seed).spawn(2)
    out = []
    for y, child in zip((0, 1), seq):
        idx = np.flatnonzero(labels == y)
        if idx.size == 0:
            if allow_missing_class:
                continue
            raise BatchingError(f"class {y} is empty")
        seed = int(child.generate_state(1)[0])
        if strategy == "random":
            out.extend(random_batches(idx, n_batches, seed, label=y))
        elif strategy == "smart":
            out.extend(smart_batches(states[idx], n_batches, seed, label=y, indices=idx))
        else:
            raise BatchingError(f"unknown batching strategy {strategy!r}")
    return out


def global_states(states, labels, n_batches: int, strategy: str = "random", rng_seed=None, allow_missing_class=False):
    """Batches and their global states; smart batches are weighted by size."""
    batches = make_batches(states, labels, n_batches, strategy, rng_seed, allow_missing_class)
    if not batches:
        raise BatchingError("no samples to batch")
    mode = WeightMode.BATCH_SIZE if strategy == "smart" else WeightMode.UNIT
    return batches, [build_global_state(b, states, mode) for b in batches]


def write_assignments_csv(path, batches) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_index", "class", "batch_id"])
        for b_id, b in enumerate(batches):
            for i in b.member_indices:
                w.writerow([i, b.label, b_id])
