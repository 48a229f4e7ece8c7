"""Seeded synthetic datasets: two-qubit toy states and case/control genotypes.

Toy datasets live on two qubits. The positive class starts from ``|00>`` or
``|01>`` and the negative class from ``(|00> +- |01>)/sqrt(2)``, so the two
classes differ on qubit 1 (the least significant bit, see ``qcore``).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .ansatz import embed_single, ry
from .errors import EvalError, GenerationError, ParamError
from .qcore import (
    amplitude_encode_many,
    fidelity,
    n_qubits_for,
    random_density_hs,
)

PURE = "pure"
DENSITY = "density"
GENOTYPE = "genotype"
PAYLOAD_KINDS = (PURE, DENSITY, GENOTYPE)

_S2 = 1.0 / np.sqrt(2.0)
POSITIVE_INITIAL = np.array([[1, 0, 0, 0], [0, 1, 0, 0]], dtype=np.float64)
NEGATIVE_INITIAL = np.array([[_S2, _S2, 0, 0], [_S2, -_S2, 0, 0]], dtype=np.float64)
SHIFT_STATE = np.diag([0.0, 0.0, 0.5, 0.5]).astype(np.complex128)


@dataclass
class LabeledDataset:
    """Homogeneous payloads with binary labels.

    ``payloads`` is ``(N, d)`` complex amplitudes for ``pure``, ``(N, d, d)``
    densities for ``density`` and ``(N, n_snps)`` uint8 genotypes for
    ``genotype``.
    """

    kind: str
    payloads: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PAYLOAD_KINDS:
            raise ParamError(f"unknown payload kind {self.kind!r}")
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1 or len(self.payloads) != self.labels.size:
            raise ParamError("one label per payload required")
        if np.any((self.labels != 0) & (self.labels != 1)):
            raise ParamError("labels must be 0 or 1")

    def __len__(self) -> int:
        return int(self.labels.size)

    def counts(self) -> dict[int, int]:
        return {0: int(np.sum(self.labels == 0)), 1: int(np.sum(self.labels == 1))}

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.kind, self.payloads[idx], self.labels[idx], dict(self.meta))

    def quantum_states(self) -> np.ndarray:
        """Amplitude vectors ``(N, d)`` or densities ``(N, d, d)``.

        Genotypes are amplitude-encoded on the smallest register that fits.
        """
        if self.kind == GENOTYPE:
            n = max(1, int(np.ceil(np.log2(self.payloads.shape[1]))))
            return amplitude_encode_many(self.payloads, n)
        return self.payloads

    def densities(self) -> np.ndarray:
        states = self.quantum_states()
        if states.ndim == 2:
            return states[:, :, None] * states[:, None, :].conj()
        return states


# --- toy datasets -----------------------------------------------------------


@dataclass(frozen=True)
class ToyParams:
    e_s: float
    e_shift: float
    n_per_class: int

    def __post_init__(self):
        if self.e_s < 0 or self.e_shift < 0:
            raise ParamError("perturbation scales must be non-negative")
        if self.n_per_class < 1:
            raise ParamError("need at least one sample per class")


def _ry_on(theta: float, qubit: int) -> np.ndarray:
    return embed_single(ry(theta), qubit, 2)


def gen_toy_pure(p: ToyParams, rng_seed=None) -> LabeledDataset:
    """Perturbed two-qubit pure states, real amplitudes.

    Every sample gets ``Ry(t1)`` with ``t1 ~ U(-e_s, e_s)`` on qubit 1; positive
    samples also get ``Ry(t2)`` with ``t2 ~ U(-e_shift, e_shift)`` on qubit 0.
    """
    rng = np.random.default_rng(rng_seed)
    n = p.n_per_class
    labels = np.repeat([0, 1], n)
    out = np.empty((2 * n, 4))
    for i, y in enumerate(labels):
        init = (POSITIVE_INITIAL if y else NEGATIVE_INITIAL)[rng.integers(2)]
        psi = _ry_on(rng.uniform(-p.e_s, p.e_s), 1) @ init
        if y:
            psi = _ry_on(rng.uniform(-p.e_shift, p.e_shift), 0) @ psi
        out[i] = psi
    meta = {"generator": "toy-pure", "params": asdict(p), "seed": _seed_meta(rng_seed)}
    return LabeledDataset(PURE, out.astype(np.complex128), labels, meta)


def gen_toy_mixed(p: ToyParams, rng_seed=None) -> LabeledDataset:
    """Initial states mixed with Hilbert-Schmidt noise; positives also with ``SHIFT_STATE``."""
    if p.e_s + p.e_shift > 1.0:
        raise ParamError(f"e_s + e_shift = {p.e_s + p.e_shift} exceeds 1")
    rng = np.random.default_rng(rng_seed)
    n = p.n_per_class
    labels = np.repeat([0, 1], n)
    out = np.empty((2 * n, 4, 4), dtype=np.complex128)
    for i, y in enumerate(labels):
        init = (POSITIVE_INITIAL if y else NEGATIVE_INITIAL)[rng.integers(2)]
        rho_ini = np.outer(init, init).astype(np.complex128)
        rho_rand = random_density_hs(4, rng)
        if y:
            out[i] = (1 - p.e_s - p.e_shift) * rho_ini + p.e_s * rho_rand + p.e_shift * SHIFT_STATE
        else:
            out[i] = (1 - p.e_s) * rho_ini + p.e_s * rho_rand
    meta = {"generator": "toy-mixed", "params": asdict(p), "seed": _seed_meta(rng_seed)}
    return LabeledDataset(DENSITY, out, labels, meta)


# --- genotypes --------------------------------------------------------------

DEFAULT_TRAITS = ((0.006, 5.0, 5.0), (0.004, 6.0, 4.0), (0.003, 7.0, 7.0))
DEFAULT_RISK = (1.5, 1.2, 1.6, 2.0, 1.8, 1.3)


@dataclass(frozen=True)
class SnpModelParams:
    """Two-locus multiplicative odds model over ``n_snps`` loci.

    Trait ``t`` reads loci ``causal[2t]`` and ``causal[2t+1]``. ``risk`` are
    per-causal-locus factors applied to the minor-allele frequency of the
    enriched half of the generated pool.
    """

    n_snps: int = 10_000
    n_cases: int = 465
    n_controls: int = 465
    traits: tuple = DEFAULT_TRAITS
    causal: tuple = (0, 1, 2, 3, 4, 5)
    risk: tuple = DEFAULT_RISK
    n_features: int | None = 128
    pool_chunk: int = 1000
    max_pool: int = 200_000

    def __post_init__(self):
        object.__setattr__(self, "traits", tuple(tuple(float(v) for v in t) for t in self.traits))
        object.__setattr__(self, "causal", tuple(int(c) for c in self.causal))
        object.__setattr__(self, "risk", tuple(float(r) for r in self.risk))
        if any(len(t) != 3 for t in self.traits):
            raise ParamError("each trait is an (alpha, theta1, theta2) triple")
        if len(self.traits) * 2 != len(self.causal) or len(self.risk) != len(self.causal):
            raise ParamError("need two causal loci and two risk factors per trait")
        if len(set(self.causal)) != len(self.causal):
            raise ParamError("causal loci must be distinct")
        if any(not 0 <= c < self.n_snps for c in self.causal):
            raise ParamError("causal locus outside 0..n_snps-1")
        if any(v <= 0 for t in self.traits for v in t) or any(r <= 0 for r in self.risk):
            raise ParamError("trait parameters and risk factors must be positive")
        if self.n_cases < 1 or self.n_controls < 1:
            raise ParamError("need at least one case and one control")
        nf = self.feature_count
        if not len(self.causal) <= nf <= self.n_snps:
            raise ParamError(f"n_features must lie in [{len(self.causal)}, {self.n_snps}]")

    @property
    def feature_count(self) -> int:
        return self.n_snps if self.n_features is None else int(self.n_features)


def case_probability(genotypes: np.ndarray, p: SnpModelParams) -> np.ndarray:
    """Probability that at least one trait is positive, per individual."""
    g = np.asarray(genotypes, dtype=np.float64)
    p_none = np.ones(g.shape[0])
    for t, (alpha, th1, th2) in enumerate(p.traits):
        odds = alpha * th1 ** g[:, p.causal[2 * t]] * th2 ** g[:, p.causal[2 * t + 1]]
        p_none *= 1.0 - odds / (1.0 + odds)
    return 1.0 - p_none


def _draw_chunk(rng, maf, enriched_maf, size):
    half = size // 2
    g_plain = rng.binomial(2, maf, size=(size - half, maf.size))
    g_rich = rng.binomial(2, enriched_maf, size=(half, maf.size))
    return np.vstack([g_plain, g_rich]).astype(np.uint8)


def gen_snp(p: SnpModelParams, rng_seed=None) -> LabeledDataset:
    """Balanced case/control genotype matrix with interacting causal loci.

    Half of each generated chunk is drawn with risk-enriched allele
    frequencies at the causal loci; phenotypes come from the trait model for
    everyone. Chunks are drawn until both classes are large enough, then each
    class is undersampled at random to the requested size. Features are the
    causal loci plus the highest-variance loci, in original order.
    """
    rng = np.random.default_rng(rng_seed)
    maf = rng.uniform(0.1, 0.5, size=p.n_snps)
    enriched = maf.copy()
    idx = list(p.causal)
    enriched[idx] = np.clip(maf[idx] * np.asarray(p.risk), 0.0, 0.95)

    chunks, labels = [], []
    n_case = n_ctrl = total = 0
    while n_case < p.n_cases or n_ctrl < p.n_controls:
        if total >= p.max_pool:
            if n_case == 0:
                raise GenerationError(f"no cases among {total} generated individuals")
            raise GenerationError(
                f"only {n_case} cases and {n_ctrl} controls after {total} individuals"
            )
        g = _draw_chunk(rng, maf, enriched, p.pool_chunk)
        y = (rng.random(g.shape[0]) < case_probability(g, p)).astype(np.int64)
        chunks.append(g)
        labels.append(y)
        n_case += int(y.sum())
        n_ctrl += int(y.size - y.sum())
        total += y.size
    geno = np.vstack(chunks)
    y = np.concatenate(labels)

    keep = select_features(geno, p.causal, p.feature_count)
    geno = geno[:, keep]
    # all-zero rows cannot be amplitude-encoded
    nonzero = geno.any(axis=1)
    cases = np.flatnonzero((y == 1) & nonzero)
    ctrls = np.flatnonzero((y == 0) & nonzero)
    if cases.size < p.n_cases or ctrls.size < p.n_controls:
        raise GenerationError("not enough encodable individuals after feature selection")
    pick_ctrl = np.sort(rng.choice(ctrls, p.n_controls, replace=False))
    pick_case = np.sort(rng.choice(cases, p.n_cases, replace=False))
    order = np.concatenate([pick_ctrl, pick_case])
    causal_cols = [int(np.flatnonzero(keep == c)[0]) for c in p.causal]
    meta = {
        "generator": "snp",
        "params": _snp_meta(p),
        "seed": _seed_meta(rng_seed),
        "selected_snps": keep.tolist(),
        "causal_columns": causal_cols,
        "pool_size": int(total),
    }
    return LabeledDataset(GENOTYPE, geno[order].astype(np.uint8), y[order], meta)


def select_features(geno: np.ndarray, causal, n_features: int) -> np.ndarray:
    """Column indices: every causal locus plus the most variable others, sorted."""
    # column blocks keep the float copy small for large pools
    var = np.concatenate(
        [np.var(geno[:, j : j + 1024].astype(np.float64), axis=0) for j in range(0, geno.shape[1], 1024)]
    )
    causal = list(causal)
    others = np.setdiff1d(np.arange(geno.shape[1]), causal)
    # stable sort so equal variances keep index order
    ranked = others[np.argsort(-var[others], kind="stable")]
    chosen = np.concatenate([causal, ranked[: n_features - len(causal)]])
    return np.sort(chosen.astype(np.int64))


def _snp_meta(p: SnpModelParams) -> dict:
    d = asdict(p)
    d["traits"] = [list(t) for t in p.traits]
    d["causal"] = list(p.causal)
    d["risk"] = list(p.risk)
    return d


def _seed_meta(seed):
    return seed if seed is None or isinstance(seed, (int, np.integer)) else repr(seed)


# --- evaluation helpers -----------------------------------------------------


def class_means(ds: LabeledDataset) -> tuple[np.ndarray, np.ndarray]:
    """Global density matrix of each class."""
    counts = ds.counts()
    if counts[0] == 0 or counts[1] == 0:
        raise EvalError("both classes must be present")
    states = ds.quantum_states()
    means = []
    for y in (0, 1):
        s = states[ds.labels == y]
        if s.ndim == 2:
            means.append(np.einsum("ni,nj->ij", s, s.conj()) / s.shape[0])
        else:
            means.append(s.mean(axis=0))
    return means[0], means[1]


def class_global_fidelity(ds: LabeledDataset) -> float:
    rho0, rho1 = class_means(ds)
    n_qubits_for(rho0.shape[0])
    return fidelity(rho0, rho1)


def train_test_split(ds: LabeledDataset, test_fraction: float = 0.3, rng_seed=0):
    """Stratified split; each class contributes ``round(test_fraction * n_class)`` test points."""
    if not 0.0 < test_fraction < 1.0:
        raise ParamError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(rng_seed)
    train_idx, test_idx = [], []
    for y in (0, 1):
        members = np.flatnonzero(ds.labels == y)
        if members.size < 2:
            raise ParamError(f"class {y} has fewer than two members")
        perm = rng.permutation(members)
        n_test = min(max(1, int(round(test_fraction * members.size))), members.size - 1)
        test_idx.append(perm[:n_test])
        train_idx.append(perm[n_test:])
    return ds.subset(np.sort(np.concatenate(train_idx))), ds.subset(np.sort(np.concatenate(test_idx)))
