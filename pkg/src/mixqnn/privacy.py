"""Privacy audits for global states.

Membership inference: an adversary holding a candidate state ``rho*``
measures the projection ``rho*`` on a global state. Outcome probabilities on
global states that exclude (``adjacent``) or include (``including``) the
candidate are collected, each fitted by a Gaussian, and the worst-case
log-likelihood ratio gives an empirical (epsilon, delta) pair.

Composition recovery: counts of non-negative integer vectors ``b`` with
``sum(b) = N_i`` whose weighted basis mixture equals a given global state,
both as a log-space estimate and by exhaustive enumeration.

Loss-update correlation: how well a global-state loss change tracks the
instance-level loss change under a nonlinear activation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .ansatz import random_circuit_unitary
from .classifier import LossKind, LossSpec, loss_terms
from .errors import AuditError, CorrelationError, DomainError, OracleTooLargeError
from .qcore import (
    Observable,
    amplitude_encode_many,
    overlap_matrix,
    pure_to_density_many,
    random_density_hs,
    seed_sequence,
)

ORACLE_GUARD = 10**7


# --- membership inference ---------------------------------------------------


@dataclass
class ProjectionSamples:
    adjacent: np.ndarray
    including: np.ndarray
    n_excluded: int = 0
    scheme: str = ""
    batch_size: int | None = None

    def __post_init__(self):
        self.adjacent = np.asarray(self.adjacent, dtype=np.float64)
        self.including = np.asarray(self.including, dtype=np.float64)

    def merged(self, other: "ProjectionSamples") -> "ProjectionSamples":
        return ProjectionSamples(
            np.concatenate([self.adjacent, other.adjacent]),
            np.concatenate([self.including, other.including]),
            self.n_excluded + other.n_excluded,
            self.scheme,
            self.batch_size,
        )


@dataclass(frozen=True)
class RandomScheme:
    """``floor(pop / batch_size)`` random batches of ``batch_size - 1`` others per candidate."""

    batch_size: int

    @property
    def name(self) -> str:
        return f"random(N_i={self.batch_size})"


@dataclass(frozen=True)
class SmartScheme:
    """Fixed batches given as position lists into the class population."""

    batches: tuple

    @property
    def name(self) -> str:
        return f"smart({len(self.batches)} batches)"


def _overlaps(states: np.ndarray, noise) -> tuple[np.ndarray, np.ndarray]:
    """``K[i, j] = Tr(E_i rho_j)`` and its diagonal, where ``E_i`` is the measurement for candidate ``i``."""
    k = overlap_matrix(states)
    if noise is not None:
        a, rho_noise = noise
        if not 0.0 <= a <= 1.0:
            raise AuditError("noise fraction must lie in [0, 1]")
        rho_noise = np.asarray(rho_noise)
        dens = pure_to_density_many(states) if states.ndim == 2 else states
        noise_row = overlap_matrix(rho_noise[None], dens)[0]
        k = (1.0 - a) * k + a * noise_row[None, :]
    return k, np.diagonal(k).copy()


def membership_projections(class_states, scheme, rng_seed=None, noise=None) -> ProjectionSamples:
    """Projection outcome samples for every candidate in one class.

    ``class_states`` holds amplitude vectors ``(N, d)`` or densities
    ``(N, d, d)``. ``noise=(a, rho_noise)`` replaces each projector by
    ``(1 - a) rho* + a rho_noise``.
    """
    states = np.asarray(class_states)
    n = states.shape[0]
    k, self_term = _overlaps(states, noise)

    if isinstance(scheme, RandomScheme):
        m = scheme.batch_size
        if m < 2:
            raise AuditError("batch size must be at least 2")
        if n < m:
            raise AuditError(f"population {n} is smaller than the batch size {m}")
        n_batches = n // m
        children = seed_sequence(rng_seed).spawn(n)
        adj, inc = [], []
        for i in range(n):
            others = np.delete(np.arange(n), i)
            perm = np.random.default_rng(children[i]).permutation(others)
            groups = perm[: n_batches * (m - 1)].reshape(n_batches, m - 1)
            sums = k[i, groups].sum(axis=1)
            adj.append(sums / (m - 1))
            inc.append((sums + self_term[i]) / m)
        return ProjectionSamples(np.concatenate(adj), np.concatenate(inc), 0, scheme.name, m)

    if isinstance(scheme, SmartScheme):
        adj, inc = [], []
        excluded = 0
        for batch in scheme.batches:
            members = np.asarray(batch, dtype=np.int64)
            if members.size == 0 or members.max() >= n or members.min() < 0:
                raise AuditError("batch refers to positions outside the population")
            if members.size == 1:
                excluded += 1
                continue
            for i in members:
                rest = members[members != i]
                s = k[i, rest].sum()
                adj.append(s / rest.size)
                inc.append((s + self_term[i]) / members.size)
        return ProjectionSamples(np.array(adj), np.array(inc), excluded, scheme.name, None)

    raise AuditError(f"unknown scheme {scheme!r}")


@dataclass
class PrivacyReport:
    mu1: float
    std1: float
    mu2: float
    std2: float
    delta: float
    epsilon: float
    n_excluded: int
    scheme: str
    n_adjacent: int
    n_including: int
    n_valid: int
    diagnostic: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        # JSON has no infinities
        for key in ("epsilon", "std1", "std2", "mu1", "mu2"):
            if not math.isfinite(d[key]):
                d[key] = str(d[key])
        return d


def normal_pdf(x, mu: float, std: float) -> np.ndarray:
    z = (np.asarray(x, dtype=np.float64) - mu) / std
    return np.exp(-0.5 * z * z) / (std * math.sqrt(2.0 * math.pi))


def epsilon_from_samples(s: ProjectionSamples, delta: float = 0.05, n_eval: int = 10000, rng_seed=None) -> PrivacyReport:
    """Worst-case ``ln((g2(p) - delta) / g1(p))`` over points drawn from ``g2``.

    ``g1`` and ``g2`` are moment-fitted normal densities of the adjacent and
    including samples. Points where ``g2 - delta <= 0`` or ``g1 == 0`` are
    skipped.
    """
    if not 0.0 < delta < 1.0:
        raise AuditError("delta must lie in (0, 1)")
    if s.adjacent.size < 10 or s.including.size < 10:
        raise AuditError(
            f"need at least 10 samples per side, got {s.adjacent.size} and {s.including.size}"
        )
    mu1, std1 = float(s.adjacent.mean()), float(s.adjacent.std())
    mu2, std2 = float(s.including.mean()), float(s.including.std())
    base = dict(
        mu1=mu1, std1=std1, mu2=mu2, std2=std2, delta=delta, n_excluded=s.n_excluded,
        scheme=s.scheme, n_adjacent=int(s.adjacent.size), n_including=int(s.including.size),
    )
    # a constant sample can still carry a rounding-level std, so test the range
    if np.ptp(s.adjacent) == 0.0 or np.ptp(s.including) == 0.0:
        base["std1" if np.ptp(s.adjacent) == 0.0 else "std2"] = 0.0
        return PrivacyReport(epsilon=math.inf, n_valid=0, diagnostic="degenerate fit: zero standard deviation", **base)
    rng = np.random.default_rng(rng_seed)
    p = rng.normal(mu2, std2, size=n_eval)
    g1 = normal_pdf(p, mu1, std1)
    num = normal_pdf(p, mu2, std2) - delta
    valid = (num > 0) & (g1 > 0)
    if not np.any(valid):
        return PrivacyReport(epsilon=-math.inf, n_valid=0, diagnostic="no point with g2 > delta and g1 > 0", **base)
    eps = float(np.max(np.log(num[valid] / g1[valid])))
    return PrivacyReport(epsilon=eps, n_valid=int(valid.sum()), **base)


def audit_epsilon(states, labels, scheme_factory, rng_seed=None, delta=0.05, n_eval=10000, noise=None):
    """Pool projection samples over both classes and compute epsilon.

    ``scheme_factory(label, class_positions)`` returns the scheme for a class.
    """
    states = np.asarray(states)
    labels = np.asarray(labels)
    seeds = seed_sequence(rng_seed).spawn(3)
    pooled = None
    for y, child in zip((0, 1), seeds[:2]):
        pos = np.flatnonzero(labels == y)
        samples = membership_projections(states[pos], scheme_factory(y, pos), child, noise)
        pooled = samples if pooled is None else pooled.merged(samples)
    report = epsilon_from_samples(pooled, delta, n_eval, seeds[2])
    return report, pooled


# --- composition recovery ---------------------------------------------------


def _xlnx(x: float) -> float:
    return 0.0 if x == 0 else x * math.log(x)


@dataclass(frozen=True)
class CompositionEstimate:
    n_state: int
    d: int
    batch_size: int
    ln_B_all: float
    ln_B: float
    entropy_proxy: float
    ln_B_all_stirling: float
    ln_B_stirling: float

    def to_dict(self) -> dict:
        return asdict(self)


def composition_count_estimate(N_i: int, N_state: int, d: int) -> CompositionEstimate:
    """Log count of compositions, then scaled by the free fraction ``(N_state - d) / N_state``.

    ``ln_B_all`` is the exact ``ln C(N_i + N_state - 1, N_state - 1)``; the
    ``*_stirling`` fields use the leading-order form
    ``ln[(N_i+N_state-1)^(N_i+N_state-1) / ((N_state-1)^(N_state-1) N_i^N_i)]``.
    """
    if not (isinstance(N_i, (int, np.integer)) and isinstance(N_state, (int, np.integer))):
        raise DomainError("N_i and N_state must be integers")
    if N_i < 1 or d < 1 or N_state <= d:
        raise DomainError(f"need N_i >= 1 and N_state > d >= 1, got N_i={N_i}, N_state={N_state}, d={d}")
    ln_all = math.lgamma(N_i + N_state) - math.lgamma(N_state) - math.lgamma(N_i + 1)
    ln_all_st = _xlnx(N_i + N_state - 1) - _xlnx(N_state - 1) - _xlnx(N_i)
    frac = (N_state - d) / N_state
    return CompositionEstimate(
        n_state=int(N_state), d=int(d), batch_size=int(N_i),
        ln_B_all=ln_all, ln_B=ln_all * frac, entropy_proxy=ln_all * frac,
        ln_B_all_stirling=ln_all_st, ln_B_stirling=ln_all_st * frac,
    )


def snp_basis(alphabet: int, n_snp: int) -> tuple[np.ndarray, np.ndarray]:
    """Every genotype vector over ``{0..alphabet-1}^n_snp`` except the zero vector.

    Returns the integer vectors (lexicographic order) and their
    amplitude-encoded densities. The zero vector has no encoding.
    """
    if alphabet < 2 or n_snp < 1:
        raise DomainError("need alphabet >= 2 and n_snp >= 1")
    vecs = np.array(list(itertools.product(range(alphabet), repeat=n_snp))[1:], dtype=np.int64)
    n_qubits = max(1, math.ceil(math.log2(n_snp)))
    return vecs, pure_to_density_many(amplitude_encode_many(vecs, n_qubits))


def span_dimension(densities, tol: float = 1e-10) -> int:
    """Real dimension of the linear span of a set of Hermitian matrices."""
    dens = np.asarray(densities)
    flat = dens.reshape(dens.shape[0], -1)
    mat = np.hstack([flat.real, flat.imag])
    sv = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(sv > tol * max(1.0, sv[0])))


def composition_count_exact(basis, N_i: int, rho_glob, tol: float = 1e-9, guard: int = ORACLE_GUARD) -> int:
    """Number of ``b`` with ``sum(b) = N_i`` and ``max|sum_j (b_j / N_i) rho_j - rho_glob| <= tol``."""
    basis = np.asarray(basis)
    n_state = basis.shape[0]
    if N_i < 1:
        raise DomainError("N_i must be positive")
    candidates = math.comb(N_i + n_state - 1, N_i)
    if candidates > guard:
        raise OracleTooLargeError(f"{candidates} candidate compositions exceed the guard of {guard}")
    flat = basis.reshape(n_state, -1)
    target = np.asarray(rho_glob).ravel()
    combos = itertools.combinations_with_replacement(range(n_state), N_i)
    count = 0
    while True:
        chunk = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, 65536)), dtype=np.int64
        ).reshape(-1, N_i)
        if chunk.size == 0:
            return count
        mixed = flat[chunk].sum(axis=1) / N_i
        count += int(np.count_nonzero(np.max(np.abs(mixed - target), axis=1) <= tol))


def composition_from_counts(basis, b) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    return np.tensordot(b / b.sum(), np.asarray(basis), axes=1)


def snp_composition_estimate(alphabet: int, n_snp: int, N_i: int) -> CompositionEstimate:
    """Estimate for genotype bases: ``d = n_snp`` and ``N_state = alphabet**n_snp``."""
    return composition_count_estimate(N_i, alphabet**n_snp, n_snp)


@dataclass(frozen=True)
class OracleComparison:
    alphabet: int
    n_snp: int
    batch_size: int
    estimate: float
    compositions: tuple
    exact: tuple

    @property
    def max_factor(self) -> float:
        return max(max(self.estimate / e, e / self.estimate) for e in self.exact)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["compositions"] = [list(b) for b in self.compositions]
        out["max_factor"] = self.max_factor
        return out


def compare_with_oracle(alphabet: int, n_snp: int, N_i: int, instances: int = 5, rng_seed=None) -> OracleComparison:
    """Exact counts on random batches drawn from the encodable genotypes, next to the estimate."""
    if instances < 1:
        raise DomainError("need at least one instance")
    vecs, dens = snp_basis(alphabet, n_snp)
    est = math.exp(snp_composition_estimate(alphabet, n_snp, N_i).ln_B)
    rng = np.random.default_rng(seed_sequence(rng_seed))
    comps, exact = [], []
    for _ in range(instances):
        b = np.bincount(rng.integers(len(vecs), size=N_i), minlength=len(vecs))
        comps.append(tuple(int(v) for v in b))
        exact.append(composition_count_exact(dens, N_i, composition_from_counts(dens, b)))
    return OracleComparison(alphabet, n_snp, N_i, est, tuple(comps), tuple(exact))


# --- loss-update correlation ------------------------------------------------


@dataclass(frozen=True)
class CorrelationResult:
    pcc: float
    sign_pcc: float
    sign_agreement: float
    n_trials: int
    batch_size: int

    def to_dict(self) -> dict:
        return asdict(self)


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc, yc = x - x.mean(), y - y.mean()
    sxx, syy = float(xc @ xc), float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        raise CorrelationError("zero variance", diagnostics={"var_x": sxx / x.size, "var_y": syy / y.size})
    return float(xc @ yc) / math.sqrt(sxx * syy)


def loss_update_correlation(
    batch_size: int,
    n_trials: int,
    spec: LossSpec,
    n_qubits: int = 3,
    depth: int = 10,
    rng_seed=None,
) -> CorrelationResult:
    """Correlation between instance-level and global loss changes under a random update.

    Each trial draws ``batch_size`` Hilbert-Schmidt states and two random
    circuits. Every state is labelled 0, which makes the sigmoid loss
    ``sig(k p)`` and the squared loss ``(p + 1)**2``. The instance delta is the
    change of the mean per-state loss; the global delta is the change of the
    loss on the batch mixture.
    """
    if batch_size < 1 or n_trials < 2:
        raise CorrelationError("need batch_size >= 1 and at least two trials", diagnostics={})
    dim = 2**n_qubits
    z = Observable(n_qubits).diagonal()
    labels = np.zeros(batch_size)
    rng = np.random.default_rng(rng_seed)
    d_inst = np.empty(n_trials)
    d_glob = np.empty(n_trials)
    for t in range(n_trials):
        rhos = np.stack([random_density_hs(dim, rng) for _ in range(batch_size)])
        # the mixture rides along as the last entry so both paths share one contraction
        stack = np.concatenate([rhos, (rhos.sum(axis=0) / batch_size)[None]])
        losses_inst, losses_glob = [], []
        for _ in range(2):
            u = random_circuit_unitary(n_qubits, depth, rng)
            m = u.conj().T @ (z[:, None] * u)
            p = np.einsum("ij,bji->b", m, stack).real
            losses_inst.append(loss_terms(p[:-1], labels, spec).mean())
            losses_glob.append(float(loss_terms(p[-1], 0.0, spec)))
        d_inst[t] = losses_inst[1] - losses_inst[0]
        d_glob[t] = losses_glob[1] - losses_glob[0]
    pcc = pearson(d_inst, d_glob)
    s_inst, s_glob = np.sign(d_inst), np.sign(d_glob)
    sign_pcc = pearson(s_inst, s_glob)
    agree = float(np.mean(s_inst == s_glob))
    return CorrelationResult(pcc, sign_pcc, agree, n_trials, batch_size)


LINEAR_LOSS = LossSpec(LossKind.L1_RESCALED)
