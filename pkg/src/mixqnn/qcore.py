"""Density-matrix primitives.

States are plain numpy arrays: a pure state is a complex vector of length
``2**n`` and a density matrix a ``(2**n, 2**n)`` complex array. Stacks of
states carry a leading batch axis.

Basis index ``b`` is read as the bitstring ``q0 q1 ... q(n-1)`` with ``q0`` the
most significant bit, so ``|01>`` is index 1 and qubit ``n-1`` is the one that
distinguishes ``|00>`` from ``|01>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, EncodingError, StateError, WeightError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
FIDELITY_PSD_TOL = 1e-6
NORM_TOL = 1e-12


def n_qubits_for(dim: int) -> int:
    if dim < 1 or dim & (dim - 1):
        raise DimensionError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().swapaxes(-1, -2))


def amplitude_encode(x, n_qubits: int) -> np.ndarray:
    """Zero-pad ``x`` to ``2**n_qubits`` entries and normalise it."""
    x = np.asarray(x, dtype=np.float64).ravel()
    dim = 2**n_qubits
    if x.size > dim:
        raise DimensionError(f"{x.size} features do not fit into {n_qubits} qubits")
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise EncodingError("cannot amplitude-encode the zero vector")
    psi = np.zeros(dim, dtype=np.complex128)
    psi[: x.size] = x / norm
    return psi


def amplitude_encode_many(rows, n_qubits: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise DimensionError("expected a 2-d array of feature rows")
    dim = 2**n_qubits
    if rows.shape[1] > dim:
        raise DimensionError(f"{rows.shape[1]} features do not fit into {n_qubits} qubits")
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0.0):
        raise EncodingError(f"row {int(np.argmin(norms))} is the zero vector")
    out = np.zeros((rows.shape[0], dim), dtype=np.complex128)
    out[:, : rows.shape[1]] = rows / norms[:, None]
    return out


def check_pure(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim != 1:
        raise DimensionError("a pure state is a 1-d amplitude vector")
    n_qubits_for(psi.size)
    if abs(np.vdot(psi, psi).real - 1.0) > NORM_TOL:
        raise StateError("amplitude vector is not normalised")
    return psi


def pure_to_density(psi) -> np.ndarray:
    psi = check_pure(psi)
    return np.outer(psi, psi.conj())


def pure_to_density_many(psis) -> np.ndarray:
    psis = np.asarray(psis, dtype=np.complex128)
    return psis[:, :, None] * psis[:, None, :].conj()


def check_density(
    rho,
    herm_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
    psd_tol: float = PSD_TOL,
) -> np.ndarray:
    """Return ``rho`` as a complex array, raising StateError if it is not a state."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {rho.shape}")
    n_qubits_for(rho.shape[0])
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise StateError("matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise StateError(f"trace {np.trace(rho).real:.12g} != 1")
    if np.linalg.eigvalsh(hermitian_part(rho))[0] < -psd_tol:
        raise StateError("matrix has a negative eigenvalue")
    return rho


def is_pure(rho, tol: float = 1e-9) -> bool:
    rho = np.asarray(rho)
    return abs(np.vdot(rho, rho).real - 1.0) <= tol


def _stack(states) -> np.ndarray:
    if isinstance(states, np.ndarray):
        arr = states.astype(np.complex128, copy=False)
    else:
        states = list(states)
        if not states:
            raise DimensionError("no states given")
        shapes = {np.shape(s) for s in states}
        if len(shapes) != 1:
            raise DimensionError(f"mismatched state shapes {sorted(shapes)}")
        arr = np.asarray(states, dtype=np.complex128)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise DimensionError(f"expected a stack of square matrices, got shape {arr.shape}")
    return arr


def mix(states, weights) -> np.ndarray:
    """Convex combination ``sum_u w_u rho_u``."""
    stack = _stack(states)
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size != stack.shape[0]:
        raise DimensionError(f"{w.size} weights for {stack.shape[0]} states")
    if np.any(w < 0):
        raise WeightError("negative mixing weight")
    if abs(w.sum() - 1.0) > NORM_TOL:
        raise WeightError(f"weights sum to {w.sum():.15g}, not 1")
    return np.tensordot(w, stack, axes=1)


def uniform_mix(states) -> np.ndarray:
    stack = _stack(states)
    return stack.sum(axis=0) / stack.shape[0]


def _sqrtm_psd(rho: np.ndarray, what: str) -> np.ndarray:
    w, v = np.linalg.eigh(hermitian_part(rho))
    if w[0] < -FIDELITY_PSD_TOL:
        raise StateError(f"{what} has eigenvalue {w[0]:.3g} < 0")
    return (v * np.sqrt(_floor(w))) @ v.conj().T


def _floor(w: np.ndarray) -> np.ndarray:
    # eigenvalues at rounding level carry no signal but their square roots
    # (~1e-8) would swamp the result
    cut = 16 * np.finfo(float).eps * w.size * max(abs(w[-1]), 1.0)
    return np.where(w > cut, w, 0.0)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    rho = np.asarray(rho, dtype=np.complex128)
    sigma = np.asarray(sigma, dtype=np.complex128)
    if rho.shape != sigma.shape or rho.ndim != 2:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    if np.linalg.eigvalsh(hermitian_part(sigma))[0] < -FIDELITY_PSD_TOL:
        raise StateError("second argument is not positive semidefinite")
    root = _sqrtm_psd(rho, "first argument")
    inner = np.linalg.eigvalsh(hermitian_part(root @ sigma @ root))
    f = np.sqrt(_floor(inner)).sum() ** 2
    return float(min(max(f, 0.0), 1.0))


def overlap_matrix(states, others=None) -> np.ndarray:
    """Pairwise ``Tr(rho_i sigma_j)``.

    Accepts stacks of pure amplitude vectors ``(N, d)`` or density matrices
    ``(N, d, d)``. For pure inputs this is ``|<psi_i|phi_j>|**2``.
    """
    a = np.asarray(states)
    b = a if others is None else np.asarray(others)
    if a.ndim != b.ndim or a.shape[1:] != b.shape[1:]:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.ndim == 2:
        g = a.conj() @ b.T
        return np.abs(g) ** 2
    if a.ndim == 3:
        # Tr(A B) = sum_ij A_ij B_ji = <vec(A^dagger), vec(B)> for Hermitian A
        va = a.reshape(a.shape[0], -1)
        vb = b.reshape(b.shape[0], -1)
        return (va @ vb.conj().T).real
    raise DimensionError(f"cannot interpret array of shape {a.shape} as states")


def fidelity_matrix(states) -> np.ndarray:
    """Symmetric matrix of pairwise Uhlmann fidelities.

    When every state is pure the fidelity reduces to ``Tr(rho sigma)``, which is
    used directly instead of an eigendecomposition per pair.
    """
    stack = np.asarray(states)
    if stack.ndim == 2:
        return overlap_matrix(stack)
    stack = _stack(stack)
    n = stack.shape[0]
    purity = np.einsum("nij,nji->n", stack, stack).real
    if np.all(np.abs(purity - 1.0) <= 1e-9):
        return overlap_matrix(stack)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = fidelity(stack[i], stack[j])
    return out


def seed_sequence(seed) -> np.random.SeedSequence:
    """Normalise ``None``, an integer, a SeedSequence or a Generator to a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(int(seed.integers(2**63)))
    return np.random.SeedSequence(None if seed is None else int(seed))


def random_density_hs(dim: int, rng_seed=None) -> np.ndarray:
    """Sample from the Hilbert-Schmidt ensemble: ``G G^dagger / Tr(G G^dagger)``."""
    if dim < 2:
        raise DimensionError("dimension must be at least 2")
    rng = np.random.default_rng(rng_seed)
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(dim: int, rng_seed=None) -> np.ndarray:
    rng = np.random.default_rng(rng_seed)
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class Observable:
    """Pauli-Z readout.

    ``qubit_index=None`` means the last qubit. With ``parity=True`` the
    observable is ``Z`` on every qubit instead.
    """

    n_qubits: int
    qubit_index: int | None = None
    parity: bool = False

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DimensionError("observable needs at least one qubit")
        q = self.qubit
        if not 0 <= q < self.n_qubits:
            raise DimensionError(f"qubit {q} outside 0..{self.n_qubits - 1}")

    @property
    def qubit(self) -> int:
        return self.n_qubits - 1 if self.qubit_index is None else self.qubit_index

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def diagonal(self) -> np.ndarray:
        idx = np.arange(self.dim)
        if self.parity:
            bits = np.array([bin(b).count("1") for b in idx])
        else:
            bits = (idx >> (self.n_qubits - 1 - self.qubit)) & 1
        return 1.0 - 2.0 * (bits & 1)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal())


def pauli_z_expectation(rho, obs: Observable) -> float:
    rho = np.asarray(rho)
    if rho.shape != (obs.dim, obs.dim):
        raise DimensionError(f"state of shape {rho.shape} vs observable dim {obs.dim}")
    value = np.dot(obs.diagonal(), np.diagonal(rho))
    if abs(value.imag) > 1e-10:
        raise StateError(f"expectation has imaginary part {value.imag:.3g}")
    return float(value.real)


def projection_overlap(rho_star, rho) -> float:
    """``Tr(rho_star rho)``: outcome probability of projecting onto ``rho_star``."""
    a = np.asarray(rho_star)
    b = np.asarray(rho)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.vdot(a.conj().T, b).real)


def eigen_ensemble(rho, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition as an ensemble ``(probabilities, pure states)``."""
    w, v = np.linalg.eigh(hermitian_part(np.asarray(rho)))
    keep = w > tol
    return w[keep], v[:, keep].T


def ensemble_density(probabilities: Sequence[float], psis) -> np.ndarray:
    psis = np.asarray(psis, dtype=np.complex128)
    return mix(pure_to_density_many(psis), probabilities)
