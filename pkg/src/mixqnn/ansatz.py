"""RealAmplitudes circuits and random circuits as explicit unitaries.

Layout of the RealAmplitudes parameter vector: ``reps + 1`` rotation layers of
``n_qubits`` Ry angles each; angle ``k * n_qubits + q`` rotates qubit ``q`` in
layer ``k``. Block ``k`` (1-based) is "rotation layer ``k-1`` then entangler
``k``", followed by a final rotation layer.

Entangler ``k`` uses the sca ("shifted circular alternating") schedule: the
circular pairs ``[(i, (i+1) % n) for i in range(n)]`` rotated left by ``k-1``
positions, with control and target swapped on even ``k``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DimensionError, ParamError
from .qcore import n_qubits_for


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


FIXED_GATES = {
    "h": np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2),
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.diag([1, -1]).astype(np.complex128),
    "s": np.diag([1, 1j]),
    "t": np.diag([1, np.exp(0.25j * np.pi)]),
}
ROTATION_GATES = {"rx": rx, "ry": ry, "rz": rz}
GATE_SET = (*FIXED_GATES, *ROTATION_GATES, "cnot")


def n_params(n_qubits: int, reps: int) -> int:
    return (reps + 1) * n_qubits


@lru_cache(maxsize=None)
def cnot_permutation(n_qubits: int, control: int, target: int) -> np.ndarray:
    """Index map ``f`` with ``CNOT |b> = |f(b)>``; ``f`` is an involution."""
    if control == target or not (0 <= control < n_qubits and 0 <= target < n_qubits):
        raise DimensionError(f"invalid CNOT({control}, {target}) on {n_qubits} qubits")
    idx = np.arange(2**n_qubits)
    cbit = (idx >> (n_qubits - 1 - control)) & 1
    return idx ^ (cbit << (n_qubits - 1 - target))


def cnot_matrix(n_qubits: int, control: int, target: int) -> np.ndarray:
    perm = cnot_permutation(n_qubits, control, target)
    m = np.zeros((perm.size, perm.size))
    m[perm, np.arange(perm.size)] = 1.0
    return m


def sca_pairs(n_qubits: int, block: int) -> list[tuple[int, int]]:
    """CNOT (control, target) pairs of entangler ``block`` (1-based)."""
    if n_qubits < 2:
        return []
    pairs = [(i, (i + 1) % n_qubits) for i in range(n_qubits)]
    shift = (block - 1) % n_qubits
    pairs = pairs[shift:] + pairs[:shift]
    if block % 2 == 0:
        pairs = [(t, c) for c, t in pairs]
    return pairs


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, m)
    return out


def rotation_layer(thetas) -> np.ndarray:
    return kron_all(ry(t) for t in thetas)


def _check_params(n_qubits: int, reps: int, params) -> np.ndarray:
    theta = np.asarray(params, dtype=np.float64).ravel()
    if n_qubits < 1 or reps < 1:
        raise ParamError("need n_qubits >= 1 and reps >= 1")
    if theta.size != n_params(n_qubits, reps):
        raise ParamError(
            f"expected {n_params(n_qubits, reps)} angles for n={n_qubits}, reps={reps}, "
            f"got {theta.size}"
        )
    if not np.all(np.isfinite(theta)):
        raise ParamError("non-finite angle")
    return theta


def build_real_amplitudes(n_qubits: int, reps: int, params) -> np.ndarray:
    """Unitary of the RealAmplitudes circuit; real orthogonal, float64."""
    theta = _check_params(n_qubits, reps, params).reshape(reps + 1, n_qubits)
    u = rotation_layer(theta[0])
    for k in range(1, reps + 1):
        for c, t in sca_pairs(n_qubits, k):
            u = u[cnot_permutation(n_qubits, c, t)]
        u = rotation_layer(theta[k]) @ u
    return u


def apply_unitary(u, rho) -> np.ndarray:
    u = np.asarray(u)
    rho = np.asarray(rho)
    if u.shape[-1] != rho.shape[-1] or u.shape[0] != u.shape[1]:
        raise DimensionError(f"unitary {u.shape} vs state {rho.shape}")
    return u @ rho @ u.conj().T


def embed_single(gate: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    return kron_all(gate if q == qubit else np.eye(2) for q in range(n_qubits))


def random_circuit_unitary(n_qubits: int, depth: int, rng_seed=None) -> np.ndarray:
    """Product of ``depth`` random layers.

    Within a layer each still-free qubit draws a gate uniformly from
    ``GATE_SET``; a CNOT takes a uniformly chosen free partner as target (and is
    redrawn when no partner is free). Rotation angles are uniform on (-pi, pi].
    """
    if depth < 1:
        raise ParamError("depth must be at least 1")
    n_qubits_for(2**n_qubits)
    rng = np.random.default_rng(rng_seed)
    dim = 2**n_qubits
    u = np.eye(dim, dtype=np.complex128)
    names = GATE_SET if n_qubits > 1 else GATE_SET[:-1]
    for _ in range(depth):
        free = list(range(n_qubits))
        while free:
            q = free.pop(0)
            name = names[rng.integers(len(names))]
            while name == "cnot" and not free:
                name = names[rng.integers(len(names) - 1)]
            if name == "cnot":
                target = free.pop(int(rng.integers(len(free))))
                u = u[cnot_permutation(n_qubits, q, target)]
                continue
            if name in ROTATION_GATES:
                gate = ROTATION_GATES[name](np.pi - 2 * np.pi * rng.random())
            else:
                gate = FIXED_GATES[name]
            u = embed_single(gate, q, n_qubits) @ u
    return u
