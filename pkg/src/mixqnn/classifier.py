"""Variational classifier: readout, losses, training loop and AUC.

The model output for a state ``rho`` is ``Tr(Z U(theta) rho U(theta)^dagger)``.
It is evaluated in the Heisenberg picture as ``Tr(M rho)`` with
``M = U^dagger Z U``, so one circuit build serves a whole stack of states.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .ansatz import build_real_amplitudes, n_params
from .errors import EmptyDatasetError, EvalError, OptimizationError, ParamError
from .optim import OPTIMIZERS
from .qcore import DimensionError, Observable, n_qubits_for


class LossKind(str, enum.Enum):
    L1_RESCALED = "l1-rescaled"
    L1_SIGMOID = "l1-sigmoid"
    L2 = "l2"


@dataclass(frozen=True)
class LossSpec:
    kind: LossKind = LossKind.L1_RESCALED
    sigmoid_k: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if not self.sigmoid_k > 0:
            raise ParamError("sigmoid temperature must be positive")


def sigmoid(x, k: float = 10.0):
    return 1.0 / (1.0 + np.exp(-k * np.asarray(x, dtype=np.float64)))


def loss_terms(p, y, spec: LossSpec) -> np.ndarray:
    """Per-point loss for raw outputs ``p`` in [-1, 1] and labels ``y`` in {0, 1}.

    The L2 loss compares raw outputs with targets in {-1, +1}; label 0 maps to -1.
    """
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if spec.kind is LossKind.L1_RESCALED:
        return np.abs((p + 1.0) / 2.0 - y)
    if spec.kind is LossKind.L1_SIGMOID:
        return np.abs(sigmoid(p, spec.sigmoid_k) - y)
    return (p - (2.0 * y - 1.0)) ** 2


@dataclass(frozen=True)
class QNN:
    """RealAmplitudes circuit followed by a Pauli-Z readout."""

    n_qubits: int
    reps: int
    observable: Observable | None = None

    def __post_init__(self):
        if self.observable is None:
            object.__setattr__(self, "observable", Observable(self.n_qubits))
        if self.observable.n_qubits != self.n_qubits:
            raise DimensionError("observable and circuit act on different registers")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def n_params(self) -> int:
        return n_params(self.n_qubits, self.reps)

    def unitary(self, theta) -> np.ndarray:
        return build_real_amplitudes(self.n_qubits, self.reps, theta)

    def readout_operator(self, theta) -> np.ndarray:
        """``U^dagger Z U``; real symmetric because the ansatz is real."""
        u = self.unitary(theta)
        return u.T @ (self.observable.diagonal()[:, None] * u)

    def predict(self, theta, states):
        """Raw output for one density matrix ``(d, d)`` or a stack ``(B, d, d)``."""
        return predict_densities(self.readout_operator(theta), states)

    def predict_pure(self, theta, psis):
        """Raw output for one amplitude vector ``(d,)`` or a stack ``(B, d)``.

        Equal to :meth:`predict` on the corresponding rank-1 densities.
        """
        return predict_pure(self.readout_operator(theta), psis)

    def init_params(self, seed) -> np.ndarray:
        return init_params(self.n_params, seed)


def predict_densities(m: np.ndarray, rho):
    rho = np.asarray(rho)
    d = m.shape[0]
    if rho.shape[-2:] != (d, d):
        raise DimensionError(f"state of shape {rho.shape} vs circuit dimension {d}")
    # Tr(M rho) = sum_ij M_ij rho_ji and M is symmetric
    if rho.ndim == 2:
        return float(np.dot(m.ravel(), rho.ravel()).real)
    if rho.ndim == 3:
        return (rho.reshape(rho.shape[0], -1) @ m.ravel()).real
    raise DimensionError(f"cannot interpret array of shape {rho.shape} as density matrices")


def predict_pure(m: np.ndarray, psis):
    psis = np.asarray(psis)
    if psis.shape[-1] != m.shape[0]:
        raise DimensionError(f"state dimension {psis.shape[-1]} vs circuit dimension {m.shape[0]}")
    if psis.ndim == 1:
        return float(np.vdot(psis, m @ psis).real)
    if psis.ndim == 2:
        return np.einsum("bi,bi->b", psis.conj(), psis @ m.T).real
    raise DimensionError(f"cannot interpret array of shape {psis.shape} as amplitude vectors")


def predict_raw(params, rho, obs: Observable | None = None, reps: int = 1) -> float:
    rho = np.asarray(rho)
    n = n_qubits_for(rho.shape[-1])
    return QNN(n, reps, obs).predict(params, rho)


def init_params(count: int, seed) -> np.ndarray:
    """Angles uniform on (-pi, pi]."""
    rng = np.random.default_rng(seed)
    return np.pi - 2.0 * np.pi * rng.random(count)


# --- objectives -------------------------------------------------------------


class Objective:
    """Callable loss over ``theta`` that counts circuit executions.

    One call evaluates the circuit once per state in ``states``, which is a
    stack of density matrices ``(B, d, d)`` or of amplitude vectors ``(B, d)``.
    """

    def __init__(self, qnn: QNN, states, labels, spec: LossSpec, weights=None):
        self.qnn = qnn
        self.states = np.asarray(states)
        self.labels = np.asarray(labels, dtype=np.float64)
        if self.labels.size == 0:
            raise EmptyDatasetError("objective over an empty set of states")
        if self.states.ndim not in (2, 3):
            raise DimensionError(f"expected a stack of states, got shape {self.states.shape}")
        if self.states.shape[0] != self.labels.size:
            raise DimensionError(f"{self.states.shape[0]} states vs {self.labels.size} labels")
        self.spec = spec
        self.weights = None if weights is None else np.asarray(weights, dtype=np.float64)
        self.n_calls = 0

    @property
    def circuits_per_call(self) -> int:
        return int(self.labels.size)

    @property
    def n_circuits(self) -> int:
        return self.n_calls * self.circuits_per_call

    def __call__(self, theta) -> float:
        self.n_calls += 1
        if self.states.ndim == 2:
            p = self.qnn.predict_pure(theta, self.states)
        else:
            p = self.qnn.predict(theta, self.states)
        terms = loss_terms(p, self.labels, self.spec)
        if self.weights is None:
            return float(terms.mean())
        return float(np.dot(self.weights, terms) / self.weights.sum())


def instance_objective(qnn: QNN, states, labels, spec: LossSpec) -> Objective:
    return Objective(qnn, states, labels, spec)


def global_objective(qnn: QNN, globals_, spec: LossSpec, weights=None) -> Objective:
    """Loss over global states, weighted by ``GlobalState.weight`` unless given."""
    globals_ = list(globals_)
    if not globals_:
        raise EmptyDatasetError("no global states")
    states = np.stack([g.state for g in globals_])
    labels = [g.label for g in globals_]
    if weights is None:
        weights = [g.weight for g in globals_]
    return Objective(qnn, states, labels, spec, weights)


def loss_instance(qnn: QNN, states, labels, params, spec: LossSpec) -> float:
    return instance_objective(qnn, states, labels, spec)(params)


def loss_global(qnn: QNN, globals_, params, spec: LossSpec, weights=None) -> float:
    return global_objective(qnn, globals_, spec, weights)(params)


# --- training ---------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    reps: int = 1
    maxiter_per_epoch: int = 200
    max_epochs: int = 50
    patience: int = 10
    seed: int = 1
    loss: LossSpec = field(default_factory=LossSpec)
    observable_qubit: int | None = None
    parity: bool = False
    optimizer: str = "cobyla"
    rhobeg: float = 1.0
    rhoend: float = 1e-4
    min_improvement: float = 1e-9

    def __post_init__(self):
        for name in ("reps", "maxiter_per_epoch", "max_epochs", "patience"):
            if getattr(self, name) < 1:
                raise ParamError(f"{name} must be positive")
        if self.optimizer not in OPTIMIZERS:
            raise ParamError(f"unknown optimizer {self.optimizer!r}; choose from {sorted(OPTIMIZERS)}")

    def qnn(self, n_qubits: int) -> QNN:
        obs = Observable(n_qubits, self.observable_qubit, self.parity)
        return QNN(n_qubits, self.reps, obs)


@dataclass
class TrainedModel:
    params: np.ndarray
    loss: float
    history: list[float]
    eval_count: int
    n_calls: int
    epochs: int


def train(objective, init, cfg: TrainConfig) -> TrainedModel:
    """Epoch-wise derivative-free minimisation with early stopping.

    Each epoch is one optimiser run of at most ``cfg.maxiter_per_epoch``
    evaluations, warm-started from the best point so far. Training stops once
    the best loss has not improved by ``cfg.min_improvement`` for
    ``cfg.patience`` consecutive epochs.
    """
    minimise = OPTIMIZERS[cfg.optimizer]
    per_call = getattr(objective, "circuits_per_call", 1)
    calls = 0

    def checked(theta):
        nonlocal calls
        calls += 1
        val = objective(theta)
        if not math.isfinite(val):
            raise OptimizationError(f"objective returned {val}", params=np.array(theta, copy=True))
        return val

    best_x = np.array(init, dtype=np.float64)
    best_f = math.inf
    history = []
    stale = 0
    epochs = 0
    for _ in range(cfg.max_epochs):
        epochs += 1
        if cfg.optimizer == "cobyla":
            res = minimise(checked, best_x, maxfev=cfg.maxiter_per_epoch, rhobeg=cfg.rhobeg, rhoend=cfg.rhoend)
        else:
            res = minimise(checked, best_x, maxfev=cfg.maxiter_per_epoch, step=cfg.rhobeg)
        if res.fun < best_f - cfg.min_improvement:
            stale = 0
        else:
            stale += 1
        if res.fun < best_f:
            best_x, best_f = res.x, res.fun
        history.append(best_f)
        if stale >= cfg.patience:
            break
    return TrainedModel(
        params=best_x,
        loss=best_f,
        history=history,
        eval_count=calls * per_call,
        n_calls=calls,
        epochs=epochs,
    )


# --- evaluation -------------------------------------------------------------


def auc(scores, labels) -> float:
    """Probability that a positive outscores a negative, ties counting one half."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.size != labels.size:
        raise DimensionError(f"{scores.size} scores vs {labels.size} labels")
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise EvalError("AUC needs both classes")
    if pos.size + neg.size != labels.size:
        raise EvalError("labels must be 0 or 1")
    wins = 0.0
    ties = 0.0
    # chunk the pairwise comparison to bound memory
    for start in range(0, pos.size, 1024):
        block = pos[start : start + 1024, None]
        wins += np.count_nonzero(block > neg[None, :])
        ties += np.count_nonzero(block == neg[None, :])
    return float((wins + 0.5 * ties) / (pos.size * neg.size))
