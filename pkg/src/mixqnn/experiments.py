"""Training and evaluation pipelines shared by the CLI and the protocol server."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .batching import global_states, smart_batches
from .classifier import TrainConfig, TrainedModel, auc, global_objective, instance_objective, train
from .datagen import LabeledDataset
from .errors import ParamError
from .privacy import RandomScheme, SmartScheme, audit_epsilon
from .qcore import n_qubits_for


def n_qubits_of(states: np.ndarray) -> int:
    return n_qubits_for(np.asarray(states).shape[-1])


def fit_global(globals_, cfg: TrainConfig, n_qubits: int) -> TrainedModel:
    """Train on global states in the given order."""
    qnn = cfg.qnn(n_qubits)
    objective = global_objective(qnn, globals_, cfg.loss)
    return train(objective, qnn.init_params(cfg.seed), cfg)


def fit_instance(states, labels, cfg: TrainConfig) -> TrainedModel:
    qnn = cfg.qnn(n_qubits_of(states))
    objective = instance_objective(qnn, states, labels, cfg.loss)
    return train(objective, qnn.init_params(cfg.seed), cfg)


def scores(cfg: TrainConfig, params, states) -> np.ndarray:
    """Raw per-individual outputs for amplitude vectors or densities."""
    states = np.asarray(states)
    qnn = cfg.qnn(n_qubits_of(states))
    return qnn.predict_pure(params, states) if states.ndim == 2 else qnn.predict(params, states)


@dataclass
class RunMetrics:
    mode: str
    train_auc: float
    test_auc: float
    train_loss: float
    eval_count: int
    n_calls: int
    epochs: int
    n_globals: int
    params: list
    history: list

    def to_dict(self) -> dict:
        return asdict(self)


def run_training(
    train_ds: LabeledDataset,
    test_ds: LabeledDataset,
    cfg: TrainConfig,
    mode: str = "global",
    n_batches: int = 1,
    batching: str = "random",
    batch_seed: int | None = None,
) -> RunMetrics:
    """Train in instance or global mode and score individuals of both splits."""
    tr_states = train_ds.quantum_states()
    if mode == "instance":
        model = fit_instance(tr_states, train_ds.labels, cfg)
        n_globals = 0
    elif mode == "global":
        seed = cfg.seed if batch_seed is None else batch_seed
        _, globs = global_states(tr_states, train_ds.labels, n_batches, batching, seed)
        model = fit_global(globs, cfg, n_qubits_of(tr_states))
        n_globals = len(globs)
    else:
        raise ParamError(f"unknown mode {mode!r}")
    return RunMetrics(
        mode=mode,
        train_auc=auc(scores(cfg, model.params, tr_states), train_ds.labels),
        test_auc=auc(scores(cfg, model.params, test_ds.quantum_states()), test_ds.labels),
        train_loss=model.loss,
        eval_count=model.eval_count,
        n_calls=model.n_calls,
        epochs=model.epochs,
        n_globals=n_globals,
        params=model.params.tolist(),
        history=list(model.history),
    )


def _smart_positions(states, n_class: int, batch_size: int, seed):
    n_batches = max(1, min(n_class, round(n_class / batch_size)))
    batches = smart_batches(states, n_batches, seed)
    return SmartScheme(tuple(b.member_indices for b in batches))


def epsilon_for(ds: LabeledDataset, batch_size: int, scheme: str, seed, delta=0.05, n_eval=10000):
    states = ds.quantum_states()
    if scheme == "random":
        factory = lambda y, pos: RandomScheme(batch_size)  # noqa: E731
    else:
        factory = lambda y, pos: _smart_positions(states[pos], pos.size, batch_size, seed + y)  # noqa: E731
    return audit_epsilon(states, ds.labels, factory, seed, delta, n_eval)
