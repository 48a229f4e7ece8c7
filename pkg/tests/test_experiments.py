import numpy as np
import pytest

from mixqnn.classifier import TrainConfig, global_objective, instance_objective
from mixqnn.batching import global_states
from mixqnn.datagen import ToyParams, gen_toy_pure, train_test_split
from mixqnn.errors import ParamError
from mixqnn.experiments import epsilon_for, fit_global, fit_instance, run_training, scores

FAST = TrainConfig(maxiter_per_epoch=40, max_epochs=3, patience=1, seed=2)


@pytest.fixture(scope="module")
def toy325():
    return gen_toy_pure(ToyParams(0.4, 4.0, 325), rng_seed=1)


@pytest.fixture(scope="module")
def split():
    ds = gen_toy_pure(ToyParams(0.4, 4.0, 40), rng_seed=3)
    return train_test_split(ds, 0.5, 3)


def test_ten_batches_cut_circuit_runs_by_32_5(toy325):
    qnn = FAST.qnn(2)
    states = toy325.quantum_states()
    _, globs = global_states(states, toy325.labels, 10, "random", 0)
    inst = instance_objective(qnn, states, toy325.labels, FAST.loss)
    glob = global_objective(qnn, globs, FAST.loss)
    theta = qnn.init_params(0)
    for _ in range(7):
        inst(theta)
        glob(theta)
    assert (inst.circuits_per_call, glob.circuits_per_call) == (650, 20)
    assert inst.n_circuits / glob.n_circuits == 32.5


def test_trained_models_report_counts(toy325):
    _, globs = global_states(toy325.quantum_states(), toy325.labels, 10, "random", 0)
    g = fit_global(globs, FAST, 2)
    i = fit_instance(toy325.quantum_states(), toy325.labels, FAST)
    assert g.eval_count == 20 * g.n_calls
    assert i.eval_count == 650 * i.n_calls
    assert (i.eval_count / i.n_calls) / (g.eval_count / g.n_calls) == 32.5


@pytest.mark.parametrize("mode", ["instance", "global"])
def test_run_training_metrics(split, mode):
    tr, te = split
    m = run_training(tr, te, FAST, mode, n_batches=4)
    assert 0.0 <= m.test_auc <= 1.0 and 0.0 <= m.train_auc <= 1.0
    assert m.n_globals == (8 if mode == "global" else 0)
    assert len(m.history) == m.epochs
    assert m.history == sorted(m.history, reverse=True)


def test_single_batch_global_matches_instance(split):
    tr, te = split
    inst = run_training(tr, te, FAST, "instance")
    glob = run_training(tr, te, FAST, "global", n_batches=1)
    np.testing.assert_allclose(glob.params, inst.params, atol=1e-9)
    assert abs(glob.test_auc - inst.test_auc) <= 0.01


def test_unknown_mode(split):
    with pytest.raises(ParamError):
        run_training(*split, FAST, "federated")


def test_scores_agree_for_kets_and_densities(split):
    tr, _ = split
    kets = tr.quantum_states()
    params = FAST.qnn(2).init_params(5)
    np.testing.assert_allclose(scores(FAST, params, kets), scores(FAST, params, tr.densities()), atol=1e-12)


@pytest.mark.parametrize("scheme", ["random", "smart"])
def test_epsilon_for_runs_on_toy(split, scheme):
    tr, _ = split
    report, pooled = epsilon_for(tr, 4, scheme, 1, n_eval=2000)
    assert report.scheme.startswith(scheme)
    assert report.n_adjacent == pooled.adjacent.size >= 10
