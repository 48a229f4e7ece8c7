import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.metrics import roc_auc_score

from conftest import random_densities, random_kets
from mixqnn import classifier as clf
from mixqnn.batching import GlobalState
from mixqnn.errors import DimensionError, EmptyDatasetError, EvalError, OptimizationError, ParamError
from mixqnn.qcore import Observable, pure_to_density, pure_to_density_many, uniform_mix

L1 = clf.LossSpec(clf.LossKind.L1_RESCALED)
SIG = clf.LossSpec(clf.LossKind.L1_SIGMOID, 10.0)
L2 = clf.LossSpec(clf.LossKind.L2)


@pytest.mark.parametrize(
    "p, y, spec, expected",
    [
        (1.0, 1, L1, 0.0),
        (0.0, 1, L1, 0.5),
        (-1.0, 0, L1, 0.0),
        (0.0, 1, SIG, 0.5),
        (0.0, 0, SIG, 0.5),
        (1.0, 1, L2, 0.0),
        (1.0, 0, L2, 4.0),
        (0.5, 0, L2, 2.25),
    ],
)
def test_loss_term_examples(p, y, spec, expected):
    assert clf.loss_terms(p, y, spec) == pytest.approx(expected, abs=1e-15)


def test_sigmoid_term_reference():
    p = np.linspace(-1, 1, 7)
    ref = np.abs(1 / (1 + np.exp(-10 * p)) - 1)
    np.testing.assert_allclose(clf.loss_terms(p, np.ones(7), SIG), ref, atol=1e-15)


def test_loss_spec_validation():
    with pytest.raises(ParamError):
        clf.LossSpec(clf.LossKind.L1_SIGMOID, 0.0)
    with pytest.raises(ValueError):
        clf.LossSpec("hinge")
    assert clf.LossSpec("l2").kind is clf.LossKind.L2


def test_predict_raw_examples():
    zero = np.zeros((4, 4))
    zero[0, 0] = 1
    assert clf.predict_raw(np.zeros(4), zero, Observable(2, 1)) == pytest.approx(1.0)
    with pytest.raises(DimensionError):
        clf.QNN(2, 1).predict(np.zeros(4), np.eye(8) / 8)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3), st.integers(1, 8))
def test_predict_bounded_and_linear(seed, n, reps, batch):
    rng = np.random.default_rng(seed)
    qnn = clf.QNN(n, reps)
    theta = qnn.init_params(seed)
    states = random_densities(rng, batch, 2**n)
    p = qnn.predict(theta, states)
    assert np.all(np.abs(p) <= 1 + 1e-12)
    assert abs(qnn.predict(theta, uniform_mix(states)) - p.mean()) <= 1e-12


def test_predict_pure_matches_density_path(rng):
    qnn = clf.QNN(3, 2)
    theta = qnn.init_params(4)
    kets = random_kets(rng, 6, 8)
    via_dens = qnn.predict(theta, pure_to_density_many(kets))
    np.testing.assert_allclose(qnn.predict_pure(theta, kets), via_dens, atol=1e-13)
    # direct <psi|U^dagger Z U|psi>
    u = qnn.unitary(theta)
    z = Observable(3).matrix()
    direct = [np.vdot(u @ k, z @ (u @ k)).real for k in kets]
    np.testing.assert_allclose(via_dens, direct, atol=1e-13)
    assert qnn.predict_pure(theta, kets[0]) == pytest.approx(direct[0], abs=1e-13)


@pytest.mark.parametrize("spec", [L1, SIG, L2])
def test_loss_instance_matches_manual_mean(rng, spec):
    qnn = clf.QNN(2, 1)
    theta = qnn.init_params(1)
    states = random_densities(rng, 10, 4)
    labels = rng.integers(0, 2, 10)
    p = np.array([np.trace(Observable(2).matrix() @ qnn.unitary(theta) @ s @ qnn.unitary(theta).T).real for s in states])
    manual = np.mean(clf.loss_terms(p, labels, spec))
    assert clf.loss_instance(qnn, states, labels, theta, spec) == pytest.approx(manual, abs=1e-14)


@given(st.integers(0, 2**32 - 1), st.integers(1, 32), st.integers(0, 1))
def test_global_equals_instance_for_linear_loss(seed, batch, label):
    rng = np.random.default_rng(seed)
    qnn = clf.QNN(3, 2)
    theta = qnn.init_params(seed)
    states = random_densities(rng, batch, 8)
    glob = GlobalState(uniform_mix(states), label, batch, 1.0)
    inst = clf.loss_instance(qnn, states, np.full(batch, label), theta, L1)
    assert abs(clf.loss_global(qnn, [glob], theta, L1) - inst) <= 1e-10


def test_global_weighted_mean():
    qnn = clf.QNN(1, 1)
    theta = np.zeros(2)
    a = GlobalState(np.diag([1.0, 0.0]).astype(complex), 1, 3, 3.0)  # p = +1, term 0
    b = GlobalState(np.diag([0.5, 0.5]).astype(complex), 1, 1, 1.0)  # p = 0, term 0.5
    assert clf.loss_global(qnn, [a, b], theta, L1) == pytest.approx((3 * 0 + 0.5) / 4)
    assert clf.loss_global(qnn, [a, b], theta, L1, weights=[1, 1]) == pytest.approx(0.25)
    neg = GlobalState(np.diag([0.0, 1.0]).astype(complex), 0, 5, 1.0)
    assert clf.loss_global(qnn, [neg], theta, L1) == 0.0


def test_empty_inputs_rejected():
    qnn = clf.QNN(1, 1)
    with pytest.raises(EmptyDatasetError):
        clf.loss_global(qnn, [], np.zeros(2), L1)
    with pytest.raises(EmptyDatasetError):
        clf.loss_instance(qnn, np.zeros((0, 2, 2)), [], np.zeros(2), L1)


def test_objective_counts_circuits(rng):
    qnn = clf.QNN(2, 1)
    obj = clf.instance_objective(qnn, random_densities(rng, 7, 4), np.zeros(7), L1)
    for _ in range(3):
        obj(np.zeros(4))
    assert obj.n_calls == 3 and obj.circuits_per_call == 7 and obj.n_circuits == 21


class _Quadratic:
    circuits_per_call = 1

    def __init__(self, target):
        self.target = np.asarray(target)

    def __call__(self, x):
        return float(np.sum((np.asarray(x) - self.target) ** 2))


def test_train_quadratic_converges():
    target = np.array([0.5, -0.25, 1.0, -1.5])
    cfg = clf.TrainConfig(maxiter_per_epoch=200, max_epochs=20, patience=3)
    model = clf.train(_Quadratic(target), np.zeros(4), cfg)
    np.testing.assert_allclose(model.params, target, atol=1e-3)


@pytest.mark.parametrize("patience", [1, 3, 10])
@pytest.mark.parametrize("optimizer", ["cobyla", "nelder-mead"])
def test_constant_objective_stops_after_patience_plus_one(patience, optimizer):
    cfg = clf.TrainConfig(maxiter_per_epoch=20, max_epochs=50, patience=patience, optimizer=optimizer)
    model = clf.train(lambda x: 1.0, np.zeros(3), cfg)
    assert model.epochs == patience + 1
    assert model.history == [1.0] * (patience + 1)


def test_history_is_non_increasing(rng):
    qnn = clf.QNN(2, 2)
    states = random_densities(rng, 20, 4)
    labels = np.repeat([0, 1], 10)
    cfg = clf.TrainConfig(reps=2, maxiter_per_epoch=30, max_epochs=8, patience=3)
    model = clf.train(clf.instance_objective(qnn, states, labels, SIG), qnn.init_params(1), cfg)
    assert all(b <= a for a, b in zip(model.history, model.history[1:]))
    assert model.loss == model.history[-1]
    assert model.eval_count == model.n_calls * 20 > 0


def test_training_is_deterministic(rng):
    qnn = clf.QNN(2, 1)
    states = random_densities(rng, 12, 4)
    labels = np.repeat([0, 1], 6)
    cfg = clf.TrainConfig(maxiter_per_epoch=25, max_epochs=4)
    runs = [clf.train(clf.instance_objective(qnn, states, labels, L2), qnn.init_params(cfg.seed), cfg) for _ in range(2)]
    np.testing.assert_array_equal(runs[0].params, runs[1].params)
    assert runs[0].history == runs[1].history


def test_global_and_instance_training_agree(rng):
    qnn = clf.QNN(2, 1)
    kets = random_kets(rng, 40, 4)
    labels = np.repeat([0, 1], 20)
    dens = pure_to_density_many(kets)
    globs = [GlobalState(uniform_mix(dens[labels == y]), y, 20, 1.0) for y in (0, 1)]
    cfg = clf.TrainConfig(maxiter_per_epoch=40, max_epochs=3)
    a = clf.train(clf.instance_objective(qnn, kets, labels, L1), qnn.init_params(2), cfg)
    b = clf.train(clf.global_objective(qnn, globs, L1), qnn.init_params(2), cfg)
    np.testing.assert_allclose(a.params, b.params, atol=1e-9)


def test_non_finite_objective_raises_with_params():
    def bad(x):
        return math.nan if x[0] > 0.5 else float(-x[0])

    with pytest.raises(OptimizationError) as info:
        clf.train(bad, np.zeros(2), clf.TrainConfig(maxiter_per_epoch=50, max_epochs=2))
    assert info.value.params[0] > 0.5


@pytest.mark.parametrize(
    "kwargs",
    [dict(reps=0), dict(maxiter_per_epoch=0), dict(max_epochs=0), dict(patience=0), dict(optimizer="adam")],
)
def test_train_config_validation(kwargs):
    with pytest.raises(ParamError):
        clf.TrainConfig(**kwargs)


def test_init_params_range_and_determinism():
    a = clf.init_params(1000, 3)
    assert np.all(a > -np.pi) and np.all(a <= np.pi)
    np.testing.assert_array_equal(a, clf.init_params(1000, 3))


@pytest.mark.parametrize(
    "scores, labels, expected",
    [
        ([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0], 1.0),
        ([0.3, 0.3, 0.3, 0.3], [1, 0, 1, 0], 0.5),
        ([0.1, 0.9, 0.5], [1, 1, 0], 0.5),
        ([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0], 0.0),
    ],
)
def test_auc_examples(scores, labels, expected):
    assert clf.auc(scores, labels) == expected


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 1)), min_size=2, max_size=60))
def test_auc_matches_sklearn(pairs):
    scores = np.array([s for s, _ in pairs], dtype=float)
    labels = np.array([y for _, y in pairs])
    if labels.min() == labels.max():
        with pytest.raises(EvalError):
            clf.auc(scores, labels)
        return
    assert clf.auc(scores, labels) == pytest.approx(roc_auc_score(labels, scores), abs=1e-12)


def test_auc_errors():
    with pytest.raises(EvalError):
        clf.auc([0.1, 0.2], [1, 1])
    with pytest.raises(EvalError):
        clf.auc([0.1, 0.2, 0.3], [0, 1, 2])
    with pytest.raises(DimensionError):
        clf.auc([0.1], [0, 1])


def test_train_config_builds_observable():
    qnn = clf.TrainConfig(observable_qubit=0, parity=False).qnn(3)
    assert qnn.observable.qubit == 0
    par = clf.TrainConfig(parity=True).qnn(2)
    theta = par.init_params(5)
    rho = pure_to_density(np.array([0.6, 0, 0, 0.8]))
    u = par.unitary(theta)
    zz = np.diag([1.0, -1.0, -1.0, 1.0])
    assert par.predict(theta, rho) == pytest.approx(np.trace(zz @ u @ rho @ u.T).real, abs=1e-13)
