import numpy as np
import pytest

from mixqnn import optim


def quadratic(target):
    target = np.asarray(target, dtype=float)
    return lambda x: float(np.sum((np.asarray(x) - target) ** 2))


TARGET = np.array([0.3, -1.2, 2.0, 0.7])


@pytest.mark.parametrize("name", sorted(optim.OPTIMIZERS))
def test_quadratic_minimum(name):
    res = optim.OPTIMIZERS[name](quadratic(TARGET), np.zeros(4), maxfev=2000)
    np.testing.assert_allclose(res.x, TARGET, atol=1e-3)
    assert res.fun == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("name", sorted(optim.OPTIMIZERS))
@pytest.mark.parametrize("maxfev", [10, 37, 200])
def test_budget_respected(name, maxfev):
    calls = []

    def f(x):
        calls.append(1)
        return float(np.sum(np.cos(3 * x)) + np.sum(x**2))

    res = optim.OPTIMIZERS[name](f, np.full(3, 0.4), maxfev=maxfev)
    assert len(calls) == res.nfev <= max(maxfev, 4)


@pytest.mark.parametrize("name", sorted(optim.OPTIMIZERS))
def test_returns_best_point_seen(name):
    seen = []

    def f(x):
        v = float(np.sum(np.sin(2 * x)) + 0.1 * np.sum(x**2))
        seen.append(v)
        return v

    res = optim.OPTIMIZERS[name](f, np.array([1.0, -0.5]), maxfev=60)
    assert abs(res.fun - min(seen)) <= optim.RESOLUTION
    assert abs(f(res.x) - res.fun) <= optim.RESOLUTION


@pytest.mark.parametrize("name", sorted(optim.OPTIMIZERS))
def test_rounding_level_differences_do_not_change_trajectory(name):
    # the same function summed in two different orders
    w = np.linspace(0.1, 1.0, 50)

    def f1(x):
        return float(np.sum(w * np.cos(x[0] * w + x[1])) / w.size)

    def f2(x):
        return float(np.sum((w * np.cos(x[0] * w + x[1]))[::-1]) / w.size)

    a = optim.OPTIMIZERS[name](f1, np.array([0.2, 0.1]), maxfev=150)
    b = optim.OPTIMIZERS[name](f2, np.array([0.2, 0.1]), maxfev=150)
    np.testing.assert_array_equal(a.x, b.x)


@pytest.mark.parametrize("name", sorted(optim.OPTIMIZERS))
def test_deterministic(name):
    f = quadratic([1.0, 2.0, -3.0])
    a = optim.OPTIMIZERS[name](f, np.zeros(3), maxfev=50)
    b = optim.OPTIMIZERS[name](f, np.zeros(3), maxfev=50)
    np.testing.assert_array_equal(a.x, b.x)


def test_trust_region_never_worse_than_start():
    f = quadratic([5.0, 5.0])
    x0 = np.array([4.9, 5.1])
    res = optim.linear_trust_region(f, x0, maxfev=30, rhobeg=1.0)
    assert res.fun <= f(x0)


def test_rosenbrock_progress():
    def rosen(x):
        return float(100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2)

    res = optim.nelder_mead(rosen, np.array([-1.2, 1.0]), maxfev=2000)
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-3)
