"""Derivative-free minimisers for unconstrained problems.

``linear_trust_region`` follows the structure of Powell's COBYLA without
constraints: it keeps ``n + 1`` interpolation points, fits the linear model
through them, steps to the boundary of a trust region of radius ``rho`` along
the model's descent direction and halves ``rho`` whenever a step fails to
achieve a tenth of the predicted reduction. Geometry steps restore a
well-conditioned simplex when a vertex drifts too far or the simplex flattens.

``nelder_mead`` is the textbook simplex method and exists to cross-check the
first one behind the same interface.

Both are deterministic and call the objective strictly sequentially.
Objective values are snapped to a grid of ``RESOLUTION`` before use, so two
objectives that agree up to rounding (say a mean over individuals and the
same mean computed through mixtures) drive identical trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Objective = Callable[[np.ndarray], float]

# Powell's simplex-acceptability constants
_SIGMA_MIN = 0.25
_ETA_MAX = 2.1
_GEOMETRY_STEP = 0.5

RESOLUTION = 2.0**-40


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    nfev: int
    rho: float


class _BudgetExhausted(Exception):
    pass


class _Tracker:
    """Counts evaluations, enforces the budget and remembers the best point."""

    def __init__(self, fun: Objective, maxfev: int):
        self.fun = fun
        self.maxfev = maxfev
        self.nfev = 0
        self.best_x = None
        self.best_f = np.inf
        self.rho = float("nan")

    def __call__(self, x) -> float:
        if self.nfev >= self.maxfev:
            raise _BudgetExhausted
        self.nfev += 1
        val = float(self.fun(x))
        if np.isfinite(val):
            val = round(val / RESOLUTION) * RESOLUTION
        if val < self.best_f or self.best_x is None:
            self.best_x, self.best_f = np.array(x, copy=True), val
        return val

    def result(self, rho: float) -> OptimizeResult:
        return OptimizeResult(x=self.best_x, fun=self.best_f, nfev=self.nfev, rho=rho)


def linear_trust_region(
    fun: Objective,
    x0,
    maxfev: int = 200,
    rhobeg: float = 1.0,
    rhoend: float = 1e-4,
) -> OptimizeResult:
    """Minimise ``fun`` from ``x0`` with at most ``maxfev`` evaluations.

    The budget is raised to ``n + 1`` if smaller, since the initial simplex
    needs that many points. Returns the best point ever evaluated.
    """
    x0 = np.array(x0, dtype=np.float64)
    n = x0.size
    f = _Tracker(fun, max(maxfev, n + 1))
    try:
        _trust_region_loop(f, x0, rhobeg, rhoend)
    except _BudgetExhausted:
        pass
    return f.result(rho=f.rho)


def _trust_region_loop(f: _Tracker, x0: np.ndarray, rhobeg: float, rhoend: float) -> None:
    n = x0.size
    pts = np.vstack([x0, x0 + rhobeg * np.eye(n)])
    vals = np.array([f(p) for p in pts])
    rho = f.rho = rhobeg

    while True:
        best = int(np.argmin(vals))
        if best:
            pts[[0, best]] = pts[[best, 0]]
            vals[[0, best]] = vals[[best, 0]]
        edges = pts[1:] - pts[0]
        try:
            inv = np.linalg.inv(edges)
        except np.linalg.LinAlgError:
            inv = None

        if inv is not None:
            # distance of vertex j from the face opposite to it, and edge lengths
            sigma = 1.0 / np.linalg.norm(inv, axis=0)
            eta = np.linalg.norm(edges, axis=1)
        if inv is None or np.any(sigma < _SIGMA_MIN * rho) or np.any(eta > _ETA_MAX * rho):
            if inv is None:
                # flattened simplex: push the longest edge out along the missing direction
                direction = np.linalg.svd(edges)[2][-1]
                j = int(np.argmax(np.linalg.norm(edges, axis=1)))
            elif np.any(eta > _ETA_MAX * rho):
                j = int(np.argmax(eta))
                direction = inv[:, j] / np.linalg.norm(inv[:, j])
            else:
                j = int(np.argmin(sigma))
                direction = inv[:, j] / np.linalg.norm(inv[:, j])
            step = _GEOMETRY_STEP * rho * direction
            if inv is not None:
                grad = inv @ (vals[1:] - vals[0])
                if grad @ step > 0:
                    step = -step
            x_new = pts[0] + step
            pts[j + 1] = x_new
            vals[j + 1] = f(x_new)
            continue

        grad = inv @ (vals[1:] - vals[0])
        gnorm = np.linalg.norm(grad)
        if gnorm == 0.0:
            if rho <= rhoend:
                break
            rho = f.rho = _shrink(rho, rhoend)
            continue
        step = -rho * grad / gnorm
        x_new = pts[0] + step
        f_new = f(x_new)
        predicted = rho * gnorm
        actual = vals[0] - f_new

        # replace the vertex that keeps the simplex volume largest
        coef = step @ inv
        dist = np.linalg.norm(pts[1:] - x_new, axis=1)
        score = np.abs(coef) * np.maximum(1.0, dist / rho)
        j = int(np.argmax(score))
        pts[j + 1] = x_new
        vals[j + 1] = f_new

        if actual < 0.1 * predicted:
            if rho <= rhoend:
                break
            rho = f.rho = _shrink(rho, rhoend)


def _shrink(rho: float, rhoend: float) -> float:
    rho *= 0.5
    return rhoend if rho <= 1.5 * rhoend else rho


def nelder_mead(
    fun: Objective,
    x0,
    maxfev: int = 200,
    step: float = 1.0,
    xatol: float = 1e-4,
    fatol: float = 1e-10,
) -> OptimizeResult:
    x0 = np.array(x0, dtype=np.float64)
    f = _Tracker(fun, max(maxfev, 1))
    try:
        _nelder_mead_loop(f, x0, step, xatol, fatol)
    except _BudgetExhausted:
        pass
    return f.result(rho=float("nan"))


def _nelder_mead_loop(f: _Tracker, x0: np.ndarray, step: float, xatol: float, fatol: float) -> None:
    n = x0.size
    sim = np.vstack([x0, x0 + step * np.eye(n)])
    vals = np.array([f(p) for p in sim])
    while True:
        order = np.argsort(vals, kind="stable")
        sim, vals = sim[order], vals[order]
        if np.max(np.abs(sim[1:] - sim[0])) <= xatol and np.max(vals[1:] - vals[0]) <= fatol:
            break
        centroid = sim[:-1].mean(axis=0)
        xr = centroid + (centroid - sim[-1])
        fr = f(xr)
        if fr < vals[0]:
            xe = centroid + 2.0 * (centroid - sim[-1])
            fe = f(xe)
            sim[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < vals[-2]:
            sim[-1], vals[-1] = xr, fr
        else:
            if fr < vals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (sim[-1] - centroid)
            fc = f(xc)
            if fc < min(fr, vals[-1]):
                sim[-1], vals[-1] = xc, fc
            else:
                sim[1:] = sim[0] + 0.5 * (sim[1:] - sim[0])
                vals[1:] = [f(p) for p in sim[1:]]


OPTIMIZERS = {
    "cobyla": linear_trust_region,
    "nelder-mead": nelder_mead,
}
