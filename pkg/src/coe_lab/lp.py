"""Exact linear programs over small probability simplices.

Bounds on causal quantities reduce to optimizing a linear functional over
``{p >= 0 : A p = b}``, a polytope with few vertices when there are at most
a couple of dozen cells. We enumerate every basic feasible solution instead
of running a solver, which makes the optimum exact up to the linear solves
and independent of solver tolerances.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .exceptions import InfeasibleData, ModelError

FEASIBILITY_TOL = 1e-9
MAX_VARIABLES = 20


@lru_cache(maxsize=64)
def _combinations(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), k)), dtype=int).reshape(-1, k)


def _independent_rows(a: np.ndarray) -> list[int]:
    rows: list[int] = []
    for i in range(a.shape[0]):
        if np.linalg.matrix_rank(a[rows + [i]]) > len(rows):
            rows.append(i)
    return rows


def vertices(a_eq, b_eq, tol: float = FEASIBILITY_TOL) -> np.ndarray:
    """All vertices of ``{p >= 0 : a_eq @ p = b_eq}``, lexicographically sorted.

    Raises
    ------
    InfeasibleData
        If the polytope is empty.
    """
    a = np.atleast_2d(np.asarray(a_eq, dtype=float))
    b = np.asarray(b_eq, dtype=float).ravel()
    if a.shape[0] != b.size:
        raise ModelError("constraint matrix and right-hand side disagree in length")
    n = a.shape[1]
    if n > MAX_VARIABLES:
        raise ModelError(f"vertex enumeration supports at most {MAX_VARIABLES} variables")
    rows = _independent_rows(a)
    if not rows:
        raise ModelError("at least one equality constraint is required to bound the polytope")
    ar, br = a[rows], b[rows]
    k = len(rows)
    combos = _combinations(n, k)
    bases = np.transpose(ar[:, combos], (1, 0, 2))
    det = np.linalg.det(bases)
    ok = np.abs(det) > 1e-10
    combos, bases = combos[ok], bases[ok]
    sol = np.linalg.solve(bases, np.broadcast_to(br, (len(bases), k))[..., None])[..., 0]
    feasible = np.all(sol >= -tol, axis=1)
    combos, sol = combos[feasible], sol[feasible]
    x = np.zeros((len(sol), n))
    np.put_along_axis(x, combos, np.clip(sol, 0.0, None), axis=1)
    # rows dropped as linearly dependent must still hold (catches inconsistent b)
    resid = np.abs(x @ a.T - b).max(axis=1) if len(x) else np.zeros(0)
    x = x[resid <= max(tol, 1e-9) * 10]
    if not len(x):
        raise InfeasibleData("no distribution satisfies the constraints")
    return np.unique(np.round(x, 12), axis=0)


def lp_pc_bounds(a_eq, b_eq, objective, constant: float = 0.0, scale: float = 1.0,
                 tol: float = FEASIBILITY_TOL) -> tuple[float, float]:
    """Minimum and maximum of ``(objective @ p + constant) / scale``.

    ``scale`` lets ratio objectives with a data-fixed denominator (such as
    the probability of causation) be passed directly.
    """
    if scale <= 0:
        raise ModelError("scale must be positive")
    vs = vertices(a_eq, b_eq, tol)
    vals = (vs @ np.asarray(objective, dtype=float) + constant) / scale
    return float(vals.min()), float(vals.max())


def cell_indicator(cells, predicate) -> np.ndarray:
    """0/1 row over ``cells`` (tuples) marking where ``predicate`` holds."""
    return np.array([1.0 if predicate(*c) else 0.0 for c in cells])
