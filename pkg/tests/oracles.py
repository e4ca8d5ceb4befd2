"""Independent reference implementations used only by the tests.

Nothing here calls the factor algebra, the elimination code, the
moralization-based d-separation or the vertex-enumeration LP of the
package. Model objects are only read for their raw tables.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog


def _lookup(f, assignment):
    """Entry of a factor's raw table at a full assignment dict."""
    return float(f.values[tuple(assignment[n] for n in f.names)])


def enumerate_joint(m, regime=None):
    """Full joint of a Cbn's stochastic nodes as ``{assignment tuple: p}``.

    ``regime`` maps node names (not regime names) to the value they are set
    to; those nodes get a point mass.
    """
    regime = regime or {}
    names = list(m.stochastic)
    cards = [m.variables[n].card for n in names]
    out = {}
    for values in itertools.product(*(range(c) for c in cards)):
        a = dict(zip(names, values))
        p = 1.0
        for n in names:
            if n in regime:
                p *= 1.0 if a[n] == regime[n] else 0.0
            else:
                p *= _lookup(m.cpts[n], a)
        out[values] = p
    return names, out


def brute_query(m, targets, evidence=None, regime=None):
    """Posterior table over ``targets`` (axes in the given order) by enumeration."""
    evidence = evidence or {}
    names, joint = enumerate_joint(m, regime)
    shape = tuple(m.variables[t].card for t in targets)
    table = np.zeros(shape)
    for values, p in joint.items():
        a = dict(zip(names, values))
        if all(a[k] == v for k, v in evidence.items()):
            table[tuple(a[t] for t in targets)] += p
    total = table.sum()
    if total <= 0:
        raise ZeroDivisionError("evidence has zero mass")
    return table / total


def path_d_separated(nodes, edges, a, b, c):
    """d-separation by enumerating every simple path in the skeleton."""
    nodes = list(nodes)
    parents = {n: set() for n in nodes}
    children = {n: set() for n in nodes}
    for p, ch in edges:
        parents[ch].add(p)
        children[p].add(ch)

    def descendants(n):
        seen, stack = {n}, [n]
        while stack:
            for ch in children[stack.pop()]:
                if ch not in seen:
                    seen.add(ch)
                    stack.append(ch)
        return seen

    c = set(c)
    neighbours = {n: parents[n] | children[n] for n in nodes}

    def blocked(path):
        for i in range(1, len(path) - 1):
            prev, mid, nxt = path[i - 1], path[i], path[i + 1]
            collider = prev in parents[mid] and nxt in parents[mid]
            if collider:
                if not (descendants(mid) & c):
                    return True
            elif mid in c:
                return True
        return False

    def paths(start, goal):
        stack = [[start]]
        while stack:
            path = stack.pop()
            if path[-1] == goal:
                yield path
                continue
            for nb in neighbours[path[-1]]:
                if nb not in path:
                    stack.append(path + [nb])

    for x in a:
        for y in b:
            for path in paths(x, y):
                if not blocked(path):
                    return False
    return True


def pc_twin_sum(p_u, p_x1_u, p_y1_xu, ignorable=False):
    """PC for the U -> X, (U, X) -> Y model as a finite sum over U.

    ``p_u[u]``, ``p_x1_u[u] = P(X=1 | U=u)`` and ``p_y1_xu[x][u]``. Mirror
    noise is independent given U, so the counterfactual factor is simply
    ``P(Y=0 | X=0, U=u)``. Under ignorability the exposure factor drops.
    """
    num = den = 0.0
    for u, pu in enumerate(p_u):
        w = pu * (1.0 if ignorable else p_x1_u[u]) * p_y1_xu[1][u]
        den += w
        num += w * (1.0 - p_y1_xu[0][u])
    return num / den


def solve_equations(s, u, do=None):
    """Evaluate a deterministic SCM by fixed-point passes over the raw tables."""
    do = dict(do or {})
    values = dict(u)
    values.update(do)
    pending = [n for n in s.equations if n not in do]
    while pending:
        progressed = False
        for n in list(pending):
            eq = s.equations[n]
            ins = [v.name for v in eq.inputs]
            if all(k in values for k in ins):
                values[n] = int(eq.table[tuple(values[k] for k in ins)])
                pending.remove(n)
                progressed = True
        assert progressed, "cyclic equations"
    return values


def pc_scm_enumeration(s, factual, counterfactual, outcome):
    """PC for a deterministic SCM by summing over exogenous states."""
    names = list(s.exogenous.names)
    cards = [s.variables[n].card for n in names]
    num = den = 0.0
    for us in itertools.product(*(range(c) for c in cards)):
        u = dict(zip(names, us))
        p = _lookup(s.exogenous, u)
        if p == 0:
            continue
        world = solve_equations(s, u)
        if all(world[k] == v for k, v in factual.items()):
            den += p
            cf = solve_equations(s, u, counterfactual)
            if cf[outcome] != factual[outcome]:
                num += p
    return num / den


def basic_bounds_exact(p1: Fraction, p0: Fraction):
    """Closed-form basic bounds in rational arithmetic."""
    lower = max(Fraction(0), 1 - p0 / p1)
    upper = min(Fraction(1), (1 - p0) / p1)
    return lower, upper


def linprog_range(a_eq, b_eq, objective, scale=1.0):
    """(min, max) of ``objective @ p / scale`` over ``{p >= 0 : A p = b}`` via HiGHS."""
    a_eq, b_eq, c = (np.asarray(v, dtype=float) for v in (a_eq, b_eq, objective))
    bounds = [(0, None)] * a_eq.shape[1]
    lo = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    hi = linprog(-c, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if lo.status != 0 or hi.status != 0:
        return None
    return lo.fun / scale, -hi.fun / scale


def iv_ace_linprog(p_xy_given_z, monotone=False):
    """ACE bounds over the 16 response types with an external LP solver."""
    types = list(itertools.product((0, 1), repeat=4))
    rows, rhs = [], []
    for z, x, y in itertools.product((0, 1), repeat=3):
        rows.append([1.0 if (t[z] == x and t[2 + x] == y) else 0.0 for t in types])
        rhs.append(p_xy_given_z[z][x][y])
    if monotone:
        rows.append([1.0 if t[:2] == (1, 0) else 0.0 for t in types])
        rhs.append(0.0)
    obj = [t[3] - t[2] for t in types]
    return linprog_range(rows, rhs, obj)


def strata_algebra_exact(probs):
    """(ACE_ZX, ACE_ZY, complier effect) of a strata array in rationals."""
    zx = zy = Fraction(0)
    c_mass = c_eff = Fraction(0)
    for x0, x1, y0, y1 in itertools.product((0, 1), repeat=4):
        w = Fraction(float(probs[x0, x1, y0, y1]))
        yz0 = (y0, y1)[x0]
        yz1 = (y0, y1)[x1]
        zx += w * (x1 - x0)
        zy += w * (yz1 - yz0)
        if (x0, x1) == (0, 1):
            c_mass += w
            c_eff += w * (y1 - y0)
    return zx, zy, c_eff / c_mass
