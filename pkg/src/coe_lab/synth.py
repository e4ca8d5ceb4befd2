"""Seeded random models and ancestral sampling.

All randomness flows through ``numpy.random.Generator(PCG64(seed))``. PCG64
is numpy's default bit generator and its stream is stable across platforms
and numpy releases, so a ``(model, n, seed)`` triple always yields the same
data. Probability tables are drawn from a flat Dirichlet.
"""

from __future__ import annotations

import itertools
from typing import Mapping

import numpy as np
import pandas as pd

from .cbn import Cbn, cpt
from .exceptions import ModelError
from .factor import Factor, Variable
from .iv import LinearSemParams, PrincipalStrata
from .scm import Scm, StCm, StructuralEquation, regime_name

MAX_NODES = 8
MAX_CARD = 4
KINDS = ("cbn", "scm", "stcm", "iv-strata", "iv-scm")


def rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """A PCG64 generator; passes existing generators through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _dirichlet_table(g: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Independent flat-Dirichlet rows along the last axis."""
    return g.dirichlet(np.ones(shape[-1]), size=shape[:-1]).reshape(shape)


def _random_cpt(g, node: Variable, parents: list[Variable]) -> Factor:
    return cpt(node, parents, _dirichlet_table(g, tuple(p.card for p in parents) + (node.card,)))


def random_dag_edges(g: np.random.Generator, names: list[str], edge_prob: float) -> list[tuple[str, str]]:
    """Edges respecting the order of ``names``, each present with ``edge_prob``."""
    return [(a, b) for i, a in enumerate(names) for b in names[i + 1:] if g.random() < edge_prob]


def random_cbn(seed=None, n_nodes: int = 4, max_card: int = 2, edge_prob: float = 0.5,
               regimes: str | list[str] = "all") -> Cbn:
    """Random causal Bayesian network over nodes ``V0 .. V{n-1}``.

    ``regimes`` is ``"all"``, ``"none"`` or a list of nodes that get a
    regime node ``F_<node>``.
    """
    _check_size(n_nodes, max_card)
    g = rng(seed)
    names = [f"V{i}" for i in range(n_nodes)]
    cards = g.integers(2, max_card + 1, size=n_nodes)
    variables = {n: Variable(n, int(c)) for n, c in zip(names, cards)}
    edges = random_dag_edges(g, names, edge_prob)
    cpts = {}
    for n in names:
        parents = [variables[a] for a, b in edges if b == n]
        cpts[n] = _random_cpt(g, variables[n], parents)
    if regimes == "all":
        targets = names
    elif regimes == "none":
        targets = []
    else:
        targets = list(regimes)
    return Cbn(variables.values(), edges, cpts, {regime_name(t): t for t in targets})


def random_stcm(seed=None, u_card: int = 2, confounded: bool = False, ignorable: bool = False) -> StCm:
    """Random binary-exposure model with nodes ``U``, ``X`` and ``Y``.

    Edges are U -> Y and X -> Y, plus U -> X when ``confounded``. ``U`` is
    the exogenous (shared) background variable.
    """
    _check_size(3, u_card)
    g = rng(seed)
    u, x, y = Variable("U", u_card), Variable("X"), Variable("Y")
    edges = [("U", "Y"), ("X", "Y")] + ([("U", "X")] if confounded else [])
    cpts = {
        "U": _random_cpt(g, u, []),
        "X": _random_cpt(g, x, [u] if confounded else []),
        "Y": _random_cpt(g, y, [u, x]),
    }
    return StCm([u, x, y], edges, cpts, exogenous=["U"], ignorable=ignorable)


def random_scm(seed=None, n_nodes: int = 3, u_card: int = 3, edge_prob: float = 0.6,
               correlated: bool = True) -> Scm:
    """Random deterministic SCM with binary nodes ``V0 ..`` and exogenous ``U0 ..``.

    Each endogenous node reads one exogenous variable of cardinality
    ``u_card``; with ``correlated`` the exogenous joint is a single
    Dirichlet draw over all cells, otherwise a product of margins.
    """
    _check_size(2 * n_nodes, u_card)
    g = rng(seed)
    names = [f"V{i}" for i in range(n_nodes)]
    endo = {n: Variable(n) for n in names}
    exo = [Variable(f"U{i}", u_card) for i in range(n_nodes)]
    edges = random_dag_edges(g, names, edge_prob)
    equations = []
    for n, ux in zip(names, exo):
        parents = [endo[a] for a, b in edges if b == n]
        shape = tuple(p.card for p in parents) + (ux.card,)
        equations.append(StructuralEquation(endo[n], parents, ux, g.integers(0, 2, size=shape)))
    cells = (u_card,) * n_nodes
    if correlated:
        joint = g.dirichlet(np.ones(int(np.prod(cells)))).reshape(cells)
    else:
        joint = np.ones(())
        for _ in exo:
            joint = np.multiply.outer(joint, g.dirichlet(np.ones(u_card)))
    return Scm(equations, Factor(exo, joint))


def random_iv_strata(seed=None, monotone: bool = False) -> PrincipalStrata:
    """Flat-Dirichlet law over the 16 response types, defier-free if ``monotone``."""
    g = rng(seed)
    p = np.zeros((2, 2, 2, 2))
    allowed = [t for t in itertools.product((0, 1), repeat=4) if not (monotone and t[:2] == (1, 0))]
    w = g.dirichlet(np.ones(len(allowed)))
    for t, v in zip(allowed, w):
        p[t] = v
    return PrincipalStrata(p)


def random_iv_scm(seed=None, u_card: int = 4, exclusion: bool = True, compliance: str = "random") -> Scm:
    """Random binary IV model ``Z -> X -> Y`` with a confounder ``U`` of X and Y.

    ``Z = U_Z`` is independent of ``U``. ``compliance="perfect"`` forces
    ``X = Z``. Without ``exclusion`` the outcome also reads ``Z`` directly.
    """
    _check_size(5, u_card)
    g = rng(seed)
    uz, u = Variable("U_Z"), Variable("U", u_card)
    z, x, y = Variable("Z"), Variable("X"), Variable("Y")
    eq_z = StructuralEquation(z, [], uz, np.array([0, 1]))
    if compliance == "perfect":
        eq_x = StructuralEquation.from_function(x, [z], u, lambda zv, _u: zv)
    elif compliance == "random":
        eq_x = StructuralEquation(x, [z], u, g.integers(0, 2, size=(2, u_card)))
    else:
        raise ModelError(f"unknown compliance {compliance!r}")
    y_parents = [x] if exclusion else [z, x]
    eq_y = StructuralEquation(y, y_parents, u, g.integers(0, 2, size=(2,) * len(y_parents) + (u_card,)))
    joint = np.multiply.outer(g.dirichlet(np.ones(2)), g.dirichlet(np.ones(u_card)))
    return Scm([eq_z, eq_x, eq_y], Factor([uz, u], joint))


def random_model(kind: str, seed=None, **params):
    """Dispatch to the generator for ``kind`` (one of :data:`KINDS`)."""
    makers = {
        "cbn": random_cbn,
        "scm": random_scm,
        "stcm": random_stcm,
        "iv-strata": random_iv_strata,
        "iv-scm": random_iv_scm,
    }
    if kind not in makers:
        raise ModelError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    return makers[kind](seed, **params)


def _check_size(n_nodes: int, max_card: int) -> None:
    if not 1 <= n_nodes <= MAX_NODES * 2:
        raise ModelError(f"at most {MAX_NODES} endogenous nodes are supported")
    if not 2 <= max_card <= MAX_CARD:
        raise ModelError(f"cardinalities must lie in [2, {MAX_CARD}]")


def _sampling_plan(model) -> tuple[list[str], dict[str, Factor], dict[str, Variable]]:
    if isinstance(model, Cbn):
        return list(model.order), dict(model.cpts), {n: model.variables[n] for n in model.stochastic}
    if isinstance(model, Scm):
        model = model.to_stcm()
    if isinstance(model, StCm):
        return list(model.order), model.node_factors(), dict(model.variables)
    raise ModelError(f"cannot sample from {type(model).__name__}")


def sample(model, n: int, seed=None, labels: bool = False) -> pd.DataFrame:
    """Draw ``n`` i.i.d. rows from the observational joint by ancestral sampling.

    Parameters
    ----------
    model : Cbn, Scm or StCm
    n : int
        Number of rows, at least 1.
    seed : int or Generator, optional
    labels : bool
        Emit state labels instead of integer state indices.

    Returns
    -------
    pandas.DataFrame
        One column per stochastic variable, in topological order.
    """
    if int(n) != n or n < 1:
        raise ModelError("n must be a positive integer")
    g = rng(seed)
    order, factors, variables = _sampling_plan(model)
    data: dict[str, np.ndarray] = {}
    for name in order:
        f = factors[name]
        parents = [p for p in f.names if p != name]
        table = f.table(parents + [name])
        probs = table[tuple(data[p] for p in parents)] if parents else np.broadcast_to(table, (n, table.size))
        cum = np.cumsum(probs, axis=-1)
        draws = g.random(n)[:, None]
        data[name] = np.minimum((draws >= cum).sum(axis=-1), variables[name].card - 1)
    frame = pd.DataFrame({k: data[k] for k in order})
    if labels:
        for k in order:
            frame[k] = np.asarray(variables[k].state_labels, dtype=object)[frame[k].to_numpy()]
    return frame


def sample_linear_sem(params: LinearSemParams, n: int, seed=None, p_z: float = 0.5) -> pd.DataFrame:
    """Simulate ``(Z, X, Y)`` with ``Z ~ Bernoulli(p_z)`` and Gaussian residuals."""
    g = rng(seed)
    z = (g.random(n) < p_z).astype(float)
    resid = g.multivariate_normal(np.zeros(2), np.asarray(params.resid_cov, dtype=float), size=n)
    x = params.alpha0 + params.alpha1 * z + resid[:, 0]
    y = params.beta0 + params.beta1 * x + resid[:, 1]
    return pd.DataFrame({"z": z, "x": x, "y": y})


def counts_table(frame: pd.DataFrame, columns: list[str], cards: Mapping[str, int] | None = None) -> np.ndarray:
    """Contingency counts of ``columns`` (integer-coded) as a dense array."""
    cards = cards or {c: int(frame[c].max()) + 1 for c in columns}
    shape = tuple(cards[c] for c in columns)
    out = np.zeros(shape)
    np.add.at(out, tuple(frame[c].to_numpy(dtype=int) for c in columns), 1)
    return out
