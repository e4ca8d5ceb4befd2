"""Causal Bayesian networks with explicit regime nodes.

Interventions are represented by regime variables ``F_X``: when ``F_X`` is
idle the node keeps its observational CPT, when ``F_X = x`` the CPT is
replaced by a point mass at ``x`` and the (dashed) edges from the stochastic
parents are cut.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .exceptions import ModelError, PositivityViolation, ZeroMass
from .factor import (
    NORMALIZATION_TOL,
    REGIME,
    ZERO_MASS_TOL,
    Distribution,
    Factor,
    Variable,
    condition,
    marginalize,
    normalize,
    product,
    sum_out,
)
from .graph import AugmentedDag, validate


def cpt(node: Variable, parents: Iterable[Variable], table) -> Factor:
    """Build a CPT factor from a table with axes ``(*parents, node)``."""
    parents = list(parents)
    return Factor(parents + [node], table)


def check_cpt(f: Factor, node: str) -> None:
    """Raise unless ``f`` sums to one over ``node`` for every parent state."""
    if node not in f.names:
        raise ModelError(f"CPT of {node!r} does not contain {node!r}")
    sums = f.values.sum(axis=f.names.index(node))
    bad = np.abs(sums - 1.0) > NORMALIZATION_TOL
    if np.any(bad):
        worst = float(sums.flat[np.argmax(np.abs(sums - 1.0))])
        raise ModelError(f"CPT of {node!r} has a column summing to {worst!r}")


class Cbn:
    """A causal Bayesian network.

    Parameters
    ----------
    variables : iterable of Variable
        Stochastic variables. Regime variables are derived from ``regimes``.
    edges : iterable
        ``(parent, child)`` or ``(parent, child, style)`` tuples between
        stochastic variables.
    cpts : mapping
        ``{name: Factor}`` over the node and its stochastic parents.
    regimes : mapping, optional
        ``{regime_name: target}`` declaring which nodes may be intervened on.
    """

    def __init__(self, variables: Iterable[Variable], edges: Iterable, cpts: Mapping[str, Factor],
                 regimes: Mapping[str, str] | None = None):
        variables = list(variables)
        self.variables: dict[str, Variable] = {}
        for v in variables:
            if v.kind == REGIME:
                raise ModelError(f"{v.name!r}: declare regime variables through `regimes`")
            if v.name in self.variables:
                raise ModelError(f"duplicate variable {v.name!r}")
            self.variables[v.name] = v
        self.graph = AugmentedDag(self.variables, edges, regimes)
        self.order = [n for n in validate(self.graph) if n not in self.graph.regimes]
        for r, t in self.graph.regimes.items():
            self.variables[r] = Variable.regime(r, self.variables[t])
        self.cpts: dict[str, Factor] = {}
        for name in self.graph.stochastic_nodes:
            if name not in cpts:
                raise ModelError(f"missing CPT for {name!r}")
            f = cpts[name]
            expected = {name, *self.graph.stochastic_parents(name)}
            if set(f.names) != expected:
                raise ModelError(f"CPT of {name!r} has scope {sorted(f.names)}, expected {sorted(expected)}")
            for v in f.scope:
                if v.card != self.variables[v.name].card:
                    raise ModelError(f"CPT of {name!r}: wrong cardinality for {v.name!r}")
            check_cpt(f, name)
            self.cpts[name] = f
        extra = set(cpts) - set(self.graph.stochastic_nodes)
        if extra:
            raise ModelError(f"CPTs given for unknown nodes {sorted(extra)}")

    @property
    def stochastic(self) -> tuple[str, ...]:
        return self.graph.stochastic_nodes

    @property
    def regimes(self) -> dict[str, str]:
        return self.graph.regimes

    def regime_of(self, node: str) -> str:
        try:
            return self.graph.regime_of[node]
        except KeyError:
            raise ModelError(f"{node!r} has no regime node; it cannot be intervened on") from None

    def stochastic_edges(self):
        return [(p, c, self.graph.styles[(p, c)]) for p, c in self.graph.stochastic_edges]

    def factors(self, regime: Mapping[str, int | None] | None = None) -> dict[str, Factor]:
        """The CPT of every stochastic node under a regime assignment."""
        regime = regime or {}
        out = {}
        for name in self.stochastic:
            r = self.graph.regime_of.get(name)
            x = regime.get(r) if r is not None else None
            if x is None:
                out[name] = self.cpts[name]
            else:
                out[name] = Factor.point_mass(self.variables[name], x)
        return out

    def joint(self, regime: Mapping[str, int | None] | None = None) -> Distribution:
        """The full joint of the stochastic nodes (dense; small models only)."""
        return normalize(product(self.factors(regime).values()))

    def __repr__(self):
        return f"Cbn(nodes={list(self.stochastic)}, regimes={self.regimes})"


@dataclass(frozen=True)
class Query:
    """Targets, evidence on stochastic nodes and a regime assignment.

    Regime values are ``None`` for idle or the state the target is set to;
    regime variables left out of ``regime`` are idle.
    """

    targets: tuple[str, ...]
    evidence: Mapping[str, int] = field(default_factory=dict)
    regime: Mapping[str, int | None] = field(default_factory=dict)

    def __post_init__(self):
        targets = (self.targets,) if isinstance(self.targets, str) else tuple(self.targets)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "evidence", dict(self.evidence))
        object.__setattr__(self, "regime", dict(self.regime))
        overlap = set(targets) & set(self.evidence)
        if overlap:
            raise ModelError(f"targets and evidence overlap on {sorted(overlap)}")

    def resolve(self, m: Cbn) -> tuple[dict[str, int], dict[str, int | None]]:
        """Check the query against ``m`` and translate labels to indices."""
        for t in self.targets:
            if t not in m.stochastic:
                raise ModelError(f"unknown target {t!r}")
        evidence = {}
        for k, v in self.evidence.items():
            if k not in m.stochastic:
                raise ModelError(f"unknown evidence variable {k!r}")
            evidence[k] = m.variables[k].state_index(v)
        regime = {r: None for r in m.regimes}
        for k, v in self.regime.items():
            if k not in m.regimes:
                raise ModelError(f"unknown regime variable {k!r}")
            if v is None:
                continue
            target = m.variables[m.regimes[k]]
            idx = target.state_index(v)
            regime[k] = idx
        return evidence, regime


def min_fill_order(scopes: Iterable[Iterable[str]], eliminate: Iterable[str]) -> list[str]:
    """Greedy min-fill elimination order, ties broken lexicographically."""
    eliminate = set(eliminate)
    adj: dict[str, set[str]] = {}
    for scope in scopes:
        scope = list(scope)
        for a in scope:
            adj.setdefault(a, set()).update(b for b in scope if b != a)
    for n in eliminate:
        adj.setdefault(n, set())
    order = []
    while eliminate:
        best, best_fill = None, None
        for n in sorted(eliminate):
            nb = sorted(adj[n])
            fill = sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b not in adj[a])
            if best_fill is None or fill < best_fill:
                best, best_fill = n, fill
        nb = adj.pop(best)
        for a in nb:
            adj[a].discard(best)
            adj[a].update(b for b in nb if b != a)
        eliminate.discard(best)
        order.append(best)
    return order


def eliminate(factors: Iterable[Factor], order: Iterable[str]) -> list[Factor]:
    """Sum variables out of a factor list one at a time."""
    factors = list(factors)
    for var in order:
        touching = [f for f in factors if var in f.names]
        if not touching:
            continue
        rest = [f for f in factors if var not in f.names]
        rest.append(sum_out(product(touching), [var]))
        factors = rest
    return factors


def joint_query(m: Cbn, q: Query) -> Distribution:
    """Exact posterior over ``q.targets`` by variable elimination."""
    evidence, regime = q.resolve(m)
    factors = []
    for f in m.factors(regime).values():
        local = {k: v for k, v in evidence.items() if k in f.names}
        factors.append(condition(f, local) if local else f)
    hidden = set(m.stochastic) - set(q.targets) - set(evidence)
    order = min_fill_order([f.names for f in factors], hidden)
    result = product(eliminate(factors, order))
    result = marginalize(result, q.targets)
    try:
        return normalize(result)
    except ZeroMass:
        raise ZeroMass(f"evidence {q.evidence} has probability zero under regime {q.regime}") from None


def intervene(m: Cbn, assignment: Mapping[str, int]) -> Cbn:
    """Return the mutilated model with each node in ``assignment`` set.

    The intervened node gets a point-mass CPT and loses its stochastic
    parents. Nodes without a regime node are rejected.
    """
    cpts = dict(m.cpts)
    cut = set()
    for node, value in assignment.items():
        if node not in m.stochastic:
            raise ModelError(f"unknown variable {node!r}")
        m.regime_of(node)
        var = m.variables[node]
        cpts[node] = Factor.point_mass(var, var.state_index(value))
        cut.add(node)
    edges = [e for e in m.stochastic_edges() if e[1] not in cut]
    variables = [m.variables[n] for n in m.stochastic]
    return Cbn(variables, edges, cpts, m.regimes)


def _binary_regime(m: Cbn, x: str) -> str:
    r = m.regime_of(x)
    if m.variables[x].card != 2:
        raise ModelError(f"causal effects are defined here for binary exposures; {x!r} has {m.variables[x].card} states")
    return r


def ace(m: Cbn, x: str, y: str) -> float:
    """Average causal effect ``E(Y | F_X=1) - E(Y | F_X=0)``."""
    r = _binary_regime(m, x)
    means = [joint_query(m, Query((y,), regime={r: v})).expectation(y) for v in (0, 1)]
    return means[1] - means[0]


def sce(m: Cbn, x: str, y: str, u: Mapping[str, int]) -> float:
    """Specific causal effect of ``x`` on ``y`` in the subpopulation ``u``."""
    r = _binary_regime(m, x)
    means = [joint_query(m, Query((y,), evidence=u, regime={r: v})).expectation(y) for v in (0, 1)]
    return means[1] - means[0]


def back_door(m: Cbn, x: str, y: str, adjust: Iterable[str] = ()) -> dict[int, Distribution]:
    """Back-door adjustment ``sum_s P(Y | X=x, S=s) P(S=s)`` for every ``x``.

    Computed from the idle-regime joint of ``{x, y} | adjust``.
    """
    adjust = sorted(set(adjust))
    if x in adjust or y in adjust or x == y:
        raise ModelError("adjustment set must be disjoint from exposure and outcome")
    joint = joint_query(m, Query((x, y, *adjust)))
    table = joint.table([*adjust, x, y])
    p_s = table.sum(axis=(-2, -1))
    p_sx = table.sum(axis=-1)
    yvar = m.variables[y]
    out = {}
    for xv in range(m.variables[x].card):
        acc = np.zeros(yvar.card)
        for s in np.ndindex(p_s.shape):
            if p_s[s] <= ZERO_MASS_TOL:
                continue
            if p_sx[s + (xv,)] <= ZERO_MASS_TOL:
                strata = dict(zip(adjust, s))
                raise PositivityViolation(f"P({x}={xv}, {strata}) = 0 while P({strata}) > 0")
            acc += table[s + (xv,)] / p_sx[s + (xv,)] * p_s[s]
        out[xv] = Distribution((yvar,), acc)
    return out
