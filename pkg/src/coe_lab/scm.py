"""Structural and stochastic causal models, twin networks and exact PC.

Two model families share one interface:

* :class:`Scm` - every endogenous node is a deterministic function of its
  parents and of exogenous variables, whose joint law is given explicitly.
* :class:`StCm` - every node has a CPT; some root nodes are declared
  background (exogenous) variables.

Both declare a ``shared`` set: the variables that keep their value across
the factual and the counterfactual world. It defaults to the exogenous
variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .cbn import Cbn, Query, check_cpt, joint_query
from .exceptions import ModelError, UndefinedEstimand
from .factor import REGIME, Distribution, Factor, Variable, condition, marginalize
from .graph import Dag, validate

REGIME_PREFIX = "F_"
MIRROR_SUFFIX = "'"


def regime_name(node: str) -> str:
    return REGIME_PREFIX + node


def mirror_name(node: str) -> str:
    return node + MIRROR_SUFFIX


@dataclass(frozen=True, eq=False)
class StructuralEquation:
    """``node = table[parents..., exogenous]`` as a total lookup table.

    ``parents`` may contain endogenous and exogenous variables; the
    optional ``exogenous`` variable is simply the last input axis.
    """

    node: Variable
    parents: tuple[Variable, ...]
    exogenous: Variable | None
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        table = np.asarray(self.table)
        if table.dtype.kind == "f":
            if not np.all(table == np.round(table)):
                raise ModelError(f"equation for {self.node.name!r} has non-integer entries")
        table = table.astype(int)
        shape = tuple(v.card for v in self.inputs)
        if table.shape != shape:
            raise ModelError(f"equation for {self.node.name!r} must have shape {shape}, got {table.shape}")
        if table.size and (table.min() < 0 or table.max() >= self.node.card):
            raise ModelError(f"equation for {self.node.name!r} produces values outside 0..{self.node.card - 1}")
        names = [v.name for v in self.inputs]
        if len(set(names)) != len(names) or self.node.name in names:
            raise ModelError(f"equation for {self.node.name!r} has repeated inputs")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, node: Variable, parents: Iterable[Variable], exogenous: Variable | None,
                      fn: Callable[..., int]) -> StructuralEquation:
        """Tabulate ``fn(*parent_values, u)`` over the full input domain."""
        parents = tuple(parents)
        inputs = parents + ((exogenous,) if exogenous is not None else ())
        shape = tuple(v.card for v in inputs)
        table = np.zeros(shape, dtype=int)
        for idx in np.ndindex(*shape):
            table[idx] = int(fn(*idx))
        return cls(node, parents, exogenous, table)

    @property
    def inputs(self) -> tuple[Variable, ...]:
        return self.parents + ((self.exogenous,) if self.exogenous is not None else ())

    def __call__(self, values: Mapping[str, int]) -> int:
        return int(self.table[tuple(values[v.name] for v in self.inputs)])

    def as_cpt(self) -> Factor:
        """Degenerate CPT: a point mass at the equation value."""
        shape = tuple(v.card for v in self.inputs)
        out = np.zeros(shape + (self.node.card,))
        for idx in np.ndindex(*shape):
            out[idx + (self.table[idx],)] = 1.0
        return Factor(self.inputs + (self.node,), out)


class _CausalModel:
    """State shared by :class:`Scm` and :class:`StCm`."""

    variables: dict[str, Variable]
    graph: Dag
    exogenous_names: tuple[str, ...]
    shared: frozenset[str]
    ignorable: bool

    def _finish(self, shared, ignorable):
        self.order = validate(self.graph)
        shared = set(self.exogenous_names) if shared is None else set(shared)
        unknown = shared - set(self.variables)
        if unknown:
            raise ModelError(f"shared set names unknown variables {sorted(unknown)}")
        self.shared = frozenset(shared)
        self.ignorable = bool(ignorable)

    @property
    def endogenous_names(self) -> tuple[str, ...]:
        return tuple(n for n in self.graph.nodes if n not in self.exogenous_names)

    def node_factors(self) -> dict[str, Factor]:
        raise NotImplementedError

    def parents(self, node: str) -> tuple[str, ...]:
        return self.graph.parents(node)


class Scm(_CausalModel):
    """Deterministic structural causal model.

    Parameters
    ----------
    equations : iterable of StructuralEquation
        One equation per endogenous node.
    exogenous : Factor
        Joint distribution of all exogenous variables (dependence allowed).
    shared : iterable of str, optional
        Variables shared across worlds; defaults to the exogenous ones.
    ignorable : bool
        Declare the exposure externally randomized when computing PC.
    """

    def __init__(self, equations: Iterable[StructuralEquation], exogenous: Factor,
                 shared: Iterable[str] | None = None, ignorable: bool = False):
        self.equations: dict[str, StructuralEquation] = {}
        for eq in equations:
            if eq.node.name in self.equations:
                raise ModelError(f"two equations for {eq.node.name!r}")
            self.equations[eq.node.name] = eq
        self.exogenous = Distribution(exogenous.scope, exogenous.values)
        self.exogenous_names = self.exogenous.names
        self.variables = {v.name: v for v in self.exogenous.scope}
        for name in self.equations:
            if name in self.variables:
                raise ModelError(f"exogenous variable {name!r} cannot have an equation")
            self.variables[name] = self.equations[name].node
        edges = []
        for name, eq in self.equations.items():
            for v in eq.inputs:
                if v.name not in self.variables:
                    raise ModelError(f"equation for {name!r} uses undeclared variable {v.name!r}")
                if self.variables[v.name].card != v.card:
                    raise ModelError(f"equation for {name!r}: wrong cardinality for {v.name!r}")
                edges.append((v.name, name))
        self.graph = Dag(self.variables, edges)
        self._finish(shared, ignorable)

    def solve(self, u: Mapping[str, int], do: Mapping[str, int] | None = None) -> dict[str, int]:
        """Evaluate all endogenous values for exogenous state ``u``.

        ``do`` replaces equations by constants (equation replacement).
        """
        do = dict(do or {})
        values = {n: int(u[n]) for n in self.exogenous_names}
        for n in self.order:
            if n in values:
                continue
            values[n] = int(do[n]) if n in do else self.equations[n](values)
        return values

    def support(self):
        """Iterate ``(u, probability)`` over exogenous states of positive mass."""
        for u, p in self.exogenous.assignments():
            if p > 0:
                yield u, p

    def node_factors(self) -> dict[str, Factor]:
        out = _chain_factors(self.exogenous)
        for name, eq in self.equations.items():
            out[name] = eq.as_cpt()
        return out

    def to_stcm(self) -> StCm:
        """The same model with equations written as degenerate CPTs."""
        factors = self.node_factors()
        edges = sorted({(p, n) for n, f in factors.items() for p in f.names if p != n})
        return StCm(self.variables.values(), edges, factors, exogenous=self.exogenous_names,
                    shared=self.shared, ignorable=self.ignorable)


class StCm(_CausalModel):
    """Stochastic causal model: a DAG with CPTs and background variables.

    Parameters
    ----------
    variables, edges, cpts
        As for :class:`~coe_lab.cbn.Cbn`, without regime nodes.
    exogenous : iterable of str
        Background variables (default shared set); their parents, if any,
        must be background variables too.
    shared, ignorable
        See :class:`Scm`.
    """

    def __init__(self, variables: Iterable[Variable], edges: Iterable, cpts: Mapping[str, Factor],
                 exogenous: Iterable[str] = (), shared: Iterable[str] | None = None, ignorable: bool = False):
        self.variables = {}
        for v in variables:
            if v.kind == REGIME or v.name in self.variables:
                raise ModelError(f"invalid or duplicate variable {v.name!r}")
            self.variables[v.name] = v
        self.graph = Dag(self.variables, [tuple(e)[:2] for e in edges])
        self.exogenous_names = tuple(sorted(exogenous))
        for n in self.exogenous_names:
            if n not in self.variables:
                raise ModelError(f"unknown exogenous variable {n!r}")
            if set(self.graph.parents(n)) - set(self.exogenous_names):
                raise ModelError(f"exogenous variable {n!r} may only depend on other exogenous variables")
        self.cpts = {}
        for n in self.graph.nodes:
            if n not in cpts:
                raise ModelError(f"missing CPT for {n!r}")
            f = cpts[n]
            if set(f.names) != {n, *self.graph.parents(n)}:
                raise ModelError(f"CPT of {n!r} has scope {sorted(f.names)}")
            check_cpt(f, n)
            self.cpts[n] = f
        self._finish(shared, ignorable)

    def node_factors(self) -> dict[str, Factor]:
        return dict(self.cpts)


def _chain_factors(joint: Distribution) -> dict[str, Factor]:
    """Write a joint over exogenous variables as a chain of CPTs.

    Independent margins are detected and given no edges.
    """
    names = joint.names
    margins = {n: marginalize(joint, [n]) for n in names}
    indep = Factor.unit()
    for m in margins.values():
        indep = indep * m
    if np.allclose(indep.values, joint.values, rtol=0, atol=1e-12):
        return dict(margins)
    out = {}
    for i, n in enumerate(names):
        upto = marginalize(joint, names[: i + 1])
        prev = marginalize(joint, names[:i]) if i else Factor.unit()
        upper = upto.table(names[: i + 1])
        lower = prev.table(names[:i]) if i else prev.values
        lower = np.expand_dims(lower, -1)
        card = joint.variable(n).card
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(lower > 0, upper / np.where(lower > 0, lower, 1), 1.0 / card)
        out[n] = Factor([joint.variable(k) for k in names[: i + 1]], cond)
    return out


def _model_edges(s: _CausalModel, factors: Mapping[str, Factor]) -> list[tuple[str, str]]:
    return sorted({(p, n) for n, f in factors.items() for p in f.names if p != n})


def scm_to_cbn(s: _CausalModel) -> Cbn:
    """The causal Bayesian network implied by an SCM or StCM.

    Every endogenous node gets a regime node ``F_<name>``; setting it
    replaces the node's equation (or CPT) by a constant.
    """
    factors = s.node_factors()
    regimes = {}
    for n in s.endogenous_names:
        r = regime_name(n)
        if r in s.variables:
            raise ModelError(f"regime node name {r!r} clashes with a model variable")
        regimes[r] = n
    return Cbn(s.variables.values(), _model_edges(s, factors), factors, regimes)


@dataclass(frozen=True)
class PotentialOutcomeJoint:
    """Joint law of the exposure and the potential outcomes ``Y(x)``."""

    dist: Distribution
    exposure: str
    outcome: str

    def po_name(self, x: int) -> str:
        return f"{self.outcome}({x})"

    def ace(self) -> float:
        return self.dist.expectation(self.po_name(1)) - self.dist.expectation(self.po_name(0))

    def consistency_joint(self) -> Distribution:
        """``P(X=x, Y=y)`` implied by ``Y = Y(X)``."""
        xvar = self.dist.variable(self.exposure)
        yvar = self.dist.variable(self.po_name(0))
        out = np.zeros((xvar.card, yvar.card))
        for x in range(xvar.card):
            m = marginalize(condition(self.dist, {self.exposure: x}), [self.po_name(x)])
            out[x] = m.values
        return Distribution([xvar, Variable(self.outcome, yvar.card)], out)

    def pc(self) -> float:
        """``P(Y(0)=0 | X=1, Y(1)=1)``."""
        num = self.dist.prob(**{self.exposure: 1, self.po_name(1): 1, self.po_name(0): 0})
        den = self.dist.prob(**{self.exposure: 1, self.po_name(1): 1})
        if den <= 0:
            raise UndefinedEstimand("P(X=1, Y(1)=1) = 0")
        return num / den


def potential_outcomes(s: Scm, x: str, y: str) -> PotentialOutcomeJoint:
    """Push the exogenous law through ``Y(x) = f_Y(x, U)``."""
    if not isinstance(s, Scm):
        raise ModelError("potential outcomes are derived from deterministic SCMs only")
    for n in (x, y):
        if n not in s.endogenous_names:
            raise ModelError(f"{n!r} is not an endogenous variable")
    xvar, yvar = s.variables[x], s.variables[y]
    table = np.zeros((xvar.card,) + (yvar.card,) * xvar.card)
    for u, p in s.support():
        factual = s.solve(u)[x]
        ys = tuple(s.solve(u, {x: v})[y] for v in range(xvar.card))
        table[(factual,) + ys] += p
    scope = [xvar] + [Variable(f"{y}({v})", yvar.card) for v in range(xvar.card)]
    return PotentialOutcomeJoint(Distribution(scope, table), x, y)


def _resolve(s: _CausalModel, assignment: Mapping[str, object], what: str) -> dict[str, int]:
    out = {}
    for k, v in assignment.items():
        if k not in s.variables:
            raise ModelError(f"{what} assignment names unknown variable {k!r}")
        out[k] = s.variables[k].state_index(v)
    return out


def twin_network(s: _CausalModel, factual: Mapping[str, object], cf_intervention: Mapping[str, object],
                 keep: Iterable[str] = ()) -> Cbn:
    """Build the twin network of ``s`` for a counterfactual intervention.

    Shared variables appear once; every other variable gets a mirror copy
    ``name'`` whose CPT is a copy of the original, so mirror noise is
    independent of factual noise given the parents. Mirrors of intervened
    nodes are mutilated into point masses. Mirror nodes that cannot affect
    the counterfactual descendants (or the mirrors of ``keep``) are pruned.
    Factual endogenous nodes keep regime nodes ``F_<name>``.
    """
    _resolve(s, factual, "factual")
    cf = _resolve(s, cf_intervention, "counterfactual")
    for n in cf:
        if n in s.shared:
            raise ModelError(f"cannot intervene counterfactually on shared variable {n!r}")
    for n in keep:
        if n not in s.variables:
            raise ModelError(f"unknown variable {n!r}")
    base = s.node_factors()
    factors = dict(base)
    edges = set(_model_edges(s, base))
    if s.ignorable and cf:
        observational = scm_to_cbn(s)
        for n in cf:
            # exposure treated as externally randomized: keep only its margin
            factors[n] = joint_query(observational, Query((n,)))
            edges = {e for e in edges if e[1] != n}

    def mirror(n):
        return n if n in s.shared else mirror_name(n)

    mirrored = [n for n in s.graph.nodes if n not in s.shared]
    for n in mirrored:
        if mirror_name(n) in s.variables:
            raise ModelError(f"mirror name {mirror_name(n)!r} clashes with a model variable")
    mirror_factors = {}
    mirror_edges = set()
    for n in mirrored:
        m = mirror(n)
        if n in cf:
            mirror_factors[m] = Factor.point_mass(Variable(m, s.variables[n].card), cf[n])
            continue
        mirror_factors[m] = base[n].rename({k: mirror(k) for k in base[n].names})
        mirror_edges.update((mirror(p), m) for p in s.graph.parents(n))

    # prune mirrors that are barren for the counterfactual part
    children: dict[str, set[str]] = {m: set() for m in mirror_factors}
    for p, c in mirror_edges:
        if p in children:
            children[p].add(c)
    needed = {mirror(n) for n in cf}
    stack = list(needed)
    while stack:
        for c in children[stack.pop()]:
            if c not in needed:
                needed.add(c)
                stack.append(c)
    needed |= {mirror(n) for n in keep if mirror(n) in mirror_factors}
    alive = set(mirror_factors)
    changed = True
    while changed:
        changed = False
        for m in sorted(alive):
            if m not in needed and not (children[m] & alive):
                alive.discard(m)
                changed = True

    variables = list(s.variables.values())
    for m in sorted(alive):
        orig = m[: -len(MIRROR_SUFFIX)]
        v = s.variables[orig]
        variables.append(Variable(m, v.card, labels=v.labels))
        factors[m] = mirror_factors[m]
    edges |= {e for e in mirror_edges if e[1] in alive}
    regimes = {regime_name(n): n for n in s.endogenous_names}
    return Cbn(variables, sorted(edges), factors, regimes)


def pc_exact(s: _CausalModel, factual: Mapping[str, object], counterfactual: Mapping[str, object],
             outcome: str | None = None) -> float:
    """Probability of causation ``P(Y' != y | factual, X' <- x')``.

    With the usual arguments ``factual={"X": 1, "Y": 1}`` and
    ``counterfactual={"X": 0}`` this is ``P(Y'=0 | X=1, Y=1, X' <- 0)``.
    The outcome defaults to the single factual variable that is not
    intervened on counterfactually.
    """
    if outcome is None:
        candidates = [k for k in factual if k not in counterfactual]
        if len(candidates) != 1:
            raise ModelError(f"cannot infer the outcome from factual variables {list(factual)}")
        outcome = candidates[0]
    if outcome not in factual:
        raise ModelError(f"outcome {outcome!r} needs a factual value")
    if outcome in s.shared:
        raise ModelError(f"outcome {outcome!r} is shared across worlds; PC is trivially 0")
    twin = twin_network(s, factual, counterfactual, keep=[outcome])
    y = s.variables[outcome].state_index(factual[outcome])
    post = joint_query(twin, Query((mirror_name(outcome),), evidence=dict(factual)))
    return float(1.0 - post.values[y])
