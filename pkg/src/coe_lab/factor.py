"""Dense factors over discrete variables.

A :class:`Factor` is a nonnegative table indexed by the joint states of an
ordered tuple of variables. Internally the scope is always kept in
lexicographic order of variable names, so two factors describing the same
function compare equal regardless of the order they were built in.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .exceptions import ModelError, ZeroMass

NORMALIZATION_TOL = 1e-9
ZERO_MASS_TOL = 1e-12

STOCHASTIC = "stochastic"
REGIME = "regime"


@dataclass(frozen=True)
class Variable:
    """A discrete variable with states ``0 .. card-1``.

    Regime variables (``kind="regime"``) index interventional regimes: state
    ``x`` means "the target was set to x" and the last state is the idle
    (observational) regime, see :meth:`regime`.
    """

    name: str
    card: int = 2
    kind: str = STOCHASTIC
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ModelError("variable name must be a non-empty string")
        if int(self.card) != self.card or self.card < 2:
            raise ModelError(f"variable {self.name!r}: cardinality must be an integer >= 2")
        if self.kind not in (STOCHASTIC, REGIME):
            raise ModelError(f"variable {self.name!r}: unknown kind {self.kind!r}")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.card or len(set(labels)) != self.card:
                raise ModelError(f"variable {self.name!r}: need {self.card} distinct state labels")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def regime(cls, name: str, target: Variable) -> Variable:
        return cls(name, target.card + 1, REGIME)

    @property
    def idle(self) -> int:
        """Index of the idle state of a regime variable."""
        if self.kind != REGIME:
            raise ModelError(f"{self.name!r} is not a regime variable")
        return self.card - 1

    @property
    def state_labels(self) -> tuple[str, ...]:
        return self.labels if self.labels is not None else tuple(str(i) for i in range(self.card))

    def state_index(self, value) -> int:
        """Resolve a label or an integer to a state index."""
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            idx = int(value)
        else:
            try:
                idx = self.state_labels.index(str(value))
            except ValueError:
                raise ModelError(f"{value!r} is not a state of {self.name!r}") from None
        if not 0 <= idx < self.card:
            raise ModelError(f"state {value!r} out of range for {self.name!r}")
        return idx


class Factor:
    """Nonnegative table over an ordered, duplicate-free scope.

    Parameters
    ----------
    scope : iterable of Variable
        Variables in the axis order of ``values``.
    values : array_like
        Table with one axis per scope variable, or a flat array of the right
        size. Entries must be nonnegative.
    """

    __slots__ = ("scope", "values")

    def __init__(self, scope: Iterable[Variable], values):
        scope = tuple(scope)
        names = [v.name for v in scope]
        if len(set(names)) != len(names):
            raise ModelError(f"duplicate variables in factor scope: {names}")
        shape = tuple(v.card for v in scope)
        arr = np.array(values, dtype=float)
        if arr.size != int(np.prod(shape, dtype=int)):
            raise ModelError(f"factor over {names} needs {int(np.prod(shape))} entries, got {arr.size}")
        arr = arr.reshape(shape)
        if np.any(np.isnan(arr)):
            raise ModelError("factor entries must not be NaN")
        if np.any(arr < 0):
            raise ModelError("factor entries must be nonnegative")
        order = sorted(range(len(scope)), key=lambda i: names[i])
        self.scope = tuple(scope[i] for i in order)
        self.values = np.ascontiguousarray(arr.transpose(order))
        self.values.setflags(write=False)

    @classmethod
    def unit(cls) -> Factor:
        return cls((), 1.0)

    @classmethod
    def point_mass(cls, var: Variable, state: int) -> Factor:
        table = np.zeros(var.card)
        table[state] = 1.0
        return cls((var,), table)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.scope)

    def variable(self, name: str) -> Variable:
        for v in self.scope:
            if v.name == name:
                return v
        raise KeyError(name)

    def total(self) -> float:
        return float(self.values.sum())

    def __mul__(self, other: Factor) -> Factor:
        return multiply(self, other)

    def __getitem__(self, assignment: Mapping[str, int]) -> float:
        return float(self.values[tuple(int(assignment[n]) for n in self.names)])

    def table(self, order: Iterable[str]) -> np.ndarray:
        """Return the values with axes permuted into ``order``."""
        order = list(order)
        if sorted(order) != sorted(self.names):
            raise ModelError(f"axis order {order} does not match scope {list(self.names)}")
        return self.values.transpose([self.names.index(n) for n in order])

    def assignments(self):
        """Iterate ``(assignment_dict, value)`` over all table entries."""
        for idx in itertools.product(*(range(v.card) for v in self.scope)):
            yield dict(zip(self.names, idx)), float(self.values[idx])

    def allclose(self, other: Factor, atol: float = 1e-9) -> bool:
        return self.scope == other.scope and np.allclose(self.values, other.values, rtol=0, atol=atol)

    def __eq__(self, other):
        if not isinstance(other, Factor):
            return NotImplemented
        return self.scope == other.scope and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}({list(self.names)}, {self.values.tolist()})"

    def rename(self, mapping: Mapping[str, str]) -> Factor:
        scope = [Variable(mapping.get(v.name, v.name), v.card, v.kind, v.labels) for v in self.scope]
        return Factor(scope, self.values)


class Distribution(Factor):
    """A factor whose entries sum to one."""

    __slots__ = ()

    def __init__(self, scope, values):
        super().__init__(scope, values)
        if abs(self.values.sum() - 1.0) > NORMALIZATION_TOL:
            raise ModelError(f"distribution sums to {self.values.sum()!r}, not 1")

    def prob(self, **assignment) -> float:
        """Marginal probability of a partial assignment, e.g. ``d.prob(Y=1)``."""
        unknown = set(assignment) - set(self.names)
        if unknown:
            raise ModelError(f"unknown variables {sorted(unknown)}")
        return condition(self, assignment).total()

    def expectation(self, name: str) -> float:
        """Mean of a variable, coding its states by their indices."""
        marg = marginalize(self, [name]).values
        return float(np.dot(np.arange(marg.size), marg))


def _check_compatible(a: Factor, b: Factor) -> None:
    cards = {v.name: v.card for v in a.scope}
    for v in b.scope:
        if v.name in cards and cards[v.name] != v.card:
            raise ModelError(f"variable {v.name!r} has cardinality {cards[v.name]} and {v.card}")


def multiply(a: Factor, b: Factor) -> Factor:
    """Pointwise product on the union of the two scopes."""
    _check_compatible(a, b)
    merged = {v.name: v for v in a.scope}
    for v in b.scope:
        merged.setdefault(v.name, v)
    scope = [merged[n] for n in sorted(merged)]

    # both operands are already in canonical order, so inserting unit axes
    # lines them up with the merged scope
    def expand(f: Factor) -> np.ndarray:
        present = set(f.names)
        return f.values.reshape([v.card if v.name in present else 1 for v in scope])

    return Factor(scope, expand(a) * expand(b))


def marginalize(f: Factor, keep: Iterable[str]) -> Factor:
    """Sum out every variable not in ``keep``."""
    keep = set(keep)
    missing = keep - set(f.names)
    if missing:
        raise ModelError(f"cannot keep {sorted(missing)}: not in scope {list(f.names)}")
    axes = tuple(i for i, n in enumerate(f.names) if n not in keep)
    scope = [v for v in f.scope if v.name in keep]
    values = f.values.sum(axis=axes) if axes else f.values
    return type(f)(scope, values) if isinstance(f, Distribution) else Factor(scope, values)


def sum_out(f: Factor, names: Iterable[str]) -> Factor:
    names = set(names)
    return marginalize(f, [n for n in f.names if n not in names])


def condition(f: Factor, evidence: Mapping[str, int]) -> Factor:
    """Slice ``f`` at the evidence states; the result is not renormalized."""
    missing = set(evidence) - set(f.names)
    if missing:
        raise ModelError(f"evidence on {sorted(missing)} outside scope {list(f.names)}")
    index = []
    for v in f.scope:
        if v.name in evidence:
            index.append(v.state_index(evidence[v.name]))
        else:
            index.append(slice(None))
    scope = [v for v in f.scope if v.name not in evidence]
    return Factor(scope, f.values[tuple(index)])


def normalize(f: Factor) -> Distribution:
    total = f.total()
    if total <= ZERO_MASS_TOL:
        raise ZeroMass(f"factor over {list(f.names)} has total mass {total!r}")
    return Distribution(f.scope, f.values / total)


def product(factors: Iterable[Factor]) -> Factor:
    out = Factor.unit()
    for f in factors:
        out = multiply(out, f)
    return out
