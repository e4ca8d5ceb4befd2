"""Interval bounds on the probability of causation.

PC = P(Y(0)=0 | X=1, Y(1)=1) is not identified from data because the
dependence between Y(0) and Y(1) is never observed. The functions here
return the sharp interval that the available margins allow, under several
kinds of extra information: none, a covariate, experimental data without
ignorability, or a complete mediator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .exceptions import InfeasibleData, ModelError, PositivityViolation, UndefinedEstimand
from .lp import cell_indicator, lp_pc_bounds

TOL = 1e-12
CONSISTENCY_TOL = 1e-6
BOUND_TOL = 1e-9

METHODS = ("basic", "covariate", "conditional", "tian-pearl", "mediator", "lp")


def _prob(name: str, value) -> float:
    value = float(value)
    if not (-BOUND_TOL <= value <= 1 + BOUND_TOL) or np.isnan(value):
        raise ModelError(f"{name} = {value!r} is not a probability")
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class Margins:
    """Exposure-response margins.

    ``p_y1_x1`` and ``p_y1_x0`` are P(Y=1 | X=x), read as interventional
    probabilities or as observational ones under ignorability. ``p_x1`` and
    ``p_y1_do_x0`` are only needed for the non-ignorable bounds.
    """

    p_y1_x1: float
    p_y1_x0: float
    p_x1: float | None = None
    p_y1_do_x0: float | None = None

    def __post_init__(self):
        for name in ("p_y1_x1", "p_y1_x0", "p_x1", "p_y1_do_x0"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _prob(name, value))

    # JSON keys used by margins files
    _KEYS = {"pY1_given_X1": "p_y1_x1", "pY1_given_X0": "p_y1_x0", "pX1": "p_x1", "pY1_do_X0": "p_y1_do_x0"}

    @classmethod
    def from_dict(cls, d: dict) -> Margins:
        kwargs = {}
        for key, value in d.items():
            attr = cls._KEYS.get(key, key)
            if attr not in cls._KEYS.values():
                raise ModelError(f"unknown margins key {key!r}")
            kwargs[attr] = value
        if "p_y1_x1" not in kwargs or "p_y1_x0" not in kwargs:
            raise ModelError("margins need pY1_given_X1 and pY1_given_X0")
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out = {}
        for key, attr in self._KEYS.items():
            if getattr(self, attr) is not None:
                out[key] = getattr(self, attr)
        return out


@dataclass(frozen=True)
class PoJoint:
    """The joint of (Y(0), Y(1)) parameterized by effect, balance and slack."""

    tau: float
    rho: float
    xi: float

    def __post_init__(self):
        if not abs(self.tau) - BOUND_TOL <= self.xi <= 1 - abs(self.rho) + BOUND_TOL:
            raise InfeasibleData(f"slack {self.xi!r} outside [{abs(self.tau)!r}, {1 - abs(self.rho)!r}]")

    def cells(self) -> np.ndarray:
        """2x2 table indexed ``[y0, y1]``."""
        t, r, x = self.tau, self.rho, self.xi
        return 0.5 * np.array([[1 - r - x, x + t], [x - t, 1 + r - x]])


@dataclass(frozen=True)
class BoundsInterval:
    lower: float
    upper: float
    method: str
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if not (-BOUND_TOL <= lo <= hi + BOUND_TOL and hi <= 1 + BOUND_TOL):
            raise ValueError(f"invalid interval [{lo!r}, {hi!r}]")
        lo, hi = min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0)
        object.__setattr__(self, "lower", min(lo, hi))
        object.__setattr__(self, "upper", hi)
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def __contains__(self, value: float) -> bool:
        return self.lower - BOUND_TOL <= value <= self.upper + BOUND_TOL

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "method": self.method, "diagnostics": self.diagnostics}


def tau_rho(m: Margins) -> tuple[float, float]:
    """Effect ``tau = P(Y=1|X=1) - P(Y=1|X=0)`` and ``rho = P(Y=1|X=1) - P(Y=0|X=0)``."""
    return m.p_y1_x1 - m.p_y1_x0, m.p_y1_x1 - (1 - m.p_y1_x0)


def pc_point(j: PoJoint) -> float:
    """PC for a fully specified joint: ``(xi + tau) / (1 + tau + rho)``."""
    den = 1 + j.tau + j.rho
    if den <= TOL:
        raise UndefinedEstimand("P(Y(1)=1) = 0, PC is undefined")
    return (j.xi + j.tau) / den


def risk_ratio(p1: float, p0: float) -> float:
    return float("inf") if p0 <= 0 else p1 / p0


def _basic(p1: float, p0: float) -> tuple[float, float]:
    if p1 <= TOL:
        raise UndefinedEstimand("P(Y=1 | X=1) = 0: the conditioning event Y(1)=1 is null")
    return max(0.0, (p1 - p0) / p1), min(1.0, (1 - p0) / p1)


def pc_bounds_basic(m: Margins) -> BoundsInterval:
    """``max{0, 1 - 1/RR} <= PC <= min{1, P(Y=0|X=0) / P(Y=1|X=1)}``."""
    lo, hi = _basic(m.p_y1_x1, m.p_y1_x0)
    tau, rho = tau_rho(m)
    return BoundsInterval(lo, hi, "basic", {"rr": risk_ratio(m.p_y1_x1, m.p_y1_x0), "tau": tau, "rho": rho})


def basic_lp(m: Margins) -> BoundsInterval:
    """The basic bounds recomputed as a linear program over the 2x2 joint."""
    cells = [(y0, y1) for y0 in (0, 1) for y1 in (0, 1)]
    a = np.vstack([
        np.ones(4),
        cell_indicator(cells, lambda y0, y1: y1 == 1),
        cell_indicator(cells, lambda y0, y1: y0 == 1),
    ])
    b = [1.0, m.p_y1_x1, m.p_y1_x0]
    if m.p_y1_x1 <= TOL:
        raise UndefinedEstimand("P(Y=1 | X=1) = 0")
    lo, hi = lp_pc_bounds(a, b, cell_indicator(cells, lambda y0, y1: y0 == 0 and y1 == 1), scale=m.p_y1_x1)
    return BoundsInterval(lo, hi, "lp")


@dataclass(frozen=True)
class StratifiedData:
    """Per-stratum exposure-response probabilities for a discrete covariate S.

    Parameters
    ----------
    p_y1_x1, p_y1_x0 : sequence of float
        P(Y=1 | X=x, S=s) for each stratum (NaN where undefined).
    p_s_x1 : sequence of float
        P(S=s | X=1).
    p_s_x0 : sequence of float, optional
        P(S=s | X=0); with ``p_x1`` needed for the back-door comparison.
    p_x1 : float, optional
        P(X=1).
    """

    p_y1_x1: Sequence[float]
    p_y1_x0: Sequence[float]
    p_s_x1: Sequence[float]
    p_s_x0: Sequence[float] | None = None
    p_x1: float | None = None

    def __post_init__(self):
        a = np.asarray(self.p_y1_x1, dtype=float)
        b = np.asarray(self.p_y1_x0, dtype=float)
        w1 = np.asarray(self.p_s_x1, dtype=float)
        if not (a.shape == b.shape == w1.shape) or a.ndim != 1 or a.size == 0:
            raise ModelError("stratum arrays must be one-dimensional and of equal length")
        arrays = {"p_y1_x1": a, "p_y1_x0": b, "p_s_x1": w1}
        if self.p_s_x0 is not None:
            w0 = np.asarray(self.p_s_x0, dtype=float)
            if w0.shape != a.shape:
                raise ModelError("p_s_x0 must match the other stratum arrays")
            arrays["p_s_x0"] = w0
        for name, arr in arrays.items():
            finite = arr[~np.isnan(arr)]
            if np.any(finite < -BOUND_TOL) or np.any(finite > 1 + BOUND_TOL):
                raise ModelError(f"{name} entries must be probabilities")
            object.__setattr__(self, name, np.clip(arr, 0.0, 1.0))
        for name in ("p_s_x1", "p_s_x0"):
            arr = getattr(self, name)
            if arr is not None:
                if np.any(np.isnan(arr)) or abs(arr.sum() - 1) > BOUND_TOL:
                    raise ModelError(f"{name} must sum to 1")
        if self.p_x1 is not None:
            object.__setattr__(self, "p_x1", _prob("p_x1", self.p_x1))

    @classmethod
    def from_joint(cls, joint) -> StratifiedData:
        """From a table ``joint[s, x, y]`` of probabilities or counts."""
        t = np.asarray(joint, dtype=float)
        if t.ndim != 3 or t.shape[1:] != (2, 2) or np.any(t < 0) or t.sum() <= 0:
            raise ModelError("joint must be a nonnegative array of shape (n_strata, 2, 2)")
        t = t / t.sum()
        p_sx = t.sum(axis=2)
        p_s = p_sx.sum(axis=1)
        for s in range(t.shape[0]):
            if p_s[s] > TOL and min(p_sx[s]) <= TOL:
                x = int(np.argmin(p_sx[s]))
                raise PositivityViolation(f"stratum {s} never has X={x}")
        with np.errstate(invalid="ignore", divide="ignore"):
            a = t[:, 1, 1] / p_sx[:, 1]
            b = t[:, 0, 1] / p_sx[:, 0]
        p_x1 = p_sx[:, 1].sum()
        if p_x1 <= TOL or p_x1 >= 1 - TOL:
            raise PositivityViolation("exposure is constant in the data")
        return cls(a, b, p_sx[:, 1] / p_x1, p_sx[:, 0] / (1 - p_x1), p_x1)

    @classmethod
    def from_desired_exposure(cls, m: Margins) -> StratifiedData:
        """Stratify on D = desired exposure, recovering the non-ignorable case.

        In the observational population D equals X; in an experiment D is
        independent of the assigned exposure. The counterfactual stratum
        probabilities are solved from the experimental margin.
        """
        if m.p_x1 is None or m.p_y1_do_x0 is None:
            raise ModelError("needs p_x1 and p_y1_do_x0")
        p = m.p_x1
        if p <= TOL:
            raise UndefinedEstimand("P(X=1) = 0")
        cf = _solve_counterfactual(m)
        # the D=0 counterfactual P(Y(1)=1 | D=0) does not enter the bounds for an exposed case
        return cls([np.nan, m.p_y1_x1], [m.p_y1_x0, cf], [0.0, 1.0])

    @property
    def n_strata(self) -> int:
        return len(self.p_y1_x1)

    @property
    def p_s(self) -> np.ndarray:
        if self.p_s_x0 is None or self.p_x1 is None:
            raise ModelError("P(S) needs p_s_x0 and p_x1")
        return self.p_x1 * self.p_s_x1 + (1 - self.p_x1) * self.p_s_x0

    def margins(self, s: int) -> Margins:
        return Margins(self.p_y1_x1[s], self.p_y1_x0[s])

    def active(self) -> np.ndarray:
        """Strata carrying exposed mass; strata with P(S=s|X=1)=0 are skipped."""
        w = self.p_s_x1
        active = w > TOL
        for s in np.flatnonzero(~active):
            if self.p_s_x0 is not None and self.p_x1 is not None and self.p_s[s] > TOL:
                raise PositivityViolation(f"stratum {s} has positive mass but never receives X=1")
            warnings.warn(f"stratum {s} has no exposed mass and is skipped", stacklevel=3)
        bad = active & (np.isnan(self.p_y1_x1) | np.isnan(self.p_y1_x0))
        if np.any(bad):
            raise PositivityViolation(f"strata {np.flatnonzero(bad).tolist()} lack exposure-specific risks")
        return active


def _covariate_terms(d: StratifiedData):
    act = d.active()
    a, b, w = d.p_y1_x1[act], d.p_y1_x0[act], d.p_s_x1[act]
    p1 = float(np.dot(a, w))
    if p1 <= TOL:
        raise UndefinedEstimand("P(Y=1 | X=1) = 0")
    return a, b, w, p1


def pc_bounds_covariate(d: StratifiedData) -> BoundsInterval:
    """Bounds for an individual whose covariate value is unknown.

    Each stratum's slack is free, so the per-stratum bounds are attained
    simultaneously and aggregate with weights P(S=s | X=1, Y=1).
    """
    a, b, w, p1 = _covariate_terms(d)
    lower = float(np.dot(np.maximum(0.0, a - b), w)) / p1
    upper = 1.0 - float(np.dot(np.maximum(0.0, a - (1 - b)), w)) / p1
    per_stratum = []
    for s in range(d.n_strata):
        try:
            lo, hi = _basic(d.p_y1_x1[s], d.p_y1_x0[s])
            per_stratum.append({"stratum": s, "lower": lo, "upper": hi})
        except UndefinedEstimand:
            per_stratum.append({"stratum": s, "lower": None, "upper": None})
    return BoundsInterval(lower, upper, "covariate", {"p_y1_x1": p1, "per_stratum": per_stratum})


def pc_bounds_conditional(d: StratifiedData, s: int) -> BoundsInterval:
    """Basic bounds within the individual's own stratum ``s``."""
    if not 0 <= s < d.n_strata:
        raise ModelError(f"unknown stratum {s}")
    a, b = d.p_y1_x1[s], d.p_y1_x0[s]
    if np.isnan(a) or np.isnan(b) or d.p_s_x1[s] <= TOL:
        raise PositivityViolation(f"stratum {s} has no exposed mass")
    lo, hi = _basic(a, b)
    return BoundsInterval(lo, hi, "conditional", {"stratum": s, "rr": risk_ratio(a, b)})


def _solve_counterfactual(m: Margins) -> float:
    """P(Y(0)=1 | X=1), solved from the experimental and observational margins."""
    p = m.p_x1
    value = (m.p_y1_do_x0 - m.p_y1_x0 * (1 - p)) / p
    if value < -CONSISTENCY_TOL or value > 1 + CONSISTENCY_TOL:
        raise InfeasibleData(
            f"observational and experimental margins are inconsistent: P(Y(0)=1 | X=1) = {value!r}")
    return min(max(value, 0.0), 1.0)


def pc_bounds_tian_pearl(m: Margins) -> BoundsInterval:
    """Bounds without ignorability, from observational plus experimental data."""
    if m.p_x1 is None or m.p_y1_do_x0 is None:
        raise ModelError("non-ignorable bounds need p_x1 and p_y1_do_x0")
    p = m.p_x1
    p_x1y1 = p * m.p_y1_x1
    if p_x1y1 <= TOL:
        raise UndefinedEstimand("P(X=1, Y=1) = 0")
    cf = _solve_counterfactual(m)
    p_y1 = p_x1y1 + (1 - p) * m.p_y1_x0
    p_x0y0 = (1 - p) * (1 - m.p_y1_x0)
    lower = max(0.0, (p_y1 - m.p_y1_do_x0) / p_x1y1)
    upper = min(1.0, ((1 - m.p_y1_do_x0) - p_x0y0) / p_x1y1)
    return BoundsInterval(lower, upper, "tian-pearl", {"p_y1": p_y1, "p_x1y1": p_x1y1, "p_y0_cf_x1": cf})


def tian_pearl_lp(m: Margins) -> BoundsInterval:
    """Non-ignorable bounds as an LP over joints of (X, Y(0), Y(1))."""
    if m.p_x1 is None or m.p_y1_do_x0 is None:
        raise ModelError("needs p_x1 and p_y1_do_x0")
    cells = [(x, y0, y1) for x in (0, 1) for y0 in (0, 1) for y1 in (0, 1)]
    p = m.p_x1
    a = np.vstack([
        np.ones(8),
        cell_indicator(cells, lambda x, y0, y1: x == 1),
        cell_indicator(cells, lambda x, y0, y1: x == 1 and y1 == 1),
        cell_indicator(cells, lambda x, y0, y1: x == 0 and y0 == 1),
        cell_indicator(cells, lambda x, y0, y1: y0 == 1),
    ])
    b = [1.0, p, p * m.p_y1_x1, (1 - p) * m.p_y1_x0, m.p_y1_do_x0]
    if p * m.p_y1_x1 <= TOL:
        raise UndefinedEstimand("P(X=1, Y=1) = 0")
    obj = cell_indicator(cells, lambda x, y0, y1: x == 1 and y1 == 1 and y0 == 0)
    lo, hi = lp_pc_bounds(a, b, obj, scale=p * m.p_y1_x1)
    return BoundsInterval(lo, hi, "lp")


def _same_side(num: np.ndarray, den: np.ndarray) -> bool:
    """Whether all ratios num/den lie on one side of 1 (ties count for both)."""
    diff = num - den
    return not (np.any(diff > TOL) and np.any(diff < -TOL))


@dataclass(frozen=True)
class BoundsComparison:
    covariate: BoundsInterval
    tian_pearl: BoundsInterval
    lower_equal: bool
    upper_equal: bool
    lower_same_side: bool
    upper_same_side: bool

    @property
    def monotone(self) -> bool:
        """Using S never loosens the bounds."""
        return (self.tian_pearl.lower <= self.covariate.lower + BOUND_TOL
                and self.covariate.upper <= self.tian_pearl.upper + BOUND_TOL)

    @property
    def equality_matches(self) -> bool:
        return self.lower_equal == self.lower_same_side and self.upper_equal == self.upper_same_side

    def to_dict(self) -> dict:
        return {
            "covariate": self.covariate.to_dict(),
            "tian_pearl": self.tian_pearl.to_dict(),
            "lower_equal": self.lower_equal,
            "upper_equal": self.upper_equal,
            "lower_same_side": self.lower_same_side,
            "upper_same_side": self.upper_same_side,
            "monotone": self.monotone,
        }


def back_door_p_y1_do_x0(d: StratifiedData) -> float:
    """P(Y=1 | X <- 0) by adjusting for S."""
    p_s = d.p_s
    used = p_s > TOL
    if np.any(np.isnan(d.p_y1_x0[used])):
        raise PositivityViolation("some stratum never receives X=0")
    return float(np.dot(d.p_y1_x0[used], p_s[used]))


def stratified_margins(d: StratifiedData) -> Margins:
    """Marginal observational margins plus the back-door interventional one."""
    used_1 = d.p_s_x1 > TOL
    used_0 = d.p_s_x0 > TOL
    a = float(np.dot(d.p_y1_x1[used_1], d.p_s_x1[used_1]))
    b = float(np.dot(d.p_y1_x0[used_0], d.p_s_x0[used_0]))
    return Margins(a, b, d.p_x1, back_door_p_y1_do_x0(d))


def compare_bounds(d: StratifiedData) -> BoundsComparison:
    """Covariate bounds against the bounds that ignore S."""
    cov = pc_bounds_covariate(d)
    tp = pc_bounds_tian_pearl(stratified_margins(d))
    act = d.p_s_x1 > TOL
    a, b = d.p_y1_x1[act], d.p_y1_x0[act]
    return BoundsComparison(
        covariate=cov,
        tian_pearl=tp,
        lower_equal=abs(cov.lower - tp.lower) <= BOUND_TOL,
        upper_equal=abs(cov.upper - tp.upper) <= BOUND_TOL,
        lower_same_side=_same_side(a, b),
        upper_same_side=_same_side(a, 1 - b),
    )


@dataclass(frozen=True)
class MediatorData:
    """Complete-mediator inputs ``P(M=1 | X=x)`` and ``P(Y=1 | M=m)``."""

    p_m1_given_x: tuple[float, float]
    p_y1_given_m: tuple[float, float]

    def __post_init__(self):
        for name in ("p_m1_given_x", "p_y1_given_m"):
            value = tuple(getattr(self, name))
            if len(value) != 2:
                raise ModelError(f"{name} needs two entries")
            object.__setattr__(self, name, tuple(_prob(name, v) for v in value))

    @classmethod
    def from_joint(cls, joint) -> MediatorData:
        """From a table ``joint[x, m, y]`` of probabilities or counts."""
        t = np.asarray(joint, dtype=float)
        if t.shape != (2, 2, 2) or np.any(t < 0):
            raise ModelError("joint must be a nonnegative (2, 2, 2) array")
        p_xm = t.sum(axis=2)
        p_m = t.sum(axis=(0, 2))
        if np.any(p_xm.sum(axis=1) <= TOL) or np.any(p_m <= TOL):
            raise PositivityViolation("every exposure and mediator level must be observed")
        q = p_xm[:, 1] / p_xm.sum(axis=1)
        r = t.sum(axis=0)[:, 1] / p_m
        return cls(tuple(q), tuple(r))

    def margins(self) -> Margins:
        """Implied P(Y=1 | X=x) = sum_m P(Y=1 | M=m) P(M=m | X=x)."""
        q0, q1 = self.p_m1_given_x
        r0, r1 = self.p_y1_given_m
        return Margins(q1 * r1 + (1 - q1) * r0, q0 * r1 + (1 - q0) * r0)


_MEDIATOR_CELLS = [(m0, m1, y0, y1) for m0 in (0, 1) for m1 in (0, 1) for y0 in (0, 1) for y1 in (0, 1)]


def pc_bounds_mediator(d: MediatorData, independent: bool = False) -> BoundsInterval:
    """Bounds on PC when a complete mediator M is observed in the study.

    By default this solves a linear program over the 16 joint response
    types ``(M(0), M(1), Y(M=0), Y(M=1))`` matching the mediator and outcome
    margins and the implied exposure-outcome margins. With
    ``independent=True`` the response types of M and Y are additionally
    taken to be independent, which makes PC bilinear in the two slacks; the
    sharp bounds then sit at corners of the slack rectangle.
    """
    q0, q1 = d.p_m1_given_x
    r0, r1 = d.p_y1_given_m
    implied = d.margins()
    p1 = implied.p_y1_x1
    if p1 <= TOL:
        raise UndefinedEstimand("P(Y=1 | X=1) = 0")
    basic = pc_bounds_basic(implied)
    diag = {"basic_lower": basic.lower, "basic_upper": basic.upper, "p_y1_x1": p1,
            "p_y1_x0": implied.p_y1_x0, "independent": independent}
    if independent:
        lo, hi = _mediator_independent(q0, q1, r0, r1)
        return BoundsInterval(lo / p1, hi / p1, "mediator", diag)
    cells = _MEDIATOR_CELLS

    def outcome_via(x):
        # Y(M(x)) = Y(m) evaluated at m = M(x)
        return lambda m0, m1, y0, y1: (y1 if (m1 if x else m0) else y0)

    a = np.vstack([
        np.ones(16),
        cell_indicator(cells, lambda m0, m1, y0, y1: m0 == 1),
        cell_indicator(cells, lambda m0, m1, y0, y1: m1 == 1),
        cell_indicator(cells, lambda m0, m1, y0, y1: y0 == 1),
        cell_indicator(cells, lambda m0, m1, y0, y1: y1 == 1),
        cell_indicator(cells, lambda *c: outcome_via(1)(*c) == 1),
        cell_indicator(cells, lambda *c: outcome_via(0)(*c) == 1),
    ])
    b = [1.0, q0, q1, r0, r1, p1, implied.p_y1_x0]
    obj = cell_indicator(cells, lambda *c: outcome_via(1)(*c) == 1 and outcome_via(0)(*c) == 0)
    lo, hi = lp_pc_bounds(a, b, obj, scale=p1)
    return BoundsInterval(lo, hi, "mediator", diag)


def _mediator_independent(q0, q1, r0, r1) -> tuple[float, float]:
    # a = P(M(0)=0, M(1)=1), c = P(Y(0)=0, Y(1)=1); the reverse types carry
    # a - tau_m and c - tau_y, and the PC numerator is a*c + (a-tau_m)(c-tau_y)
    tau_m, tau_y = q1 - q0, r1 - r0
    a_range = (max(0.0, tau_m), min(q1, 1 - q0))
    c_range = (max(0.0, tau_y), min(r1, 1 - r0))
    values = [a * c + (a - tau_m) * (c - tau_y) for a in a_range for c in c_range]
    return min(values), max(values)
