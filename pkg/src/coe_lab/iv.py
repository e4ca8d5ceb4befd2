"""Instrumental variables with binary instrument, exposure and outcome.

Response types are indexed ``[x0, x1, y0, y1]`` where ``(x0, x1)`` are the
exposures taken under Z=0 and Z=1 and ``(y0, y1)`` are the outcomes under
X=0 and X=1. Under the exclusion restriction, ``Y(Z=z) = y[x_z]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .cbn import Query, joint_query
from .exceptions import InfeasibleData, ModelError, UndefinedEstimand, WeakInstrument
from .lp import lp_pc_bounds

WEAK_TOL = 1e-9
TYPES = tuple(itertools.product((0, 1), repeat=4))
COMPLIANCE = {(0, 1): "complier", (0, 0): "never-taker", (1, 1): "always-taker", (1, 0): "defier"}


@dataclass(frozen=True)
class IvData:
    """Conditional law ``P(X=x, Y=y | Z=z)`` as an array ``[z, x, y]``."""

    p_xy_given_z: np.ndarray
    p_z1: float | None = None

    def __post_init__(self):
        t = np.asarray(self.p_xy_given_z, dtype=float)
        if t.shape != (2, 2, 2) or np.any(t < -1e-12):
            raise ModelError("IV data must be a nonnegative (2, 2, 2) array indexed [z, x, y]")
        sums = t.sum(axis=(1, 2))
        if np.any(np.abs(sums - 1) > 1e-9):
            raise ModelError(f"P(x, y | z) must sum to 1 for each z, got {sums.tolist()}")
        t = np.clip(t, 0.0, None)
        t.setflags(write=False)
        object.__setattr__(self, "p_xy_given_z", t)

    @classmethod
    def from_counts(cls, counts, smooth: float = 0.0) -> IvData:
        """From counts ``n[z, x, y]`` with optional add-``smooth`` smoothing."""
        n = np.asarray(counts, dtype=float)
        if n.shape != (2, 2, 2) or np.any(n < 0):
            raise ModelError("counts must be a nonnegative (2, 2, 2) array indexed [z, x, y]")
        n = n + smooth
        per_z = n.sum(axis=(1, 2))
        if np.any(per_z <= 0):
            raise ModelError("both instrument arms need observations")
        return cls(n / per_z[:, None, None], float(per_z[1] / per_z.sum()))

    def mean_x(self, z: int) -> float:
        return float(self.p_xy_given_z[z, 1].sum())

    def mean_y(self, z: int) -> float:
        return float(self.p_xy_given_z[z, :, 1].sum())

    @property
    def ace_zx(self) -> float:
        return self.mean_x(1) - self.mean_x(0)

    @property
    def ace_zy(self) -> float:
        return self.mean_y(1) - self.mean_y(0)

    @property
    def is_availability(self) -> bool:
        """True when the exposure is never taken without the instrument."""
        return self.mean_x(0) <= WEAK_TOL


@dataclass(frozen=True)
class LinearSemParams:
    """``X = alpha0 + alpha1 Z + U_X`` and ``Y = beta0 + beta1 X + U_Y``."""

    alpha0: float
    alpha1: float
    beta0: float
    beta1: float
    resid_cov: tuple[tuple[float, float], tuple[float, float]] = ((1.0, 0.0), (0.0, 1.0))

    def __post_init__(self):
        cov = np.asarray(self.resid_cov, dtype=float)
        if cov.shape != (2, 2) or not np.allclose(cov, cov.T):
            raise ModelError("residual covariance must be a symmetric 2x2 matrix")
        if np.linalg.eigvalsh(cov).min() < -1e-12:
            raise ModelError("residual covariance must be positive semidefinite")

    @property
    def w0(self) -> float:
        """Mean outcome level when X is set to 0, E(Y | X <- 0)."""
        return self.beta0


@dataclass(frozen=True)
class PrincipalStrata:
    """Distribution over the 16 response types, indexed ``[x0, x1, y0, y1]``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(2, 2, 2, 2)
        if np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-9:
            raise ModelError("principal strata must form a probability distribution over 16 types")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_compliance(cls, mass: Mapping[str, float], outcome: Mapping[str, np.ndarray]) -> PrincipalStrata:
        """Build from compliance-class masses and per-class ``(y0, y1)`` tables."""
        p = np.zeros((2, 2, 2, 2))
        for (x0, x1), label in COMPLIANCE.items():
            w = mass.get(label, 0.0)
            if w:
                p[x0, x1] = w * np.asarray(outcome[label], dtype=float).reshape(2, 2)
        return cls(p)

    def compliance_mass(self, label: str) -> float:
        (x0, x1), = [k for k, v in COMPLIANCE.items() if v == label]
        return float(self.probs[x0, x1].sum())

    @property
    def defier_mass(self) -> float:
        return self.compliance_mass("defier")

    @property
    def monotone(self) -> bool:
        return self.defier_mass <= 1e-12

    def implied_data(self) -> IvData:
        """``P(X=x, Y=y | Z=z)`` when Z is independent of the response types."""
        t = np.zeros((2, 2, 2))
        for x0, x1, y0, y1 in TYPES:
            w = self.probs[x0, x1, y0, y1]
            for z, x in ((0, x0), (1, x1)):
                t[z, x, (y0, y1)[x]] += w
        return IvData(t)


@dataclass(frozen=True)
class IvEstimands:
    ace_zx: float
    ace_zy: float
    ace_xy: float
    late: float


def individual_effects(x0: int, x1: int, y0: int, y1: int) -> tuple[int, int, int]:
    """``(ICE_ZX, ICE_ZY, ICE_XY)`` for one response type."""
    y_z0 = y1 * x0 + y0 * (1 - x0)
    y_z1 = y1 * x1 + y0 * (1 - x1)
    return x1 - x0, y_z1 - y_z0, y1 - y0


def strata_estimands(p: PrincipalStrata, allow_undefined: bool = False) -> IvEstimands:
    """Population and complier-average effects implied by the strata.

    Without compliers the complier-average effect is undefined: this
    raises :class:`UndefinedEstimand` unless ``allow_undefined``, in which
    case ``late`` is NaN.
    """
    ace_zx = ace_zy = ace_xy = 0.0
    for t in TYPES:
        w = p.probs[t]
        zx, zy, xy = individual_effects(*t)
        ace_zx += w * zx
        ace_zy += w * zy
        ace_xy += w * xy
    compliers = p.probs[0, 1]
    mass = compliers.sum()
    if mass <= 1e-12:
        if not allow_undefined:
            raise UndefinedEstimand("no compliers: the local average treatment effect is undefined")
        late = float("nan")
    else:
        late = float((compliers[0, 1] - compliers[1, 0]) / mass)
    return IvEstimands(float(ace_zx), float(ace_zy), float(ace_xy), late)


def wald_ratio(data, threshold: float = WEAK_TOL) -> float:
    """Ratio of the Z-coefficients in the regressions of Y on Z and X on Z.

    Accepts :class:`IvData`, :class:`LinearSemParams` (returns ``beta1``)
    or a mapping/DataFrame with columns ``z``, ``x``, ``y``.
    """
    if isinstance(data, LinearSemParams):
        if abs(data.alpha1) <= threshold:
            raise WeakInstrument("alpha1 = 0: Z does not move X")
        return float(data.beta1)
    if isinstance(data, IvData):
        den, num = data.ace_zx, data.ace_zy
    else:
        z, x, y = (np.asarray(data[k], dtype=float) for k in ("z", "x", "y"))
        zc = z - z.mean()
        den = float(np.dot(zc, x - x.mean()))
        num = float(np.dot(zc, y - y.mean()))
        szz = float(np.dot(zc, zc))
        if szz <= 0:
            raise WeakInstrument("the instrument is constant")
        den, num = den / szz, num / szz
    if abs(den) <= threshold:
        raise WeakInstrument(f"first-stage coefficient {den!r} is below {threshold!r}")
    return num / den


def late(data: IvData, monotone: bool = True, threshold: float = WEAK_TOL) -> float:
    """``ACE_ZY / ACE_ZX``, the complier-average effect under monotonicity.

    Monotonicity cannot be tested; it is taken as given unless
    ``monotone=False``, in which case the ratio is refused.
    """
    if not monotone and not data.is_availability:
        raise ModelError("the ratio is only a local average effect under monotonicity")
    if abs(data.ace_zx) <= threshold:
        raise WeakInstrument(f"ACE_ZX = {data.ace_zx!r}")
    if data.ace_zx < 0:
        raise InfeasibleData("monotonicity implies ACE_ZX >= 0 but the data show a negative effect")
    return data.ace_zy / data.ace_zx


@dataclass(frozen=True)
class AceInterval:
    """Interval for ACE_XY, which lives in [-1, 1]."""

    lower: float
    upper: float
    monotone: bool

    def __contains__(self, value: float) -> bool:
        return self.lower - 1e-9 <= value <= self.upper + 1e-9

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "method": "lp", "monotone": self.monotone}


def _iv_constraints(data: IvData, monotone: bool):
    rows, rhs = [], []
    for z in (0, 1):
        for x in (0, 1):
            for y in (0, 1):
                row = np.zeros(16)
                for i, (x0, x1, y0, y1) in enumerate(TYPES):
                    if (x0, x1)[z] == x and (y0, y1)[x] == y:
                        row[i] = 1.0
                rows.append(row)
                rhs.append(data.p_xy_given_z[z, x, y])
    if monotone:
        for i, (x0, x1, _, _) in enumerate(TYPES):
            if (x0, x1) == (1, 0):
                row = np.zeros(16)
                row[i] = 1.0
                rows.append(row)
                rhs.append(0.0)
    return np.array(rows), np.array(rhs)


def ace_bounds_lp(data: IvData, monotone: bool = False) -> AceInterval:
    """Sharp bounds on ACE_XY over all response-type laws matching the data."""
    a, b = _iv_constraints(data, monotone)
    objective = np.array([y1 - y0 for _, _, y0, y1 in TYPES], dtype=float)
    lo, hi = lp_pc_bounds(a, b, objective, constant=1.0, scale=2.0)
    # the LP returns (ACE + 1) / 2 so the interval fits in [0, 1]
    lo, hi = 2 * lo - 1, 2 * hi - 1
    return AceInterval(lo, hi, monotone)


def response_types(s, z: str, x: str, y: str) -> PrincipalStrata:
    """Principal strata implied by a deterministic SCM.

    Raises :class:`ModelError` when ``x`` does not depend on ``z``
    causally, in which case ``X(Z=z)`` has no meaning.
    """
    from .scm import Scm

    if not isinstance(s, Scm):
        raise ModelError("response types are derived from deterministic SCMs only")
    for n in (z, x, y):
        if n not in s.endogenous_names:
            raise ModelError(f"{n!r} is not endogenous")
        if s.variables[n].card != 2:
            raise ModelError(f"{n!r} must be binary")
    if x not in s.graph.descendants([z]):
        raise ModelError(f"{z!r} is not a cause of {x!r}; X(Z=z) is undefined")
    p = np.zeros((2, 2, 2, 2))
    for u, w in s.support():
        xs = tuple(s.solve(u, {z: v})[x] for v in (0, 1))
        ys = tuple(s.solve(u, {x: v})[y] for v in (0, 1))
        p[xs + ys] += w
    return PrincipalStrata(p)


@dataclass(frozen=True)
class ExclusionReport:
    holds: bool
    violation: float
    data_discrepancy: float | None = None

    def to_dict(self) -> dict:
        return {"holds": self.holds, "violation": self.violation, "data_discrepancy": self.data_discrepancy}


def check_exclusion(s, z: str, x: str, y: str, data: IvData | None = None) -> ExclusionReport:
    """Check ``Y(Z=z) = Y(X = X(Z=z))`` across the exogenous law of ``s``.

    ``violation`` is the largest probability, over ``z``, that the two
    sides differ. When ``data`` is supplied the report also gives the
    largest gap between the model-implied and the supplied P(x, y | z).
    """
    from .scm import Scm, scm_to_cbn

    if not isinstance(s, Scm):
        raise ModelError("the exclusion check needs a deterministic SCM")
    worst = 0.0
    for zv in (0, 1):
        mass = 0.0
        for u, w in s.support():
            via_z = s.solve(u, {z: zv})
            via_x = s.solve(u, {x: via_z[x]})
            if via_z[y] != via_x[y]:
                mass += w
        worst = max(worst, mass)
    gap = None
    if data is not None:
        m = scm_to_cbn(s)
        t = np.zeros((2, 2, 2))
        for zv in (0, 1):
            t[zv] = joint_query(m, Query((x, y), evidence={z: zv})).table([x, y])
        gap = float(np.abs(t - data.p_xy_given_z).max())
    return ExclusionReport(worst <= 1e-12, float(worst), gap)


@dataclass(frozen=True)
class MediatorMonotonicity:
    premises_hold: bool
    monotone: bool


def monotone_via_mediator(s, z: str, w: str, x: str) -> MediatorMonotonicity:
    """Check the complete-mediator route to monotonicity on a deterministic SCM.

    The premises are ``W(Z=1) = 1`` and ``X(W=0) = 0`` for every exogenous
    state with positive mass. When they hold, ``X(Z=0) = 1`` forces
    ``W(Z=0) = 1`` and so ``X(Z=1) = 1``, which rules out defiers. This is a
    statement about a model; nothing here tests it from data.
    """
    from .scm import Scm

    if not isinstance(s, Scm):
        raise ModelError("the mediator check needs a deterministic SCM")
    for n in (z, w, x):
        if n not in s.endogenous_names:
            raise ModelError(f"{n!r} is not endogenous")
    premises = monotone = True
    for u, _ in s.support():
        if s.solve(u, {z: 1})[w] != 1 or s.solve(u, {w: 0})[x] != 0:
            premises = False
        if s.solve(u, {z: 1})[x] < s.solve(u, {z: 0})[x]:
            monotone = False
    return MediatorMonotonicity(premises, monotone)


def iv_data_from_model(m, z: str, x: str, y: str) -> IvData:
    """Observational ``P(x, y | z)`` from a causal Bayesian network."""
    t = np.zeros((2, 2, 2))
    for zv in (0, 1):
        t[zv] = joint_query(m, Query((x, y), evidence={z: zv})).table([x, y])
    p_z1 = joint_query(m, Query((z,))).values[1]
    return IvData(t, float(p_z1))
