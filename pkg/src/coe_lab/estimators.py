"""Estimator wrappers that plug empirical frequencies into the exact formulas.

The mathematical objects live in :mod:`coe_lab.bounds` and
:mod:`coe_lab.iv` and take probabilities. The classes here follow the
scikit-learn estimator protocol (constructor parameters only, ``fit``
learns attributes ending in ``_``) and accept a :class:`pandas.DataFrame`
of state labels with an optional ``count`` column.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .bounds import (
    Margins,
    MediatorData,
    StratifiedData,
    pc_bounds_basic,
    pc_bounds_conditional,
    pc_bounds_covariate,
    pc_bounds_mediator,
    pc_bounds_tian_pearl,
)
from .exceptions import ModelError, PositivityViolation
from .factor import Variable
from .io import contingency, infer_variable, plug_in
from .iv import IvData, ace_bounds_lp, late, wald_ratio

PC_METHODS = ("auto", "basic", "covariate", "tian-pearl", "mediator")


def check_frame(X, columns: Sequence[str]) -> pd.DataFrame:
    """Coerce ``X`` to a DataFrame and require ``columns``."""
    if isinstance(X, pd.DataFrame):
        frame = X
    elif isinstance(X, dict):
        frame = pd.DataFrame(X)
    else:
        raise ModelError(f"expected a DataFrame or a dict of columns, got {type(X).__name__}")
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ModelError(f"missing column(s) {missing}")
    if len(frame) == 0:
        raise ModelError("no rows")
    return frame


def binary_counts(frame: pd.DataFrame, columns: Sequence[str]) -> np.ndarray:
    """Counts over binary 0/1 columns, weighted by ``count`` if present."""
    return contingency(frame, [Variable(c, 2) for c in columns])


class PCBounds(BaseEstimator):
    """Plug-in bounds on the probability of causation.

    Parameters
    ----------
    method : {"auto", "basic", "covariate", "tian-pearl", "mediator"}
        ``"auto"`` picks ``"covariate"`` when ``covariate`` is set,
        ``"mediator"`` when ``mediator`` is set, ``"tian-pearl"`` when
        ``p_y1_do_x0`` is given and ``"basic"`` otherwise.
    exposure, outcome : str
        Binary columns.
    covariate : str, optional
        Discrete pre-exposure covariate column.
    mediator : str, optional
        Binary complete-mediator column.
    p_y1_do_x0 : float, optional
        Experimental P(Y=1 | X <- 0) for the non-ignorable bounds.
    smooth : float
        Pseudo-count added to every cell of the contingency table.

    Attributes
    ----------
    bounds_ : BoundsInterval
    method_ : str
    margins_ : Margins
    covariate_states_ : tuple of str
        Only with a covariate.
    """

    def __init__(self, method: str = "auto", exposure: str = "X", outcome: str = "Y",
                 covariate: str | None = None, mediator: str | None = None,
                 p_y1_do_x0: float | None = None, smooth: float = 0.0):
        self.method = method
        self.exposure = exposure
        self.outcome = outcome
        self.covariate = covariate
        self.mediator = mediator
        self.p_y1_do_x0 = p_y1_do_x0
        self.smooth = smooth

    def _resolve_method(self) -> str:
        if self.method not in PC_METHODS:
            raise ModelError(f"method must be one of {PC_METHODS}")
        if self.covariate is not None and self.mediator is not None:
            raise ModelError("give either a covariate or a mediator, not both")
        if self.method != "auto":
            return self.method
        if self.covariate is not None:
            return "covariate"
        if self.mediator is not None:
            return "mediator"
        if self.p_y1_do_x0 is not None:
            return "tian-pearl"
        return "basic"

    def fit(self, X, y=None):
        method = self._resolve_method()
        x, o = self.exposure, self.outcome
        frame = check_frame(X, [x, o])
        joint = plug_in(binary_counts(frame, [x, o]), self.smooth)
        p_x = joint.sum(axis=1)
        if np.any(p_x <= 0):
            raise PositivityViolation("both exposure levels must be observed")
        self.margins_ = Margins(joint[1, 1] / p_x[1], joint[0, 1] / p_x[0], p_x[1], self.p_y1_do_x0)
        if method == "basic":
            self.bounds_ = pc_bounds_basic(self.margins_)
        elif method == "tian-pearl":
            if self.p_y1_do_x0 is None:
                raise ModelError("tian-pearl bounds need p_y1_do_x0")
            self.bounds_ = pc_bounds_tian_pearl(self.margins_)
        elif method == "covariate":
            if self.covariate is None:
                raise ModelError("covariate bounds need a covariate column")
            s = infer_variable(check_frame(frame, [self.covariate]), self.covariate)
            counts = contingency(frame, [s, Variable(x, 2), Variable(o, 2)])
            self.covariate_states_ = s.state_labels
            self.strata_ = StratifiedData.from_joint(plug_in(counts, self.smooth))
            self.bounds_ = pc_bounds_covariate(self.strata_)
        else:
            if self.mediator is None:
                raise ModelError("mediator bounds need a mediator column")
            counts = binary_counts(check_frame(frame, [self.mediator]), [x, self.mediator, o])
            self.mediator_data_ = MediatorData.from_joint(plug_in(counts, self.smooth))
            self.bounds_ = pc_bounds_mediator(self.mediator_data_)
        self.method_ = method
        return self

    def predict(self, X) -> np.ndarray:
        """``(n, 2)`` array of [lower, upper] bounds for each row.

        With a covariate each row gets the bounds of its own stratum;
        otherwise every row gets the fitted population bounds.
        """
        check_is_fitted(self, "bounds_")
        if self.method_ != "covariate":
            n = len(X)
            return np.tile([self.bounds_.lower, self.bounds_.upper], (n, 1))
        frame = check_frame(X, [self.covariate])
        index = {s: i for i, s in enumerate(self.covariate_states_)}
        out = np.empty((len(frame), 2))
        cache: dict[int, tuple[float, float]] = {}
        for row, value in enumerate(frame[self.covariate].astype(str).str.strip()):
            if value not in index:
                raise ModelError(f"unseen covariate value {value!r}")
            s = index[value]
            if s not in cache:
                b = pc_bounds_conditional(self.strata_, s)
                cache[s] = (b.lower, b.upper)
            out[row] = cache[s]
        return out


class WaldIV(BaseEstimator):
    """Instrumental-variable slope: cov(Y, Z) / cov(X, Z).

    A ``count`` column, if present, weights the rows.

    Parameters
    ----------
    threshold : float
        Minimum absolute first-stage slope before :class:`WeakInstrument`.

    Attributes
    ----------
    coef_, intercept_ : float
    first_stage_ : float
        Slope of X on Z.
    ols_coef_ : float
        Naive slope of Y on X, for comparison.
    """

    def __init__(self, instrument: str = "z", exposure: str = "x", outcome: str = "y", threshold: float = 0.01):
        self.instrument = instrument
        self.exposure = exposure
        self.outcome = outcome
        self.threshold = threshold

    def fit(self, X, y=None):
        frame = check_frame(X, [self.instrument, self.exposure, self.outcome])
        cols = {k: pd.to_numeric(frame[c], errors="raise").to_numpy(dtype=float)
                for k, c in (("z", self.instrument), ("x", self.exposure), ("y", self.outcome))}
        if "count" in frame.columns:
            # aggregated rows: expand each row by its count
            reps = frame["count"].to_numpy(dtype=int)
            cols = {k: np.repeat(v, reps) for k, v in cols.items()}
        self.coef_ = wald_ratio(cols, threshold=self.threshold)
        z, x, yv = cols["z"], cols["x"], cols["y"]
        self.first_stage_ = float(np.cov(x, z)[0, 1] / np.var(z, ddof=1))
        self.intercept_ = float(yv.mean() - self.coef_ * x.mean())
        self.ols_coef_ = float(np.cov(yv, x)[0, 1] / np.var(x, ddof=1))
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        frame = check_frame(X, [self.exposure])
        return self.intercept_ + self.coef_ * frame[self.exposure].to_numpy(dtype=float)


def _iv_data(frame, names, smooth) -> IvData:
    counts = binary_counts(check_frame(frame, names), names)
    return IvData.from_counts(counts, smooth)


class LATE(BaseEstimator):
    """Complier-average effect from binary (Z, X, Y) data.

    Parameters
    ----------
    monotone : bool
        Assert that there are no defiers. This cannot be checked from data.
    availability : bool
        The exposure is unavailable when Z=0, which makes monotonicity
        structural; fitting fails if any unexposed-arm row has X=1.
    threshold : float
        Minimum first-stage effect before :class:`WeakInstrument`.
    """

    def __init__(self, instrument: str = "z", exposure: str = "x", outcome: str = "y",
                 monotone: bool = True, availability: bool = False, threshold: float = 0.01,
                 smooth: float = 0.0):
        self.instrument = instrument
        self.exposure = exposure
        self.outcome = outcome
        self.monotone = monotone
        self.availability = availability
        self.threshold = threshold
        self.smooth = smooth

    def fit(self, X, y=None):
        self.data_ = _iv_data(X, [self.instrument, self.exposure, self.outcome], self.smooth)
        if self.availability and not self.data_.is_availability:
            raise ModelError("availability design declared but some units took the exposure with Z=0")
        self.estimate_ = late(self.data_, monotone=self.monotone or self.availability, threshold=self.threshold)
        return self


class ACEBoundsIV(BaseEstimator):
    """Sharp bounds on the average causal effect from binary IV data."""

    def __init__(self, instrument: str = "z", exposure: str = "x", outcome: str = "y",
                 monotone: bool = False, smooth: float = 0.0):
        self.instrument = instrument
        self.exposure = exposure
        self.outcome = outcome
        self.monotone = monotone
        self.smooth = smooth

    def fit(self, X, y=None):
        self.data_ = _iv_data(X, [self.instrument, self.exposure, self.outcome], self.smooth)
        self.interval_ = ace_bounds_lp(self.data_, monotone=self.monotone)
        return self
