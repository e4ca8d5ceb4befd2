"""Shared model builders and the acceptance-criterion recorder."""

import contextlib
from pathlib import Path

import numpy as np

from coe_lab.cbn import Cbn, cpt
from coe_lab.factor import Variable
from coe_lab.scm import StCm

MODELS = Path(__file__).resolve().parent.parent / "models"

CRITERIA: list[tuple[int, str, bool, str]] = []


class _Record:
    detail = ""


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record a pass/fail line for an acceptance criterion."""
    rec = _Record()
    try:
        yield rec
    except BaseException:
        CRITERIA.append((number, title, False, rec.detail))
        print(f"criterion {number:2d} FAIL  {title}  {rec.detail}")
        raise
    CRITERIA.append((number, title, True, rec.detail))
    print(f"criterion {number:2d} PASS  {title}  {rec.detail}")


def iv_graph_cbn(probs=None, regime=False):
    """Four-node IV model Z -> X <- U -> Y <- X, optionally with F_X."""
    z, u, x, y = (Variable(n) for n in "ZUXY")
    if probs is None:
        probs = {
            "Z": [0.5, 0.5],
            "U": [0.7, 0.3],
            "X": [[[0.9, 0.1], [0.6, 0.4]], [[0.3, 0.7], [0.1, 0.9]]],
            "Y": [[[0.8, 0.2], [0.5, 0.5]], [[0.4, 0.6], [0.2, 0.8]]],
        }
    cpts = {
        "Z": cpt(z, [], probs["Z"]),
        "U": cpt(u, [], probs["U"]),
        "X": cpt(x, [z, u], probs["X"]),
        "Y": cpt(y, [x, u], probs["Y"]),
    }
    edges = [("Z", "X"), ("U", "X"), ("X", "Y"), ("U", "Y")]
    return Cbn([z, u, x, y], edges, cpts, {"F_X": "X"} if regime else None)


def uniform_iv_cbn(regime=False):
    return iv_graph_cbn({
        "Z": [0.5, 0.5],
        "U": [0.5, 0.5],
        "X": np.full((2, 2, 2), 0.5),
        "Y": np.full((2, 2, 2), 0.5),
    }, regime)


def confounded_stcm(ignorable=False, p_x1_u=(0.3, 0.8)):
    """U ~ Bern(0.5); P(Y=1 | X, U) from a fixed table."""
    u, x, y = Variable("U"), Variable("X"), Variable("Y")
    p_y = np.array([[[0.8, 0.2], [0.5, 0.5]], [[0.1, 0.9], [0.5, 0.5]]])  # [x, u, y]
    cpts = {
        "U": cpt(u, [], [0.5, 0.5]),
        "X": cpt(x, [u], [[1 - p_x1_u[0], p_x1_u[0]], [1 - p_x1_u[1], p_x1_u[1]]]),
        "Y": cpt(y, [x, u], p_y),
    }
    return StCm([u, x, y], [("U", "X"), ("U", "Y"), ("X", "Y")], cpts, exogenous=["U"], ignorable=ignorable)


def strata_fixture():
    """Defier-free strata: compliers 0.5 (effect 0.6), never-takers 0.3, always-takers 0.2.

    The population effect is 0.3 while the complier effect is 0.6, so the
    Wald ratio does not recover the population effect here.
    """
    from coe_lab.iv import PrincipalStrata

    return PrincipalStrata.from_compliance(
        {"complier": 0.5, "never-taker": 0.3, "always-taker": 0.2},
        {
            "complier": [[0.2, 0.6], [0.0, 0.2]],
            "never-taker": [[0.5, 0.0], [0.0, 0.5]],
            "always-taker": [[0.5, 0.25], [0.25, 0.0]],
        },
    )
