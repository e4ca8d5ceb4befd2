"""Acceptance criteria, one test per criterion.

Each test prints a ``criterion N PASS/FAIL`` line; the same lines are
repeated in the terminal summary.
"""

import itertools
import json
import warnings
from fractions import Fraction

import numpy as np
import pytest

from coe_lab.bounds import (
    Margins,
    MediatorData,
    PoJoint,
    StratifiedData,
    basic_lp,
    compare_bounds,
    pc_bounds_basic,
    pc_bounds_covariate,
    pc_bounds_mediator,
    pc_bounds_tian_pearl,
    pc_point,
    stratified_margins,
    tau_rho,
    tian_pearl_lp,
)
from coe_lab.cbn import Cbn, Query, ace, back_door, joint_query
from coe_lab.graph import Dag, d_separated
from coe_lab.io import load_model
from coe_lab.iv import (
    LinearSemParams,
    TYPES,
    ace_bounds_lp,
    individual_effects,
    iv_data_from_model,
    late,
    strata_estimands,
    wald_ratio,
)
from coe_lab.scm import pc_exact, scm_to_cbn
from coe_lab.synth import (
    random_cbn,
    random_iv_scm,
    random_iv_strata,
    random_stcm,
    rng,
    sample_linear_sem,
)
from helpers import MODELS, confounded_stcm, criterion, iv_graph_cbn, strata_fixture, uniform_iv_cbn
from oracles import basic_bounds_exact, brute_query, linprog_range, strata_algebra_exact

SEED = 20240601


def random_margins(g, n):
    """Feasible margins with P(Y=1 | X=1) bounded away from 0."""
    return [(g.uniform(0.01, 1.0), g.uniform(0.0, 1.0)) for _ in range(n)]


def test_criterion_01_basic_bounds_sharpness():
    with criterion(1, "basic bounds: closed form = LP sweep, endpoints attained") as rec:
        g = rng(SEED)
        worst = 0.0
        for p1, p0 in random_margins(g, 1000):
            m = Margins(p1, p0)
            closed, lp = pc_bounds_basic(m), basic_lp(m)
            worst = max(worst, abs(closed.lower - lp.lower), abs(closed.upper - lp.upper))
            exact = basic_bounds_exact(Fraction(p1), Fraction(p0))
            assert (closed.lower, closed.upper) == pytest.approx(tuple(map(float, exact)), abs=1e-12)
            tau, rho = tau_rho(m)
            lo_xi, hi_xi = abs(tau), 1 - abs(rho)
            # the endpoints are attained by explicit slack values
            assert pc_point(PoJoint(tau, rho, lo_xi)) == pytest.approx(closed.lower, abs=1e-9)
            assert pc_point(PoJoint(tau, rho, hi_xi)) == pytest.approx(closed.upper, abs=1e-9)
            # and no slack in range escapes the interval
            sweep = [pc_point(PoJoint(tau, rho, xi)) for xi in np.linspace(lo_xi, hi_xi, 11)]
            assert min(sweep) >= closed.lower - 1e-9 and max(sweep) <= closed.upper + 1e-9
        rec.detail = f"max |closed - LP| = {worst:.2e}"
        assert worst <= 1e-9


def test_criterion_02_doubling_the_risk():
    with criterion(2, "RR > 2 forces lower bound > 0.5; RR < 2 fixture keeps upper >= 0.5") as rec:
        g = rng(SEED + 2)
        lowest = 1.0
        for _ in range(1000):
            p0 = g.uniform(0.001, 0.5)
            p1 = g.uniform(2 * p0, 1.0)
            if p1 / p0 <= 2:
                continue
            lowest = min(lowest, pc_bounds_basic(Margins(p1, p0)).lower)
        fixture = Margins.from_dict(json.loads((MODELS / "rr_below_two.json").read_text()))
        b = pc_bounds_basic(fixture)
        rec.detail = f"min lower = {lowest:.4f}; fixture RR = {b.diagnostics['rr']:.2f}, [{b.lower:.4f}, {b.upper:.4f}]"
        assert lowest > 0.5
        assert b.diagnostics["rr"] < 2 and b.upper >= 0.5


def _do_margins(s):
    m = scm_to_cbn(s)
    return [joint_query(m, Query(("Y",), regime={"F_X": x})).prob(Y=1) for x in (0, 1)]


def _obs_margins(s):
    m = scm_to_cbn(s)
    return [joint_query(m, Query(("Y",), evidence={"X": x})).prob(Y=1) for x in (0, 1)]


def test_criterion_03_exact_pc_bracketing():
    with criterion(3, "pc_exact inside basic bounds on 1000 random StCMs") as rec:
        checked = 0
        worst = 0.0
        for seed in range(1000):
            u_card = 2 + seed % 3
            if seed % 2 == 0:
                # confounded exposure, ignorable: bounds from the interventional margins
                s = random_stcm(seed, u_card=u_card, confounded=True, ignorable=True)
                p0, p1 = _do_margins(s)
            else:
                # exposure independent of U: observational margins are causal
                s = random_stcm(seed, u_card=u_card, confounded=False)
                p0, p1 = _obs_margins(s)
            value = pc_exact(s, {"X": 1, "Y": 1}, {"X": 0})
            b = pc_bounds_basic(Margins(p1, p0))
            worst = max(worst, b.lower - value, value - b.upper)
            checked += 1
        rec.detail = f"{checked} models, max excess = {max(worst, 0.0):.2e}"
        assert worst <= 1e-9


def test_criterion_04_tian_pearl_fixture():
    with criterion(4, "Tian-Pearl fixture gives [2/7, 5/7]; LP agrees") as rec:
        m = Margins.from_dict(json.loads((MODELS / "tian_pearl.json").read_text()))
        b, lp = pc_bounds_tian_pearl(m), tian_pearl_lp(m)
        # rational evaluation of the same closed form
        p, a, c, d = Fraction(1, 2), Fraction(7, 10), Fraction(3, 10), Fraction(2, 5)
        p_y1 = p * a + (1 - p) * c
        lo = max(Fraction(0), (p_y1 - d) / (p * a))
        hi = min(Fraction(1), ((1 - d) - (1 - p) * (1 - c)) / (p * a))
        rec.detail = f"[{b.lower:.12f}, {b.upper:.12f}], LP [{lp.lower:.12f}, {lp.upper:.12f}]"
        assert (lo, hi) == (Fraction(2, 7), Fraction(5, 7))
        assert b.lower == pytest.approx(2 / 7, abs=1e-12) and b.upper == pytest.approx(5 / 7, abs=1e-12)
        assert abs(lp.lower - b.lower) <= 1e-9 and abs(lp.upper - b.upper) <= 1e-9


def test_criterion_05_information_monotonicity():
    with criterion(5, "covariate bounds never looser; equality iff same-side ratios; S:=D reduction") as rec:
        g = rng(SEED + 5)
        n = tightened = 0
        worst_reduction = 0.0
        for _ in range(500):
            k = int(g.integers(2, 5))
            joint = g.dirichlet(np.ones(4 * k)).reshape(k, 2, 2)
            d = StratifiedData.from_joint(joint)
            c = compare_bounds(d)
            assert c.monotone
            assert c.equality_matches, c.to_dict()
            tightened += not (c.lower_equal and c.upper_equal)
            # stratifying on desired exposure reproduces the bounds without S
            m = stratified_margins(d)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                reduced = pc_bounds_covariate(StratifiedData.from_desired_exposure(m))
            tp = pc_bounds_tian_pearl(m)
            worst_reduction = max(worst_reduction, abs(reduced.lower - tp.lower), abs(reduced.upper - tp.upper))
            n += 1
        rec.detail = f"{n} instances, {tightened} strictly tightened, S:=D max gap {worst_reduction:.2e}"
        assert worst_reduction <= 1e-9


def test_criterion_06_covariate_fixture():
    with criterion(6, "two-strata fixture: L = 6/11, U = 1, marginal l = 4/11") as rec:
        doc = json.loads((MODELS / "covariate_strata.json").read_text())["strata"]
        d = StratifiedData(doc["pY1_given_X1"], doc["pY1_given_X0"], doc["pS_given_X1"])
        b = pc_bounds_covariate(d)
        # equal strata with P(X=1 | S) = 1/2, so the marginal risks are plain averages
        marginal = pc_bounds_basic(Margins(np.mean(doc["pY1_given_X1"]), np.mean(doc["pY1_given_X0"])))
        # joint LP over per-stratum (Y(0), Y(1)) tables, each stratum's slack free
        a_rows, b_rhs, obj = [], [], np.zeros(8)
        p1 = float(np.dot(doc["pY1_given_X1"], doc["pS_given_X1"]))
        for s in range(2):
            w = doc["pS_given_X1"][s]
            block = lambda f: np.concatenate([f if t == s else np.zeros(4) for t in range(2)])  # noqa: E731
            cells = list(itertools.product((0, 1), repeat=2))
            a_rows.append(block(np.ones(4)))
            b_rhs.append(1.0)
            a_rows.append(block(np.array([float(y1) for _, y1 in cells])))
            b_rhs.append(doc["pY1_given_X1"][s])
            a_rows.append(block(np.array([float(y0) for y0, _ in cells])))
            b_rhs.append(doc["pY1_given_X0"][s])
            obj += block(np.array([w if (y0, y1) == (0, 1) else 0.0 for y0, y1 in cells]))
        lp = linprog_range(np.array(a_rows), b_rhs, obj, scale=p1)
        rec.detail = f"L = {b.lower:.10f}, U = {b.upper:.10f}, marginal l = {marginal.lower:.10f}"
        assert abs(b.lower - 6 / 11) <= 1e-9 and abs(b.upper - 1.0) <= 1e-9
        assert abs(marginal.lower - 4 / 11) <= 1e-9
        assert b.lower > marginal.lower
        assert lp == pytest.approx((6 / 11, 1.0), abs=1e-7)


def test_criterion_07_mediator_property():
    with criterion(7, "mediator LP: lower = basic lower, upper <= basic upper") as rec:
        g = rng(SEED + 7)
        n = 0
        worst_lower = 0.0
        shrunk = 0
        while n < 500:
            q = tuple(g.uniform(0, 1, 2))
            r = tuple(g.uniform(0, 1, 2))
            d = MediatorData(q, r)
            if d.margins().p_y1_x1 < 0.01:
                continue
            med = pc_bounds_mediator(d)
            basic = pc_bounds_basic(d.margins())
            worst_lower = max(worst_lower, abs(med.lower - basic.lower))
            assert med.upper <= basic.upper + 1e-9
            shrunk += med.upper < basic.upper - 1e-6
            n += 1
        rec.detail = f"{n} instances, max |L - l| = {worst_lower:.2e}, upper strictly lower in {shrunk}"
        assert worst_lower <= 1e-9


def test_criterion_08_iv_algebra():
    with criterion(8, "ICE multiplicativity, LATE = complier effect, confounded fixture breaks the Wald identity") as rec:
        for x0, x1, y0, y1 in TYPES:
            zx, zy, xy = individual_effects(x0, x1, y0, y1)
            # Y(Z=z) computed directly from the response type
            y_of_z = [(y0, y1)[x0], (y0, y1)[x1]]
            assert zy == y_of_z[1] - y_of_z[0]
            assert zy == zx * xy
        for seed in range(500):
            p = random_iv_strata(seed, monotone=True)
            est = strata_estimands(p)
            zx, zy, complier = strata_algebra_exact(p.probs)
            assert abs(est.late - float(complier)) <= 1e-12
            assert abs(est.ace_zx - float(zx)) <= 1e-12 and abs(est.ace_zy - float(zy)) <= 1e-12
            assert late(p.implied_data()) == pytest.approx(est.late, abs=1e-12)
        fixture = strata_estimands(strata_fixture())
        ratio = fixture.ace_zy / fixture.ace_zx
        rec.detail = f"fixture ACE_XY = {fixture.ace_xy:.3f} vs ACE_ZY/ACE_ZX = {ratio:.3f}"
        assert strata_fixture().monotone
        assert abs(fixture.ace_xy - ratio) > 0.1


def test_criterion_09_ace_lp_bounds():
    with criterion(9, "true ACE inside LP bounds on 1000 IV SCMs; point under perfect compliance") as rec:
        widest_point = 0.0
        for seed in range(1000):
            s = random_iv_scm(seed, u_card=2 + seed % 3)
            m = scm_to_cbn(s)
            b = ace_bounds_lp(iv_data_from_model(m, "Z", "X", "Y"))
            assert ace(m, "X", "Y") in b, seed
        for seed in range(50):
            s = random_iv_scm(seed, compliance="perfect")
            m = scm_to_cbn(s)
            b = ace_bounds_lp(iv_data_from_model(m, "Z", "X", "Y"))
            assert ace(m, "X", "Y") in b
            widest_point = max(widest_point, b.width)
        rec.detail = f"perfect-compliance max width = {widest_point:.2e}"
        assert widest_point <= 1e-9


def _fixture_models():
    models = [iv_graph_cbn(), iv_graph_cbn(regime=True), uniform_iv_cbn()]
    models += [scm_to_cbn(confounded_stcm()), scm_to_cbn(confounded_stcm(ignorable=True))]
    for name in ("iv_observational", "iv_interventional", "twin_confounded", "deterministic_cause"):
        m = load_model(MODELS / f"{name}.json")
        models.append(m if isinstance(m, Cbn) else scm_to_cbn(m))
    models += [random_cbn(seed, n_nodes=2 + seed % 5, regimes="none") for seed in range(40)]
    return models


def test_criterion_10_inference_soundness():
    with criterion(10, "joint_query = enumeration; back-door = mutilated query when valid") as rec:
        worst = 0.0
        models = _fixture_models()
        for m in models:
            names = list(m.stochastic)
            assert len(names) <= 6 and all(m.variables[n].card == 2 for n in names)
            targets = names[-2:]
            for ev_node in names[:-2][:2]:
                for value in (0, 1):
                    ev = {ev_node: value}
                    ref = brute_query(m, targets, ev)
                    if ref.sum() == 0 or not np.isfinite(ref).all():
                        continue
                    got = joint_query(m, Query(tuple(targets), evidence=ev)).table(targets)
                    worst = max(worst, float(np.abs(got - ref).max()))
            full = joint_query(m, Query(tuple(names))).table(names)
            worst = max(worst, float(np.abs(full - brute_query(m, names)).max()))
        valid_sets = 0
        for seed in range(500):
            m = random_cbn(seed, n_nodes=4)
            x, y = "V1", "V3"
            others = ["V0", "V2"]
            cut = Dag(list(m.stochastic), [(p, c) for p, c, _ in m.stochastic_edges() if p != x])
            desc = m.graph.descendants([x])
            for k in range(3):
                for adjust in itertools.combinations(others, k):
                    if set(adjust) & desc or not d_separated(cut, {x}, {y}, set(adjust)):
                        continue
                    bd = back_door(m, x, y, adjust)
                    for v in range(m.variables[x].card):
                        ref = brute_query(m, [y], regime={x: v})
                        worst = max(worst, float(np.abs(bd[v].table([y]) - ref).max()))
                    valid_sets += 1
        rec.detail = f"{len(models)} fixture models, {valid_sets} valid adjustment sets, max gap {worst:.2e}"
        assert worst <= 1e-9


def test_criterion_11_wald_recovery():
    with criterion(11, "Wald ratio recovers beta1 = 3; naive regression biased") as rec:
        params = LinearSemParams(alpha0=0.0, alpha1=2.0, beta0=1.0, beta1=3.0, resid_cov=((1.0, 0.8), (0.8, 1.0)))
        frame = sample_linear_sem(params, 100_000, seed=SEED)
        wald = wald_ratio(frame)
        ols = float(np.cov(frame["x"], frame["y"])[0, 1] / np.var(frame["x"], ddof=1))
        rec.detail = f"wald = {wald:.4f}, ols = {ols:.4f}"
        assert abs(wald - 3.0) <= 0.05
        assert abs(ols - 3.0) > 0.05


def test_criterion_12_d_separation_soundness():
    with criterion(12, "d-separation implies numerical independence on 200 random 5-node CBNs") as rec:
        worst = 0.0
        claims = 0
        for seed in range(200):
            m = random_cbn(seed, n_nodes=5, regimes="none")
            names = list(m.stochastic)
            joint = joint_query(m, Query(tuple(names))).table(names)
            for a, b in itertools.combinations(names, 2):
                rest = [n for n in names if n not in (a, b)]
                for k in range(len(rest) + 1):
                    for c in itertools.combinations(rest, k):
                        if not d_separated(m.graph, {a}, {b}, set(c)):
                            continue
                        claims += 1
                        keep = [names.index(n) for n in (a, b, *c)]
                        drop = tuple(i for i in range(5) if i not in keep)
                        p = joint.sum(axis=drop) if drop else joint
                        p = np.moveaxis(p, [sorted(keep).index(i) for i in keep], range(len(keep)))
                        p_c = p.sum(axis=(0, 1))
                        lhs = p * p_c
                        rhs = p.sum(axis=1, keepdims=True) * p.sum(axis=0, keepdims=True)
                        worst = max(worst, float(np.abs(lhs - rhs).max()))
        rec.detail = f"{claims} separation claims, max deviation {worst:.2e}"
        assert worst <= 1e-9
