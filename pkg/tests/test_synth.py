import numpy as np
import pandas as pd
import pytest

from coe_lab.cbn import Query, joint_query
from coe_lab.exceptions import ModelError
from coe_lab.iv import LinearSemParams
from coe_lab.scm import scm_to_cbn
from coe_lab.synth import (
    counts_table,
    random_cbn,
    random_iv_scm,
    random_iv_strata,
    random_model,
    random_scm,
    random_stcm,
    rng,
    sample,
    sample_linear_sem,
)
from helpers import iv_graph_cbn


def test_generators_are_deterministic():
    for kind in ("cbn", "scm", "stcm", "iv-strata", "iv-scm"):
        a, b = random_model(kind, 5), random_model(kind, 5)
        fa = sample(a, 50, seed=1) if kind != "iv-strata" else pd.DataFrame(a.probs.ravel())
        fb = sample(b, 50, seed=1) if kind != "iv-strata" else pd.DataFrame(b.probs.ravel())
        pd.testing.assert_frame_equal(fa, fb)


def test_rng_is_pcg64_and_passthrough():
    g = rng(3)
    assert isinstance(g.bit_generator, np.random.PCG64)
    assert rng(g) is g


def test_size_limits_and_kinds():
    with pytest.raises(ModelError):
        random_cbn(0, n_nodes=20)
    with pytest.raises(ModelError):
        random_cbn(0, max_card=5)
    with pytest.raises(ModelError):
        random_model("forest", 0)
    with pytest.raises(ModelError):
        random_iv_scm(0, compliance="sometimes")


def test_monotone_strata_have_no_defiers():
    for seed in range(10):
        assert random_iv_strata(seed, monotone=True).monotone


def test_random_cbn_regimes():
    assert set(random_cbn(1, regimes="all").regimes) == {f"F_V{i}" for i in range(4)}
    assert not random_cbn(1, regimes="none").regimes
    assert set(random_cbn(1, regimes=["V2"]).regimes) == {"F_V2"}


def test_sample_single_row_and_validation():
    m = iv_graph_cbn()
    frame = sample(m, 1, seed=0)
    assert frame.shape == (1, 4)
    with pytest.raises(ModelError):
        sample(m, 0)
    with pytest.raises(ModelError):
        sample(object(), 5)


def test_sample_deterministic_model_is_constant():
    s = random_iv_scm(2, compliance="perfect")
    frame = sample(s, 200, seed=0)
    assert (frame["X"] == frame["Z"]).all()


def test_sample_frequencies_match_model():
    m = iv_graph_cbn()
    frame = sample(m, 100_000, seed=4)
    freq = counts_table(frame, ["Z", "X", "Y"]) / len(frame)
    truth = joint_query(m, Query(("Z", "X", "Y"))).table(["Z", "X", "Y"])
    assert np.abs(freq - truth).max() < 0.01


def test_sample_scm_and_stcm():
    s = random_scm(3)
    frame = sample(s, 50_000, seed=2)
    truth = joint_query(scm_to_cbn(s), Query(("V0",))).table(["V0"])
    assert frame["V0"].mean() == pytest.approx(truth[1], abs=0.01)
    assert set(sample(random_stcm(1), 10, seed=0).columns) == {"U", "X", "Y"}


def test_sample_labels():
    from coe_lab.cbn import Cbn, cpt
    from coe_lab.factor import Variable
    v = Variable("S", 2, labels=["lo", "hi"])
    m = Cbn([v], [], {"S": cpt(v, [], [0.5, 0.5])})
    assert set(sample(m, 100, seed=0, labels=True)["S"]) == {"lo", "hi"}


def test_linear_sem_sample_moments():
    params = LinearSemParams(1.0, 2.0, 0.5, 3.0)
    frame = sample_linear_sem(params, 100_000, seed=0, p_z=0.3)
    assert frame["z"].mean() == pytest.approx(0.3, abs=0.01)
    assert frame["x"].mean() == pytest.approx(1.0 + 2.0 * 0.3, abs=0.02)
