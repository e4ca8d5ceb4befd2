import itertools
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coe_lab.exceptions import CycleDetected, ModelError
from coe_lab.graph import AugmentedDag, Dag, d_separated, moralize, validate
from oracles import path_d_separated

IV_EDGES = [("Z", "X"), ("U", "X"), ("X", "Y"), ("U", "Y")]
IV = Dag("ZUXY", IV_EDGES)


def test_validate_iv_graph_order():
    order = validate(IV)
    assert order == ["U", "Z", "X", "Y"]
    for p, c in IV_EDGES:
        assert order.index(p) < order.index(c)


def test_validate_single_node():
    assert validate(Dag(["A"])) == ["A"]


def test_validate_two_cycle():
    with pytest.raises(CycleDetected) as err:
        validate(Dag("AB", [("A", "B"), ("B", "A")]))
    assert set(err.value.cycle) == {"A", "B"}


def test_dag_rejects_self_loop_and_duplicates():
    with pytest.raises(ModelError):
        Dag("A", [("A", "A")])
    with pytest.raises(ModelError):
        Dag("AB", [("A", "B"), ("A", "B")])
    with pytest.raises(ModelError):
        Dag("A", [("A", "Q")])


def test_iv_graph_separations():
    assert d_separated(IV, {"Z"}, {"U"})
    assert d_separated(IV, {"Y"}, {"Z"}, {"X", "U"})
    assert not d_separated(IV, {"Y"}, {"Z"}, {"X"})


def test_d_separation_accepts_names_and_rejects_overlap():
    assert d_separated(IV, "Z", "U")
    with pytest.raises(ModelError):
        d_separated(IV, {"Z"}, {"Z"})
    with pytest.raises(ModelError):
        d_separated(IV, {"Z"}, {"Y"}, {"Z"})
    with pytest.raises(ModelError):
        d_separated(IV, {"W"}, {"Y"})


def test_moralize_iv_graph():
    m = moralize(IV)
    edges = {frozenset(e) for e in m.edges}
    assert edges == {frozenset(e) for e in ["ZX", "UX", "XY", "UY", "ZU"]}


def test_moralize_trivial_graphs():
    assert moralize(Dag("ABC")).number_of_edges() == 0
    chain = moralize(Dag("ABC", [("A", "B"), ("B", "C")]))
    assert {frozenset(e) for e in chain.edges} == {frozenset("AB"), frozenset("BC")}


def test_augmented_dag_dashes_edges_into_targets():
    g = AugmentedDag("ZUXY", IV_EDGES, {"F_X": "X"})
    assert g.styles[("Z", "X")] == "dashed"
    assert g.styles[("X", "Y")] == "solid"
    assert g.parents("X") == ("F_X", "U", "Z")
    assert g.stochastic_parents("X") == ("U", "Z")
    # regime node is independent of Z and U
    assert d_separated(g, {"F_X"}, {"Z", "U"})
    with pytest.raises(ModelError):
        AugmentedDag("XY", [("X", "Y")], {"F_Q": "Q"})


def _random_dag(rng, n):
    names = [chr(ord("A") + i) for i in range(n)]
    edges = [(a, b) for i, a in enumerate(names) for b in names[i + 1:] if rng.random() < 0.45]
    return names, edges


def _all_triples(names):
    for a, b in itertools.combinations(names, 2):
        rest = [n for n in names if n not in (a, b)]
        for k in range(len(rest) + 1):
            for c in itertools.combinations(rest, k):
                yield {a}, {b}, set(c)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_moralization_agrees_with_paths(n):
    rng = random.Random(n)
    for _ in range(6 if n < 6 else 3):
        names, edges = _random_dag(rng, n)
        g = Dag(names, edges)
        nxg = nx.DiGraph(edges)
        nxg.add_nodes_from(names)
        for a, b, c in _all_triples(names):
            ours = d_separated(g, a, b, c)
            assert ours == path_d_separated(names, edges, a, b, c), (edges, a, b, c)
            assert ours == nx.is_d_separator(nxg, a, b, c)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_d_separation_is_symmetric(seed):
    rng = random.Random(seed)
    names, edges = _random_dag(rng, 5)
    g = Dag(names, edges)
    a, b = rng.sample(names, 2)
    c = {n for n in names if n not in (a, b) and rng.random() < 0.5}
    assert d_separated(g, {a}, {b}, c) == d_separated(g, {b}, {a}, c)


def test_ancestors_and_descendants_are_inclusive():
    assert IV.ancestors(["X"]) == {"X", "Z", "U"}
    assert IV.descendants(["U"]) == {"U", "X", "Y"}
