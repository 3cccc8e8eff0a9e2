import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from limitlab.fatou import GridSpec, interior_components
from limitlab.limits import (ComponentGraph, H1Model, LimitGroupElement, LocalizedInteger,
                             basilica_graph, covering_trivial, h1_model, jordan_graph,
                             limit_add, limit_equal, limit_normalize, localized_add,
                             localized_neg, localized_scale, parse_word, random_component_graph,
                             winding_vector)

from conftest import poly

F = Fraction
L = LocalizedInteger


# --- Z[1/m]

def test_localized_examples():
    assert localized_add(L(1, 1), L(3, 2)) == L(5, 2)
    x = L(7, 3, 2)
    zero = localized_add(x, localized_neg(x))
    assert zero.numerator == 0 and zero.exponent == 0
    assert localized_scale(L(3, 3), 4) == L(3, 1)
    assert localized_scale(L(3, 3), L(1, 1)) == L(3, 4)
    assert str(L(5, 2)) in ("5/2^2", "5/4")


def test_localized_normal_form():
    assert L(12, 3, 2) == L(3, 1, 2)
    assert (L(12, 3, 2).numerator, L(12, 3, 2).exponent) == (3, 1)
    assert L(9, 2, 3) == L(1, 0, 3)
    with pytest.raises(ValueError):
        L(1, -1)
    with pytest.raises(ValueError):
        L(1, 0, 1)


def test_localized_mixed_bases_rejected():
    with pytest.raises(ValueError):
        L(1, 1, 2) + L(1, 1, 3)


def test_from_fraction():
    assert L.from_fraction(F(5, 4), 2) == L(5, 2)
    assert L.from_fraction(F(7, 9), 3).to_fraction() == F(7, 9)
    assert L.from_fraction(F(1, 6), 6) == L(1, 1, 6)
    with pytest.raises(ValueError):
        L.from_fraction(F(1, 3), 2)


localized = st.builds(lambda n, e: L(n, e, 2), st.integers(-10 ** 6, 10 ** 6), st.integers(0, 30))


@given(localized, localized, localized)
def test_group_laws(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x + y == y + x
    assert x + L(0, 0, 2) == x
    assert x + (-x) == L(0, 0, 2)
    assert (x + y).to_fraction() == x.to_fraction() + y.to_fraction()
    assert (x - y).to_fraction() == x.to_fraction() - y.to_fraction()


def test_group_laws_fuzz():
    rng = np.random.default_rng(11)
    for base in (2, 3, 6):
        for _ in range(34000):  # 1.02e5 triples over the three bases
            a, b, c = (L(int(rng.integers(-10 ** 9, 10 ** 9)), int(rng.integers(0, 25)), base)
                       for _ in range(3))
            assert (a + b) + c == a + (b + c)
            assert a + b == b + a


@given(st.integers(-10 ** 9, 10 ** 9), st.integers(0, 40))
def test_normal_form_is_unique(n, e):
    x = L(n, e, 2)
    y = L.from_fraction(F(n, 2 ** e), 2)
    assert (x.numerator, x.exponent) == (y.numerator, y.exponent)


# --- direct limits

def test_limit_examples():
    e = limit_normalize(3, 6, 2)
    assert (e.level, e.value) == (2, 3)
    for k in range(6):
        assert limit_equal((k, 0), (0, 0), 2)
    a = LimitGroupElement(1, 1, 2)
    assert a + (-a) == LimitGroupElement(0, 0, 2)


def test_limit_isomorphism_to_localized():
    rng = np.random.default_rng(5)
    for _ in range(10000):
        m = int(rng.integers(2, 7))
        a = LimitGroupElement(int(rng.integers(0, 20)), int(rng.integers(-10 ** 6, 10 ** 6)), m)
        b = LimitGroupElement(int(rng.integers(0, 20)), int(rng.integers(-10 ** 6, 10 ** 6)), m)
        assert limit_add(a, b).to_localized() == a.to_localized() + b.to_localized()
        assert (a.to_localized() == b.to_localized()) == limit_equal(a, b)
        assert a.to_localized().to_fraction() == F(a.value, m ** a.level)


@given(st.integers(0, 12), st.integers(-500, 500), st.integers(0, 12), st.integers(-500, 500),
       st.integers(2, 5))
def test_limit_equal_matches_rationals(la, va, lb, vb, m):
    assert limit_equal((la, va), (lb, vb), m) == (F(va, m ** la) == F(vb, m ** lb))


@given(st.integers(0, 8), st.integers(-50, 50), st.integers(0, 8))
def test_limit_equal_structure_maps(level, value, up):
    assert limit_equal((level, value), (level + up, value * 2 ** up), 2)


def test_limit_equal_is_equivalence():
    reps = [(l, v) for l in range(4) for v in range(-8, 9)]
    for a in reps:
        assert limit_equal(a, a, 2)
        for b in reps:
            if limit_equal(a, b, 2):
                assert limit_equal(b, a, 2)
                for c in reps:
                    if limit_equal(b, c, 2):
                        assert limit_equal(a, c, 2)


def test_raise_to():
    e = LimitGroupElement(1, 3, 2)
    assert e.raise_to(4) == 24
    with pytest.raises(ValueError):
        e.raise_to(0)
    with pytest.raises(ValueError):
        limit_add(LimitGroupElement(0, 1, 2), LimitGroupElement(0, 1, 3))


# --- H1

def test_jordan_curve_case():
    assert h1_model(jordan_graph(2)).describe() == "Z[1/2]"


def test_two_fixed_components():
    g = ComponentGraph(("A", "B"), {"A": False, "B": False}, {"A": "A", "B": "B"},
                       {"A": 2, "B": 3}, ("A", "B"))
    model = h1_model(g)
    assert model.describe() == "Z[1/2] ⊕ Z[1/3]"
    assert model.to_dict()["surjective"] is False


def test_empty_x0_rejected():
    with pytest.raises(ValueError):
        h1_model(basilica_graph())


def test_split_projection_after_inclusion():
    g = ComponentGraph(("A", "B"), {"A": False, "B": False}, {"A": "A", "B": "B"},
                       {"A": 2, "B": 3}, ("A", "B"))
    model = h1_model(g)
    rng = np.random.default_rng(8)
    for _ in range(2000):
        for node, k in model.summands:
            v = L(int(rng.integers(-10 ** 6, 10 ** 6)), int(rng.integers(0, 12)), k)
            vec = model.inclusion(node, v)
            assert model.projection(vec, node) == v
            for other, k2 in model.summands:
                if other != node:
                    assert model.projection(vec, other) == L(0, 0, k2)
    u = model.inclusion("A", L(1, 1, 2))
    w = model.inclusion("B", L(2, 1, 3))
    s = H1Model.add(u, w)
    assert model.projection(s, "A") == L(1, 1, 2) and model.projection(s, "B") == L(2, 1, 3)
    with pytest.raises(ValueError):
        model.inclusion("A", L(1, 1, 3))


def test_h1_from_atlas():
    p = poly("0.1,0,1")
    atlas = interior_components(p, GridSpec.square(2.0, 96))
    g = ComponentGraph.from_atlas(p, atlas, delta=0.5)
    assert h1_model(g).describe() == "Z[1/2]"


def test_graph_from_basilica_atlas():
    p = poly("-1,0,1")
    atlas = interior_components(p, GridSpec.square(2.0, 256))
    g = ComponentGraph.from_atlas(p, atlas, delta=0.3)
    assert g.X0 == ()
    for x in g.nodes:
        assert g.map[x] in g.nodes


# --- winding vectors

def test_winding_examples():
    assert winding_vector("e1e2e1^-1e2^-1", 2) == (0, 0)
    assert winding_vector("e1e1e3^-1", 3) == (2, 0, -1)
    assert winding_vector("", 4) == (0, 0, 0, 0)
    assert winding_vector([], 2) == (0, 0)
    assert parse_word("e_1 e_2^{-1}") == [1, -2]


def test_winding_rejects():
    with pytest.raises(ValueError):
        winding_vector("e4", 3)
    with pytest.raises(ValueError):
        parse_word("f1")


words = st.lists(st.integers(1, 6).flatmap(lambda i: st.sampled_from([i, -i])), max_size=30)


@given(words, words)
def test_winding_homomorphism(u, v):
    a = winding_vector(u, 6)
    b = winding_vector(v, 6)
    assert winding_vector(u + v, 6) == tuple(x + y for x, y in zip(a, b))
    inverse = [-s for s in reversed(u)]
    assert winding_vector(u + inverse, 6) == (0,) * 6


# --- component graphs and coverings

def reachable_bruteforce(g, k0=0):
    """Nodes of the form p_*^k(X') with X' small and k >= k0, by walking every orbit."""
    out = set()
    n = len(g.nodes)
    for s in g.nodes:
        if not g.small[s]:
            continue
        x = s
        for k in range(k0 + 2 * n + 2):
            if k >= k0:
                out.add(x)
            x = g.map[x]
    return out


def test_all_small_trivial_with_zero_witnesses():
    g = ComponentGraph(("a", "b"), {"a": True, "b": True}, {"a": "b", "b": "b"}, {"a": 1, "b": 2})
    v = covering_trivial(g)
    assert v.trivial
    assert all(k == 0 for _, k in v.witnesses.values())


def test_big_node_with_small_preimage():
    g = ComponentGraph(("B", "S"), {"B": False, "S": True}, {"B": "B", "S": "B"},
                       {"B": 2, "S": 1}, ("B",))
    v = covering_trivial(g)
    assert v.trivial and v.witnesses["B"] == ("S", 1)


def test_big_node_with_only_big_ancestors():
    g = ComponentGraph(("B", "C", "S"), {"B": False, "C": False, "S": True},
                       {"B": "B", "C": "B", "S": "S"}, {"B": 2, "C": 1, "S": 1})
    v = covering_trivial(g)
    assert not v.trivial
    assert v.unreachable == ("B", "C")


def test_basilica_graph():
    g = basilica_graph(6)
    assert len(g.nodes) == 65
    v = covering_trivial(g)
    assert v.trivial
    for x, (s, k) in v.witnesses.items():
        y = s
        for _ in range(k):
            y = g.map[y]
        assert y == x and g.small[s]
    assert set(v.big) == {"U0", "U1", "V"}


def test_random_graphs_trivial_and_monotone():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        g = random_component_graph(rng)
        v = covering_trivial(g)
        assert v.trivial
        assert set(v.witnesses) == reachable_bruteforce(g)
        extra = [x for x in g.nodes if not g.small[x] and rng.random() < 0.5]
        assert covering_trivial(g.with_small(extra)).trivial


def test_covering_matches_bruteforce_on_unrepaired_graphs():
    rng = np.random.default_rng(99)
    for _ in range(500):
        n = int(rng.integers(2, 15))
        names = [f"v{i}" for i in range(n)]
        g = ComponentGraph(tuple(names), {x: bool(rng.random() < 0.5) for x in names},
                           {x: names[int(rng.integers(0, n))] for x in names},
                           {x: 1 for x in names})
        k0 = int(rng.integers(0, 4))
        v = covering_trivial(g, k0)
        assert set(v.witnesses) == reachable_bruteforce(g, k0)
        assert v.trivial == (reachable_bruteforce(g, k0) == set(names))
        if v.trivial:
            assert covering_trivial(g.with_small(names[:2]), k0).trivial


def test_graph_validation():
    with pytest.raises(ValueError):
        ComponentGraph(("a",), {"a": True}, {"a": "b"}, {"a": 1})
    with pytest.raises(ValueError):
        ComponentGraph(("a", "b"), {"a": True, "b": True}, {"a": "b", "b": "b"},
                       {"a": 1, "b": 1}, ("a",))
    with pytest.raises(ValueError):
        ComponentGraph(("a",), {}, {"a": "a"}, {"a": 1})


def test_graph_json_round_trip():
    g = basilica_graph(4)
    back = ComponentGraph.from_json(g.to_json())
    assert back.to_json() == g.to_json()
    assert json.loads(g.to_json())["schema"] == "limitlab.component-graph"
    doc = covering_trivial(g).to_dict()
    assert doc["verdict"] == "TRIVIAL" and set(doc["trace"]) == set(g.nodes)
