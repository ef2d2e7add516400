import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphexlab._canon import CanonicalizationError
from graphexlab.core import (
    Graphex,
    LabelledGraph,
    RectangleUnion,
    StepFunction,
    StepGraphon,
    UnlabelledGraph,
    ValidationError,
    check_graphex,
    forget_labels,
    from_adjacency_measure,
    relabel,
    restrict,
    to_adjacency_measure,
    validate_graphex,
)

from helpers import within_3se


# -- validation -------------------------------------------------------------


def test_validate_constant_half():
    rep = validate_graphex(Graphex.from_graphon(StepGraphon.constant(0.5)))
    assert rep.valid
    assert rep.graphon_integral == pytest.approx(0.5)
    assert all(rep.conditions.values())


def test_validate_reports_asymmetry():
    w = StepGraphon([0, 0.5, 1], [[0.2, 0.3], [0.4, 0.1]])
    rep = validate_graphex(Graphex.from_graphon(w))
    assert not rep.valid
    assert any("symmetric" in p for p in rep.problems)
    with pytest.raises(ValidationError):
        check_graphex(Graphex.from_graphon(w))


def test_validate_with_stars_and_dust():
    g = Graphex(dust=1.5, stars=StepFunction([0, 1], [2.0]), graphon=StepGraphon.constant(0.5))
    rep = validate_graphex(g)
    assert rep.valid
    assert rep.star_integral == pytest.approx(2.0)


@pytest.mark.parametrize(
    "g",
    [
        Graphex(dust=-1.0),
        Graphex(stars=StepFunction([0, 1], [-0.5])),
        Graphex.from_graphon(StepGraphon([0, 1], [[1.5]])),
    ],
)
def test_validate_reports_bad_values(g):
    assert not validate_graphex(g).valid


def test_non_increasing_boundaries_reported():
    w = StepGraphon([0, 1, 1], [[0.1, 0.1], [0.1, 0.1]])
    rep = validate_graphex(Graphex.from_graphon(w))
    assert not rep.valid and any("increasing" in p for p in rep.problems)


def test_diagonal_integral():
    w = StepGraphon([0, 0.25, 1], [[1.0, 0.0], [0.0, 0.5]])
    assert validate_graphex(Graphex.from_graphon(w)).diagonal_integral == pytest.approx(0.25 + 0.375)


def test_graphex_dict_round_trip():
    g = Graphex(dust=0.3, stars=StepFunction([0, 0.5], [1.0]), graphon=StepGraphon.blocks([[0.2, 0.1], [0.1, 0.9]]))
    assert Graphex.from_dict(g.to_dict()) == g


# -- adjacency measures and restriction -------------------------------------


def test_adjacency_measure_examples():
    assert to_adjacency_measure(LabelledGraph.from_edges([(0.5, 1.2)])) == [(0.5, 1.2), (1.2, 0.5)]
    assert to_adjacency_measure(LabelledGraph()) == []
    assert to_adjacency_measure(LabelledGraph.from_edges([(2.0, 2.0)])) == [(2.0, 2.0)]


def test_asymmetric_points_rejected():
    with pytest.raises(ValidationError):
        from_adjacency_measure([(0.1, 0.2)])


def test_restrict_examples():
    assert restrict(LabelledGraph.from_edges([(1.5, 3.2)]), 2).n_edges == 0
    g = LabelledGraph.from_edges([(0.5, 1.2), (0.3, 2.0)])
    assert restrict(g, 1.5) == LabelledGraph.from_edges([(0.5, 1.2)])
    assert restrict(g, 2.0) == g


labels = st.floats(0.0, 10.0, allow_nan=False, exclude_min=True)
labelled_graphs = st.lists(st.tuples(labels, labels), max_size=15).map(
    lambda es: LabelledGraph.from_edges(es)
)


@given(labelled_graphs)
def test_adjacency_round_trip(g):
    pts = to_adjacency_measure(g)
    assert set(pts) == {(y, x) for x, y in pts}
    assert from_adjacency_measure(pts) == g


@given(labelled_graphs, st.floats(0, 10), st.floats(0, 10))
def test_restrict_composes(g, a, b):
    r, s = min(a, b), max(a, b)
    assert restrict(restrict(g, s), r) == restrict(g, r)


# -- canonical forms ---------------------------------------------------------


def test_forget_labels_examples():
    p1 = LabelledGraph.from_edges([(0.1, 0.2), (0.2, 0.3)])
    p2 = LabelledGraph.from_edges([(7, 5), (5, 9)])
    assert forget_labels(p1) == forget_labels(p2)
    assert forget_labels(LabelledGraph.from_edges([(3.0, 4.0)])) == UnlabelledGraph(2, ((0, 1),))
    t1 = forget_labels(LabelledGraph.from_edges([(1, 2), (2, 3), (1, 3)]))
    t2 = forget_labels(LabelledGraph.from_edges([(0.4, 9), (9, 2.5), (0.4, 2.5)]))
    assert t1 == t2 and t1.n_vertices == 3 and t1.n_edges == 3


def test_isolated_vertices_rejected():
    with pytest.raises(ValidationError):
        UnlabelledGraph(3, ((0, 1),))


def test_too_large_to_canonicalize():
    g = LabelledGraph.from_edges([(float(i), float(i + 1)) for i in range(13)])
    with pytest.raises(CanonicalizationError, match="too large to canonicalize"):
        forget_labels(g)
    assert forget_labels(g, canonical=False).n_vertices == 14


def _random_graph(rng, n, p):
    return [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]


def test_canonical_form_is_permutation_invariant():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        edges = _random_graph(rng, n, rng.uniform(0.1, 0.9))
        perm = rng.permutation(n)
        a = UnlabelledGraph.from_edges(n, edges)
        b = UnlabelledGraph.from_edges(n, [(perm[i], perm[j]) for i, j in edges])
        assert a == b


def test_canonical_form_matches_networkx_isomorphism():
    # Equal canonical forms iff isomorphic, checked against networkx's VF2.
    rng = np.random.default_rng(12)
    graphs = []
    for _ in range(150):
        n = int(rng.integers(2, 7))
        edges = _random_graph(rng, n, 0.5)
        if edges:
            graphs.append(edges)
    for e1, e2 in itertools.combinations(graphs[:60], 2):
        g1, g2 = nx.Graph(e1), nx.Graph(e2)
        same = UnlabelledGraph.from_edges(7, e1) == UnlabelledGraph.from_edges(7, e2)
        assert same == nx.is_isomorphic(g1, g2)


def test_canonical_form_is_a_relabelling():
    rng = np.random.default_rng(13)
    for _ in range(100):
        n = int(rng.integers(2, 10))
        edges = _random_graph(rng, n, 0.4)
        if not edges:
            continue
        c = UnlabelledGraph.from_edges(n, edges)
        assert nx.is_isomorphic(nx.Graph(edges), nx.Graph(list(c.edges)))


def test_canonical_loops_distinguished():
    a = UnlabelledGraph.from_edges(2, [(0, 1), (0, 0)])
    b = UnlabelledGraph.from_edges(2, [(0, 1), (1, 1)])
    c = UnlabelledGraph.from_edges(2, [(0, 1)])
    assert a == b and a != c and a.has_loops()


@pytest.mark.parametrize("n", [12])
def test_cap_sized_regular_graphs_are_fast(n):
    complete = list(itertools.combinations(range(n), 2))
    cycle = [(i, (i + 1) % n) for i in range(n)]
    assert UnlabelledGraph.from_edges(n, complete).n_edges == n * (n - 1) // 2
    assert UnlabelledGraph.from_edges(n, cycle).n_edges == n


# -- relabelling -------------------------------------------------------------


def test_relabel_empty_and_edge(rng):
    assert relabel(LabelledGraph(), 3.0, rng).n_edges == 0
    g = relabel(UnlabelledGraph(2, ((0, 1),)), 1.0, rng)
    (x, y), = g.edges
    assert 0 <= x < y < 1


def test_relabel_min_label_mean():
    rng = np.random.default_rng(5)
    g = UnlabelledGraph(2, ((0, 1),))
    mins = [next(iter(relabel(g, 2.0, rng).edges))[0] for _ in range(100_000)]
    ok, mean, se = within_3se(mins, 2.0 / 3.0)
    assert ok, (mean, se)


def test_relabel_labels_are_distinct(rng):
    g = UnlabelledGraph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    lab = relabel(g, 1e-300, rng)
    assert lab.n_vertices == 5


# -- rectangles --------------------------------------------------------------


def test_rectangle_count_half_open():
    u = RectangleUnion.box(0, 1, 1, 2)
    pts = to_adjacency_measure(LabelledGraph.from_edges([(0.5, 1.2)]))
    assert u.count(pts) == 1
    assert RectangleUnion.box(0, 1).count([(1.0, 0.5)]) == 0
    assert u.bounding_size() == 2
