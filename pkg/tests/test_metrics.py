import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphexlab.core import CapExceededError, StepGraphon, StepKernel, ValidationError
from graphexlab.empirical import stretch_graphon
from graphexlab.metrics import (
    SearchBudget,
    common_refinement,
    cut_distance,
    cut_distance_stretched,
    cut_norm,
    difference,
    l1_distance,
    l1_norm,
    permute_cells,
    projected_refinement,
    truncate,
)
from graphexlab.oracle import cut_norm_bruteforce

HALVES = [0.0, 0.5, 1.0]


def random_kernel(rng, n, symmetric=False, signed=True):
    v = rng.uniform(-1 if signed else 0, 1, (n, n))
    if symmetric:
        v = (v + v.T) / 2
    w = rng.uniform(0.05, 1.0, n)
    return v, w


def random_graphon(rng, n, support=1.0):
    v, _ = random_kernel(rng, n, symmetric=True, signed=False)
    return StepGraphon(np.linspace(0, support, n + 1), v)


# -- cut norm ----------------------------------------------------------------


def test_cut_norm_examples():
    r = cut_norm(StepKernel([0, 1], [[0.7]]))
    assert r.value == pytest.approx(0.7) and r.witness_T == (0,) and r.witness_U == (0,)
    r = cut_norm(StepKernel(HALVES, [[1, -1], [-1, 1]]))
    assert r.value == pytest.approx(0.25) and r.exact
    w = StepGraphon.blocks([[0.3, 0.2], [0.2, 0.9]])
    assert cut_norm(difference(w, w)).value == 0.0


def test_cut_norm_matches_bruteforce():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        v, w = random_kernel(rng, n)
        assert abs(cut_norm(v, w).value - cut_norm_bruteforce(v, w)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_cut_norm_witness_and_l1_bound(n, seed):
    rng = np.random.default_rng(seed)
    v, w = random_kernel(rng, n)
    r = cut_norm(v, w)
    K = w[:, None] * v * w[None, :]
    witnessed = abs(K[np.ix_(list(r.witness_T), list(r.witness_U))].sum())
    assert r.value >= witnessed - 1e-12
    assert abs(r.value - witnessed) <= 1e-12
    assert r.value <= np.abs(K).sum() + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_nonnegative_cut_norm_is_l1(n, seed):
    rng = np.random.default_rng(seed)
    v, w = random_kernel(rng, n, signed=False)
    assert cut_norm(v, w).value == pytest.approx((w[:, None] * v * w[None, :]).sum(), rel=1e-12)


def test_heuristic_cut_norm_is_a_lower_bound():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = int(rng.integers(2, 12))
        v, w = random_kernel(rng, n)
        h = cut_norm(v, w, exact=False, restarts=4, rng=0)
        assert not h.exact
        assert h.value <= cut_norm(v, w).value + 1e-12


def test_exact_cut_norm_cap():
    with pytest.raises(CapExceededError):
        cut_norm(np.zeros((21, 21)), exact=True)
    assert not cut_norm(np.zeros((21, 21))).exact


# -- cut distance ------------------------------------------------------------


def test_cut_distance_examples():
    w = StepGraphon.blocks([[0.3, 0.2], [0.2, 0.9]])
    r = cut_distance(w, w)
    assert r.value == 0.0 and r.alignment == (0, 1) and r.exact
    a = StepGraphon.blocks([[1, 0], [0, 0]])
    b = StepGraphon.blocks([[0, 0], [0, 1]])
    r = cut_distance(a, b)
    assert r.value == pytest.approx(0.0, abs=1e-15) and r.alignment == (1, 0)
    assert cut_distance(StepGraphon.constant(1.0), StepGraphon.zero()).value == pytest.approx(1.0)


def test_cut_distance_refinement_cap():
    a = StepGraphon([0, 1 / 3, 1], [[0.1, 0.2], [0.2, 0.3]])
    b = StepGraphon([0, 0.5, 1], [[0.1, 0.2], [0.2, 0.3]])
    assert cut_distance(a, b).refinement_size == 6
    with pytest.raises(CapExceededError, match="at least 6"):
        common_refinement(a, b, max_cells=4)


def test_unequal_supports_are_zero_padded():
    (A, B), width = common_refinement(StepGraphon.constant(0.5), StepGraphon.constant(0.5, 2.0))
    assert width == 1.0
    assert np.array_equal(A, [[0.5, 0], [0, 0]]) and np.array_equal(B, np.full((2, 2), 0.5))


def test_triangle_inequality_exact_mode():
    rng = np.random.default_rng(3)
    for _ in range(60):
        a, b, c = (random_graphon(rng, 4) for _ in range(3))
        ab, bc, ac = cut_distance(a, b), cut_distance(b, c), cut_distance(a, c)
        assert ab.exact and bc.exact and ac.exact
        assert ac.value <= ab.value + bc.value + 1e-9


def test_permutation_invariance():
    rng = np.random.default_rng(4)
    for n in range(1, 7):
        w = random_graphon(rng, n)
        for perm in itertools.islice(itertools.permutations(range(n)), 0, None, max(1, n * 7)):
            assert cut_distance(w, permute_cells(w, perm)).value <= 1e-15


def test_annealing_is_an_upper_bound_on_exhaustive():
    rng = np.random.default_rng(5)
    for _ in range(5):
        a, b = random_graphon(rng, 8), random_graphon(rng, 8)
        exact = cut_distance(a, b)
        sa = cut_distance(a, b, SearchBudget(exhaustive_max=7, restarts=4, steps=600))
        assert exact.exact and not sa.exact
        assert sa.value >= exact.value - 1e-12


def test_annealing_is_deterministic():
    rng = np.random.default_rng(6)
    a, b = random_graphon(rng, 12), random_graphon(rng, 12)
    budget = SearchBudget(restarts=3, steps=400, seed=9)
    assert cut_distance(a, b, budget) == cut_distance(a, b, budget)


def test_large_refinement_uses_heuristic_norm():
    rng = np.random.default_rng(7)
    a, b = random_graphon(rng, 24), random_graphon(rng, 24)
    r = cut_distance(a, b, SearchBudget(restarts=2, steps=200))
    assert not r.exact and not r.cut_norm.exact and r.refinement_size == 24
    assert 0 <= r.value <= l1_distance(a, b)


def test_projected_refinement():
    a = StepGraphon.constant(0.5, support=np.sqrt(2.0))
    b = StepGraphon(np.arange(4) * 0.5, np.eye(3))
    (A, B), width, errs = projected_refinement(a, b, max_cells=16)
    assert width == 0.5 and A.shape == (3, 3)
    assert errs[1] == 0.0
    # cell-averaging preserves integrals
    assert A.sum() * width**2 == pytest.approx(a.integral())
    assert errs[0] > 0
    r = cut_distance(a, b)
    assert not r.exact and r.projection_error == pytest.approx(sum(errs))
    with pytest.raises(CapExceededError):
        cut_distance(a, b, SearchBudget(project=False))


# -- stretched distance ------------------------------------------------------


def test_stretched_examples():
    rng = np.random.default_rng(8)
    w = random_graphon(rng, 3)
    r = cut_distance_stretched(w, stretch_graphon(w, 2.0))
    assert r.value == pytest.approx(0.0, abs=1e-12) and r.exact
    r = cut_distance_stretched(StepGraphon.constant(0.5), StepGraphon.constant(0.5, 2.0))
    assert r.value == pytest.approx(0.0, abs=1e-12)
    r = cut_distance_stretched(StepGraphon.constant(1.0), StepGraphon.constant(0.25))
    direct = cut_distance(StepGraphon.constant(1.0), StepGraphon.constant(0.25, 2.0))
    assert r.exact and r.value == pytest.approx(direct.value)
    # normalized: 1 on [0,1)^2 against 1/4 on [0,2)^2; [0,1)^2 gives 1 - 1/4
    assert r.value == pytest.approx(0.75)


def test_stretched_rejects_zero():
    with pytest.raises(ValidationError, match="stretched metric undefined"):
        cut_distance_stretched(StepGraphon.zero(), StepGraphon.constant(0.5))


# -- L1 and truncation -------------------------------------------------------


def test_l1_examples():
    assert l1_norm(StepGraphon.zero()) == 0.0
    assert l1_norm(StepGraphon.constant(0.5)) == 0.5
    assert l1_norm(StepGraphon.blocks([[1, 0], [0, 0]])) == 0.25
    a = StepGraphon.blocks([[1, 0], [0, 0]])
    b = StepGraphon.blocks([[0, 0], [0, 1]])
    assert l1_distance(a, b) == 0.5


def test_truncate_examples():
    w = StepGraphon.constant(0.5, 2.0)
    t, tail = truncate(w, 1.0)
    assert t == StepGraphon.constant(0.5) and tail == pytest.approx(1.5)
    t, tail = truncate(w, 3.0)
    assert t == w and tail == 0.0
    t, tail = truncate(StepGraphon.zero(), 0.5)
    assert t.is_zero() and tail == 0.0
    t, tail = truncate(StepGraphon([0, 1, 3], [[0.2, 0.4], [0.4, 0.6]]), 2.0)
    assert np.allclose(t.boundaries, [0, 1, 2]) and tail == pytest.approx(
        0.2 + 0.4 * 4 + 0.6 * 4 - (0.2 + 0.4 * 2 + 0.6)
    )
    with pytest.raises(ValidationError):
        truncate(w, 0.0)
