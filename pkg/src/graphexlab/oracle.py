"""Brute-force probabilities for tiny instances.

Everything here is computed by enumeration, independently of the samplers
and of the fast cut-norm routine, so it can be used to check them.
"""

from dataclasses import dataclass
import itertools
import math

import numpy as np
from scipy import stats

from .core import (
    CapExceededError,
    UnlabelledGraph,
    ValidationError,
    check_random_state,
    to_adjacency_measure,
)
from .sampler import sample_labelled

__all__ = [
    "GraphProbability",
    "classical_graph_probability",
    "poissonized_graph_probability",
    "rectangle_count_distribution",
    "enumerate_classes",
    "cut_norm_bruteforce",
    "arrival_jump_graphs",
]

DEFAULT_MAX_VERTICES = 7


@dataclass
class GraphProbability:
    graph: UnlabelledGraph
    probability: float
    truncation_error: float


def _labelled_copies(h, n):
    # Distinct edge sets on n labelled vertices isomorphic to h plus
    # (n - v(h)) isolated vertices.
    iu, ju = np.triu_indices(n, 1)
    pair = {(int(i), int(j)): k for k, (i, j) in enumerate(zip(iu, ju))}
    seen = set()
    for emb in itertools.permutations(range(n), h.n_vertices):
        e = frozenset(pair[tuple(sorted((emb[a], emb[b])))] for a, b in h.edges)
        seen.add(e)
    out = np.zeros((len(seen), len(pair)), dtype=bool)
    for r, e in enumerate(sorted(seen, key=sorted)):
        out[r, list(e)] = True
    return out


def _type_table(w):
    # Cell values and widths on [0, 1), with a zero cell covering any gap.
    if w.support > 1.0 + 1e-12:
        raise ValidationError("classical probabilities need a graphon supported in [0, 1)^2")
    widths = list(w.widths)
    vals = w.values
    gap = 1.0 - w.support
    if gap > 1e-15:
        widths.append(gap)
        vals = np.pad(vals, ((0, 1), (0, 1)))
    return np.asarray(vals), np.asarray(widths)


def classical_graph_probability(w, n, h, max_vertices=DEFAULT_MAX_VERTICES):
    """Exact ``P(G(n, W) = h + (n - v(h)) K_1)``.

    ``G(n, W)`` has ``n`` vertices with iid uniform types on ``[0, 1)`` and
    independent edges with probability ``W(type_i, type_j)``; no loops.
    ``h`` is a graph without isolated vertices; the remaining ``n - v(h)``
    vertices are the isolated ones.
    """
    if n > max_vertices:
        raise CapExceededError(f"n = {n} exceeds the enumeration cap {max_vertices}")
    if h.n_vertices > n or h.has_loops():
        return 0.0
    vals, widths = _type_table(w)
    copies = _labelled_copies(h, n)
    iu, ju = np.triu_indices(n, 1)
    k = len(widths)
    total = 0.0
    if n == 0:
        types = np.zeros((1, 0), dtype=int)
    else:
        types = np.array(list(itertools.product(range(k), repeat=n)), dtype=int)
    for lo in range(0, types.shape[0], 1024):
        t = types[lo : lo + 1024]
        weight = np.prod(widths[t], axis=1)
        p = vals[t[:, iu], t[:, ju]]
        for start in range(0, copies.shape[0], 256):
            e = copies[start : start + 256]
            prob = np.where(e[None, :, :], p[:, None, :], 1.0 - p[:, None, :]).prod(axis=2)
            total += float(weight @ prob.sum(axis=1))
    return total


def poissonized_graph_probability(w, s, h, m_max=None, max_vertices=DEFAULT_MAX_VERTICES):
    """``P(G_s(W) = h)`` from the Poisson-mixture series over isolated vertices.

    The series is cut after ``m_max`` isolated vertices (default: as many as
    the enumeration cap allows, at most 10).  The reported truncation error
    is the Poisson tail mass ``P(Po(s) > v(h) + m_max)``, which bounds the
    omitted terms.
    """
    v = h.n_vertices
    if m_max is None:
        m_max = min(10, max_vertices - v)
    if v + m_max > max_vertices:
        raise CapExceededError(
            f"v(h) + m_max = {v + m_max} exceeds the enumeration cap {max_vertices}"
        )
    if s == 0:
        return GraphProbability(h, 1.0 if v == 0 else 0.0, 0.0)
    total = 0.0
    for m in range(m_max + 1):
        n = m + v
        weight = math.exp(-s + n * math.log(s) - math.lgamma(n + 1))
        total += weight * classical_graph_probability(w, n, h, max_vertices=max_vertices)
    tail = float(stats.poisson.sf(v + m_max, s))
    return GraphProbability(h, total, tail)


def enumerate_classes(n):
    """All graphs without isolated vertices on at most ``n`` vertices.

    Loops are excluded.  The empty graph is included.
    """
    iu, ju = np.triu_indices(n, 1)
    pairs = list(zip(iu.tolist(), ju.tolist()))
    found = set()
    for mask in range(1 << len(pairs)):
        edges = [pairs[b] for b in range(len(pairs)) if mask >> b & 1]
        found.add(UnlabelledGraph.from_edges(n, edges))
    return sorted(found, key=lambda g: (g.n_vertices, g.n_edges, g.edges))


def rectangle_count_distribution(g, r, u, k_max, n_samples, rng=None):
    """Monte Carlo law of ``xi_r(U)``, the number of adjacency points in ``U``.

    Returns probabilities for ``0..k_max`` followed by the overflow mass
    ``P(count > k_max)``.
    """
    if u.bounding_size() > r:
        raise ValidationError("the rectangle union must lie inside [0, r]^2")
    rng = check_random_state(rng)
    counts = np.zeros(k_max + 2)
    for _ in range(n_samples):
        k = u.count(to_adjacency_measure(sample_labelled(g, r, rng)))
        counts[min(k, k_max + 1)] += 1
    return counts / n_samples


def cut_norm_bruteforce(values, widths=None):
    """Cut norm by enumerating every pair of cell subsets ``(T, U)``."""
    F = np.atleast_2d(np.asarray(values, dtype=float))
    n = F.shape[0]
    w = np.ones(n) if widths is None else np.asarray(widths, dtype=float)
    K = w[:, None] * F * w[None, :]
    masks = np.arange(1 << n)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    sums = bits @ K @ bits.T
    return float(np.abs(sums).max())


def arrival_jump_graphs(w, k, rng=None):
    """First ``k`` distinct graphs of the process, by simulating arrivals.

    Vertices of a pure graphon arrive one at a time at the epochs of a
    rate-``B`` Poisson process, each with a uniform type on ``[0, B)``; an
    arriving vertex links to each earlier vertex with probability ``W``.
    The graph is recorded whenever an arrival adds edges.  No loops.
    """
    if not np.any(w.values):
        raise ValidationError("zero graphon has no jumps")
    rng = check_random_state(rng)
    B = w.support
    types, edges, out = [], [], []
    while len(out) < k:
        t = w.cell_of(rng.uniform(0.0, B))
        new = [j for j, tj in enumerate(types) if rng.random() < w.values[t, tj]]
        v = len(types)
        types.append(t)
        if new:
            edges += [(j, v) for j in new]
            out.append(UnlabelledGraph.from_edges(v + 1, edges))
    return out
