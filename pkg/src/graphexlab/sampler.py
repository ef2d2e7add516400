"""Sampling the graph process of a graphex on a finite label window.

The Poisson construction is realized lazily: :class:`PoissonConfiguration`
holds every point of the underlying processes with label at most ``s`` and
can be extended to a larger window with fresh independent randomness, so
restrictions of one realization are consistent across windows.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ._canon import DEFAULT_CAP
from .core import (
    EMPTY,
    CapExceededError,
    LabelledGraph,
    UnlabelledGraph,
    ValidationError,
    check_graphex,
    check_random_state,
    distinct_uniform,
    forget_labels,
)

__all__ = [
    "SampleConfig",
    "JumpChain",
    "PoissonConfiguration",
    "sample_labelled",
    "sample_unlabelled",
    "sample_graphs",
    "sample_edge_counts",
    "sample_jump_chain",
    "jump_chain_from_labelled",
    "subsample_bernoulli",
    "subsample_poisson",
    "subsample_coupled",
    "coupled_indicators",
    "coupling_fill_probability",
]


@dataclass(frozen=True)
class SampleConfig:
    """Label window plus the seed material for one replicate."""

    s: float
    seed: int = 0
    replicate_index: int = 0

    def __post_init__(self):
        if not self.s > 0:
            raise ValidationError("label window s must be positive")

    def rng(self):
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.replicate_index,))
        return np.random.default_rng(ss)


def _window(s):
    if isinstance(s, SampleConfig):
        return s.s, s.rng()
    if not s > 0:
        raise ValidationError("label window s must be positive")
    return float(s), None


class PoissonConfiguration:
    """Points of the Poisson construction with labels in ``[0, s]``.

    Vertex candidates carry a label and a type; graphon edges, loops, star
    leaves and dust edges are stored as label pairs ``(x, y)`` with
    ``x <= y``.
    """

    def __init__(self, graphex, rng=None):
        self.graphex = check_graphex(graphex)
        self.rng = check_random_state(rng)
        self.s = 0.0
        self.labels = np.empty(0)
        self.types = np.empty(0)
        self._edges = []
        self._used = [np.empty(0)]

    @property
    def edges(self):
        """All edges as an ``(E, 2)`` array of sorted label pairs."""
        if not self._edges:
            return np.empty((0, 2))
        return np.concatenate(self._edges)

    def _taken(self):
        return np.concatenate(self._used)

    def _add_edges(self, x, y):
        if len(x):
            self._edges.append(np.column_stack([np.minimum(x, y), np.maximum(x, y)]))

    def extend(self, s_new):
        """Grow the window to ``[0, s_new]`` with fresh independent points."""
        g, rng = self.graphex, self.rng
        s0, s1 = self.s, float(s_new)
        if s1 < s0:
            raise ValidationError("a configuration window can only grow")
        if s1 == s0:
            return self
        W, S = g.graphon, g.stars
        B = g.support

        # (a) new vertex candidates with labels in (s0, s1] and uniform types
        n_new = rng.poisson((s1 - s0) * B) if not (W.is_zero() and S.is_zero()) else 0
        new_labels = distinct_uniform(rng, n_new, s1, low=s0, taken=self._taken())
        self._used.append(new_labels)
        new_types = rng.uniform(0.0, B, size=n_new)

        # (b) graphon edges: new-old pairs, then new-new pairs
        if n_new and not W.is_zero():
            cw_new = W.cell_of(new_types)
            cw_old = W.cell_of(self.types)
            vals = W.values
            if self.labels.size:
                p = np.where(
                    (cw_new[:, None] >= 0) & (cw_old[None, :] >= 0),
                    vals[np.maximum(cw_new, 0)[:, None], np.maximum(cw_old, 0)[None, :]],
                    0.0,
                )
                hit = rng.random(p.shape) < p
                i, j = np.nonzero(hit)
                self._add_edges(new_labels[i], self.labels[j])
            iu, ju = np.triu_indices(n_new, 1)
            p = np.where(
                (cw_new[iu] >= 0) & (cw_new[ju] >= 0),
                vals[np.maximum(cw_new, 0)[iu], np.maximum(cw_new, 0)[ju]],
                0.0,
            )
            hit = rng.random(p.shape) < p
            self._add_edges(new_labels[iu[hit]], new_labels[ju[hit]])
            if g.loops:
                p = np.where(cw_new >= 0, vals[np.maximum(cw_new, 0), np.maximum(cw_new, 0)], 0.0)
                hit = rng.random(n_new) < p
                self._add_edges(new_labels[hit], new_labels[hit])

        # (c) star leaves: old centres get leaves in (s0, s1], new ones in [0, s1]
        if not S.is_zero():
            k_old = rng.poisson((s1 - s0) * S(self.types))
            k_new = rng.poisson(s1 * S(new_types))
            if k_old.sum():
                leaves = distinct_uniform(rng, int(k_old.sum()), s1, low=s0, taken=self._taken())
                self._used.append(leaves)
                self._add_edges(np.repeat(self.labels, k_old), leaves)
            if k_new.sum():
                leaves = distinct_uniform(rng, int(k_new.sum()), s1, taken=self._taken())
                self._used.append(leaves)
                self._add_edges(np.repeat(new_labels, k_new), leaves)

        # (d) dust: rate 2I on {x < x'}, new area (s1^2 - s0^2) / 2
        if g.dust > 0:
            d = rng.poisson(g.dust * (s1 * s1 - s0 * s0))
            while True:
                hi = np.sqrt(s0 * s0 + rng.random(d) * (s1 * s1 - s0 * s0))
                lo = rng.random(d) * hi
                pool = np.concatenate([self._taken(), hi, lo])
                if np.unique(pool).size == pool.size:
                    break
            self._used += [hi, lo]
            self._add_edges(lo, hi)

        self.labels = np.concatenate([self.labels, new_labels])
        self.types = np.concatenate([self.types, new_types])
        self.s = s1
        return self

    def labelled_graph(self, r=None):
        """The labelled graph restricted to labels ``<= r`` (default: ``s``)."""
        e = self.edges
        if r is not None:
            e = e[e[:, 1] <= r]
        return LabelledGraph(frozenset(map(tuple, e.tolist())))


def sample_labelled(graphex, s, rng=None):
    """Sample the labelled graph ``Gamma_s`` of ``graphex``.

    ``s`` is the label window or a :class:`SampleConfig`; in the latter case
    the config's derived stream is used unless ``rng`` is given.
    """
    s, cfg_rng = _window(s)
    rng = check_random_state(rng if rng is not None else cfg_rng)
    return PoissonConfiguration(graphex, rng).extend(s).labelled_graph()


def sample_unlabelled(graphex, s, rng=None, canonical=True):
    """Sample ``G_s``, the unlabelled version of ``Gamma_s``."""
    return forget_labels(sample_labelled(graphex, s, rng), canonical=canonical)


def _decode(m, code, n_pairs, iu, ju):
    edges = [(iu[b], ju[b]) for b in range(n_pairs) if code >> b & 1]
    edges += [(k, k) for k in range(m) if code >> (n_pairs + k) & 1]
    return edges


def sample_graphs(graphex, s, n_samples, rng=None, v_cap=DEFAULT_CAP):
    """Draw ``n_samples`` independent copies of ``G_s`` in canonical form.

    Graphs with more than ``v_cap`` vertices are returned as ``None`` (the
    overflow bucket) without being canonicalized.  Pure graphons with few
    candidates take a vectorized path that canonicalizes each distinct
    labelled pattern once; everything else falls back to the one-by-one
    sampler.  Both paths draw from the same law.
    """
    check_graphex(graphex)
    if v_cap > DEFAULT_CAP:
        raise CapExceededError(f"v_cap {v_cap} exceeds the canonicalization cap {DEFAULT_CAP}")
    rng = check_random_state(rng)
    out = [None] * n_samples
    if not graphex.is_pure_graphon():
        for t in range(n_samples):
            g = sample_labelled(graphex, s, rng)
            if g.n_vertices <= v_cap:
                out[t] = forget_labels(g)
        return out

    W = graphex.graphon
    B = graphex.support
    counts = rng.poisson(s * B, size=n_samples)
    for m in np.unique(counts):
        idx = np.flatnonzero(counts == m)
        m = int(m)
        n_pairs = m * (m - 1) // 2
        if m == 0 or (m == 1 and not graphex.loops) or W.is_zero():
            for t in idx:
                out[t] = EMPTY
            continue
        if n_pairs + m > 62:
            for t in idx:
                g = _fixed_candidates(graphex, rng, s, m)
                out[t] = forget_labels(g) if g.n_vertices <= v_cap else None
            continue
        c = idx.size
        cells = W.cell_of(rng.uniform(0.0, B, size=(c, m)))
        iu, ju = np.triu_indices(m, 1)
        # pad with a zero row/column so that cell -1 (outside W) maps to 0
        vals = np.pad(W.values, ((0, 1), (0, 1)))
        p = vals[cells[:, iu], cells[:, ju]]
        bits = (rng.random((c, n_pairs)) < p).astype(np.int64)
        code = bits @ (np.int64(1) << np.arange(n_pairs, dtype=np.int64))
        if graphex.loops:
            lp = vals[cells, cells]
            lbits = (rng.random((c, m)) < lp).astype(np.int64)
            code = code + lbits @ (np.int64(1) << np.arange(n_pairs, n_pairs + m, dtype=np.int64))
        uniq, inv = np.unique(code, return_inverse=True)
        graphs = []
        for u in uniq.tolist():
            edges = _decode(m, u, n_pairs, iu, ju)
            v = len({x for e in edges for x in e})
            graphs.append(UnlabelledGraph.from_edges(m, edges) if v <= v_cap else None)
        for t, k in zip(idx, inv.ravel()):
            out[t] = graphs[k]
    return out


def _fixed_candidates(g, rng, s, m):
    # Conditioned on the candidate count, sample the graphon part directly.
    labels = distinct_uniform(rng, m, s)
    cells = g.graphon.cell_of(rng.uniform(0.0, g.support, size=m))
    vals = np.pad(g.graphon.values, ((0, 1), (0, 1)))
    iu, ju = np.triu_indices(m, 1)
    hit = rng.random(iu.size) < vals[cells[iu], cells[ju]]
    edges = list(zip(labels[iu[hit]], labels[ju[hit]]))
    if g.loops:
        hit = rng.random(m) < vals[cells, cells]
        edges += [(x, x) for x in labels[hit]]
    return LabelledGraph.from_edges(edges)


def sample_edge_counts(graphex, s, n_samples, rng=None):
    """Edge counts ``e(G_s)`` of ``n_samples`` independent samples.

    Only counts are drawn, so no labels or graphs are materialized.
    """
    check_graphex(graphex)
    rng = check_random_state(rng)
    W, S = graphex.graphon, graphex.stars
    B = graphex.support
    total = np.zeros(n_samples, dtype=np.int64)
    if not (W.is_zero() and S.is_zero()):
        counts = rng.poisson(s * B, size=n_samples)
        for m in np.unique(counts):
            idx = np.flatnonzero(counts == m)
            m = int(m)
            if m == 0:
                continue
            types = rng.uniform(0.0, B, size=(idx.size, m))
            if not W.is_zero():
                cells = W.cell_of(types)
                inside = cells >= 0
                cc = np.maximum(cells, 0)
                iu, ju = np.triu_indices(m, 1)
                p = W.values[cc[:, iu], cc[:, ju]] * (inside[:, iu] & inside[:, ju])
                total[idx] += (rng.random(p.shape) < p).sum(axis=1)
                if graphex.loops:
                    p = W.values[cc, cc] * inside
                    total[idx] += (rng.random(p.shape) < p).sum(axis=1)
            if not S.is_zero():
                total[idx] += rng.poisson(s * S(types)).sum(axis=1)
    if graphex.dust > 0:
        total += rng.poisson(graphex.dust * s * s, size=n_samples)
    return total


@dataclass
class JumpChain:
    """First jumps of the increasing process ``r -> G_r``.

    ``prefixes[k]`` is the labelled graph ``Gamma_{tau_k}``; ``graphs[k]`` is
    its unlabelled version (canonical when small enough).
    """

    jump_times: list
    prefixes: list = field(repr=False)

    @property
    def graphs(self):
        out = []
        for g in self.prefixes:
            out.append(forget_labels(g, canonical=g.n_vertices <= DEFAULT_CAP))
        return out

    def keys(self, v_cap=DEFAULT_CAP):
        """Canonical keys of the jump graphs, ``None`` for graphs above ``v_cap``."""
        return tuple(
            forget_labels(g).key if g.n_vertices <= v_cap else None for g in self.prefixes
        )

    def __len__(self):
        return len(self.jump_times)


def jump_chain_from_labelled(g, k_max=None):
    """Jump chain of a fixed labelled graph.

    Each edge enters the process when its larger endpoint label is reached;
    edges sharing an entry time enter together in one jump.
    """
    e = np.array(sorted(g.edges), dtype=float).reshape(-1, 2)
    entry = e[:, 1]
    times = np.unique(entry)
    if k_max is not None:
        times = times[:k_max]
    prefixes = [LabelledGraph(frozenset(map(tuple, e[entry <= t].tolist()))) for t in times]
    return JumpChain(times.tolist(), prefixes)


def sample_jump_chain(graphex, k_max, s_init=1.0, rng=None, max_window=2.0**40):
    """Sample the first ``k_max`` jumps of the graph process.

    The window starts at ``s_init`` and doubles, extending one realization,
    until at least ``k_max`` distinct entry times are present.
    """
    check_graphex(graphex)
    if graphex.is_zero():
        raise ValidationError("jump chain undefined for zero graphex")
    if k_max < 1:
        raise ValidationError("k_max must be at least 1")
    if not s_init > 0:
        raise ValidationError("s_init must be positive")
    config = PoissonConfiguration(graphex, rng).extend(s_init)
    while np.unique(config.edges[:, 1]).size < k_max:
        if config.s * 2 > max_window:
            raise CapExceededError(
                f"fewer than {k_max} jumps within window {config.s}; "
                f"raise max_window above {max_window}"
            )
        config.extend(2 * config.s)
    return jump_chain_from_labelled(config.labelled_graph(), k_max)


def _with_copies(g, copies, cap=DEFAULT_CAP):
    # Copies of adjacent originals are adjacent; copies of a looped original
    # keep the loop and are adjacent to each other.
    copies = np.asarray(copies, dtype=int)
    start = np.concatenate([[0], np.cumsum(copies)])
    edges = []
    for i, j in g.edges:
        ci = range(start[i], start[i + 1])
        if i == j:
            edges += [(a, b) for a in ci for b in ci if a <= b]
        else:
            cj = range(start[j], start[j + 1])
            edges += [(a, b) for a in ci for b in cj]
    n = int(start[-1])
    v = len({x for e in edges for x in e})
    return UnlabelledGraph.from_edges(n, edges, canonical=v <= cap)


def subsample_bernoulli(g, p, rng=None):
    """Keep each vertex independently with probability ``p``."""
    if not 0 <= p <= 1:
        raise ValidationError("Bernoulli subsampling needs 0 <= p <= 1")
    rng = check_random_state(rng)
    keep = (rng.random(g.n_vertices) < p).astype(int)
    return _with_copies(g, keep)


def subsample_poisson(g, p, rng=None, copies=None):
    """Take ``Po(p)`` copies of each vertex.

    ``copies`` injects explicit copy counts instead of drawing them.
    """
    if p < 0:
        raise ValidationError("Poisson subsampling needs p >= 0")
    if copies is None:
        rng = check_random_state(rng)
        copies = rng.poisson(p, size=g.n_vertices)
    return _with_copies(g, copies)


def coupling_fill_probability(p):
    """``P(I = 1 | Y = 0)`` for the coupling of ``Be(p)`` and ``Po(p)``."""
    return (p - 1.0 + math.exp(-p)) * math.exp(p)


def coupled_indicators(p, size, rng=None):
    """Coupled draws ``(I, Y)`` with ``I ~ Be(p)``, ``Y ~ Po(p)``.

    ``Y >= 1`` forces ``I = 1`` and ``I = 0`` forces ``Y = 0``; when ``Y = 0``
    the indicator is filled in with the probability that restores the
    ``Be(p)`` marginal.
    """
    if not 0 <= p <= 1:
        raise ValidationError("the Bernoulli/Poisson coupling needs 0 <= p <= 1")
    rng = check_random_state(rng)
    y = rng.poisson(p, size=size)
    fill = rng.random(size) < coupling_fill_probability(p)
    i = ((y >= 1) | fill).astype(np.int64)
    return i, y


def subsample_coupled(g, p, rng=None):
    """Coupled pair ``(X_p, M_p)`` of Bernoulli and Poisson subsamples."""
    i, y = coupled_indicators(p, g.n_vertices, rng)
    return _with_copies(g, i), _with_copies(g, y)
