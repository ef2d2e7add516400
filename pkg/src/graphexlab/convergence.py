"""Monte Carlo harness for the convergence statements about graphexes.

Convergence in distribution of finite unlabelled graphs is measured by the
total-variation distance between empirical laws over canonical classes,
with graphs above a vertex cap pooled into one overflow class.  Replicated
experiments derive one seed stream per task, so results do not depend on
how many worker processes run them.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math
import time

import numpy as np

from ._canon import DEFAULT_CAP
from .core import (
    ValidationError,
    check_graphex,
    check_random_state,
    forget_labels,
)
from .empirical import empirical_graphon
from .metrics import SearchBudget, cut_distance, cut_distance_stretched
from .oracle import rectangle_count_distribution
from .sampler import (
    PoissonConfiguration,
    sample_edge_counts,
    sample_graphs,
    sample_jump_chain,
)

__all__ = [
    "TwoSampleReport",
    "ConvergenceCurve",
    "RelabelReport",
    "OVERFLOW",
    "two_sample_report",
    "distributional_distance",
    "edge_count_distance",
    "empirical_convergence_curves",
    "empirical_convergence_curve",
    "relabel_convergence_test",
    "jump_sequence_comparison",
    "tv_distance",
]

OVERFLOW = "overflow"
METRICS = ("dcut", "dcut_stretched")


@dataclass
class TwoSampleReport:
    """Plug-in TV distance between two samples over a finite class partition."""

    statistic: float
    p_value_proxy: float
    class_table: dict
    n_samples: tuple

    @property
    def n_classes(self):
        return len(self.class_table)

    @property
    def noise_bound(self):
        """``3 sqrt(C / n)``: the envelope used for same-law comparisons."""
        return 3.0 * math.sqrt(self.n_classes / min(self.n_samples))


def tv_distance(p, q):
    """Total-variation distance between two probability vectors."""
    return 0.5 * float(np.abs(np.asarray(p, float) - np.asarray(q, float)).sum())


def two_sample_report(keys1, keys2, rng=None, n_permutations=200):
    """TV between the empirical laws of two samples of hashable keys.

    The p-value proxy is a permutation test on the pooled sample.
    """
    rng = check_random_state(rng)
    keys1, keys2 = list(keys1), list(keys2)
    classes = sorted(set(keys1) | set(keys2), key=str)
    index = {k: i for i, k in enumerate(classes)}
    c1 = np.array([index[k] for k in keys1], dtype=np.int64)
    c2 = np.array([index[k] for k in keys2], dtype=np.int64)
    C = len(classes)

    def tv(a, b):
        return tv_distance(np.bincount(a, minlength=C) / a.size, np.bincount(b, minlength=C) / b.size)

    stat = tv(c1, c2)
    pooled = np.concatenate([c1, c2])
    hits = 0
    for _ in range(n_permutations):
        perm = rng.permutation(pooled)
        if tv(perm[: c1.size], perm[c1.size :]) >= stat:
            hits += 1
    n1 = np.bincount(c1, minlength=C)
    n2 = np.bincount(c2, minlength=C)
    table = {str(k): (int(n1[i]), int(n2[i])) for i, k in enumerate(classes)}
    return TwoSampleReport(
        statistic=stat,
        p_value_proxy=(1 + hits) / (1 + n_permutations),
        class_table=table,
        n_samples=(c1.size, c2.size),
    )


def _class_keys(graphex, s, n, rng, v_cap):
    return [g.key if g is not None else OVERFLOW for g in sample_graphs(graphex, s, n, rng, v_cap)]


def distributional_distance(g1, g2, s, n_samples, v_cap=6, rng=None, s2=None, n_permutations=200):
    """Compare the laws of ``G_s(g1)`` and ``G_{s2}(g2)`` (``s2`` defaults to ``s``)."""
    rng = check_random_state(rng)
    k1 = _class_keys(g1, s, n_samples, rng, v_cap)
    k2 = _class_keys(g2, s if s2 is None else s2, n_samples, rng, v_cap)
    return two_sample_report(k1, k2, rng, n_permutations)


def edge_count_distance(g1, s1, g2, s2, n_samples, rng=None, n_permutations=200):
    """Compare the laws of ``e(G_{s1}(g1))`` and ``e(G_{s2}(g2))``."""
    rng = check_random_state(rng)
    e1 = sample_edge_counts(g1, s1, n_samples, rng).tolist()
    e2 = sample_edge_counts(g2, s2, n_samples, rng).tolist()
    return two_sample_report(e1, e2, rng, n_permutations)


@dataclass
class ConvergenceCurve:
    """Distances of empirical graphons to the target along a grid of windows."""

    s_values: list
    distances: list
    q25: list
    q75: list
    metric_tag: str
    values: list = field(default_factory=list, repr=False)
    exact: list = field(default_factory=list, repr=False)
    complete: bool = True


def _task_rng(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _distances(graph, s, target, metrics, budget):
    w_hat = empirical_graphon(graph, s)
    out = {}
    for m in metrics:
        if m == "dcut":
            r = cut_distance(w_hat, target, budget)
            out[m] = (r.value, r.exact)
        elif w_hat.is_zero():
            out[m] = (math.nan, None)
        else:
            r = cut_distance_stretched(w_hat, target, budget)
            out[m] = (r.value, r.exact)
    return out


def _curve_task(args):
    graphex, grid, rep, seed, metrics, budget, growing, deadline = args
    rows = []
    config = None
    for i, s in enumerate(grid):
        if deadline is not None and time.time() > deadline:
            rows += [(s, rep, m, math.nan, "skipped") for m in metrics]
            continue
        if growing:
            if config is None:
                config = PoissonConfiguration(graphex, _task_rng(seed, rep))
            lab = config.extend(s).labelled_graph()
        else:
            lab = PoissonConfiguration(graphex, _task_rng(seed, rep, i)).extend(s).labelled_graph()
        graph = forget_labels(lab, canonical=lab.n_vertices <= DEFAULT_CAP)
        task_budget = SearchBudget(**{**budget.__dict__, "seed": int(_task_rng(seed, rep, i, 1).integers(2**31))})
        for m, (v, ex) in _distances(graph, s, graphex.graphon, metrics, task_budget).items():
            flag = "undefined" if ex is None else "exact" if ex else "heuristic"
            rows.append((s, rep, m, v, flag))
    return rows


def empirical_convergence_curves(
    graphex,
    s_grid,
    replicates,
    budget=None,
    seed=0,
    metrics=METRICS,
    growing=False,
    workers=1,
    time_budget=None,
):
    """Cut distances between empirical graphons of ``G_s`` and the graphon.

    For every ``s`` in ``s_grid`` and every replicate a graph ``G_s`` is
    sampled, its empirical graphon (cells of width ``1/s``) built, and
    compared with the target graphon.  With ``growing=True`` each replicate
    is a single realization extended along the grid.  The stretched metric
    is undefined (NaN, flag ``undefined``) for an empty sample.  Returns
    ``(curves, rows)``: one :class:`ConvergenceCurve` per metric and the raw
    ``(s, replicate, metric, value, exact_flag)`` rows.
    """
    check_graphex(graphex)
    if not graphex.is_pure_graphon():
        raise ValidationError("empirical convergence curves need a pure graphon (S = 0, I = 0)")
    metrics = tuple(metrics)
    for m in metrics:
        if m not in METRICS:
            raise ValidationError(f"unknown metric {m!r}")
    if "dcut_stretched" in metrics and graphex.graphon.is_zero():
        raise ValidationError("stretched metric undefined for zero graphon")
    budget = budget or SearchBudget()
    grid = sorted(float(s) for s in s_grid)
    deadline = None if time_budget is None else time.time() + time_budget
    tasks = [(graphex, grid, rep, seed, metrics, budget, growing, deadline) for rep in range(replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_curve_task, tasks))
    else:
        results = [_curve_task(t) for t in tasks]
    rows = sorted((r for res in results for r in res), key=lambda r: (r[0], r[2], r[1]))

    curves = {}
    for m in metrics:
        vals, flags = [], []
        for s in grid:
            sel = [r for r in rows if r[0] == s and r[2] == m]
            vals.append([r[3] for r in sel])
            flags.append([r[4] for r in sel])
        finite = [np.asarray([v for v in x if not math.isnan(v)]) for x in vals]
        curves[m] = ConvergenceCurve(
            s_values=grid,
            distances=[float(np.median(x)) if x.size else math.nan for x in finite],
            q25=[float(np.quantile(x, 0.25)) if x.size else math.nan for x in finite],
            q75=[float(np.quantile(x, 0.75)) if x.size else math.nan for x in finite],
            metric_tag=m,
            values=vals,
            exact=flags,
            complete=not any("skipped" in f for f in flags),
        )
    return curves, rows


def empirical_convergence_curve(graphex, s_grid, replicates, budget=None, seed=0, metric="dcut", **kw):
    """Single-metric version of :func:`empirical_convergence_curves`."""
    curves, _ = empirical_convergence_curves(
        graphex, s_grid, replicates, budget, seed, metrics=(metric,), **kw
    )
    return curves[metric]


@dataclass
class RelabelReport:
    s_values: list
    tv: list
    n_vertices: list
    reference: np.ndarray = field(repr=False)
    conditional: list = field(repr=False)


def _conditional_counts(graph, s, u, n_relabel, k_max, rng, chunk=2000):
    # Law of xi(lbl_s(G))(U) given G, from n_relabel independent relabellings.
    counts = np.zeros(k_max + 2)
    if graph.n_edges == 0:
        counts[0] = n_relabel
        return counts / n_relabel
    e = np.asarray(graph.edges)
    a, b = e[:, 0], e[:, 1]
    loop = a == b
    done = 0
    while done < n_relabel:
        m = min(chunk, n_relabel - done)
        lab = rng.uniform(0.0, s, size=(m, graph.n_vertices))
        x, y = lab[:, a], lab[:, b]
        k = u.contains(x, y).sum(axis=1) + (u.contains(y, x) & ~loop).sum(axis=1)
        counts += np.bincount(np.minimum(k, k_max + 1), minlength=k_max + 2)
        done += m
    return counts / n_relabel


def relabel_convergence_test(g, r, u, s_grid, k_max, n_relabel, n_reference, rng=None):
    """Conditional law of rectangle counts after random relabelling, per ``s``.

    One realization of the graph process is grown along ``s_grid``; at each
    ``s`` the law of ``xi(lbl_s(G_s))(U)`` given ``G_s`` is estimated from
    ``n_relabel`` relabellings and compared (TV over ``0..k_max`` plus
    overflow) with the unconditional law of ``xi(U)`` estimated from
    ``n_reference`` samples of ``Gamma_r``.
    """
    check_graphex(g)
    grid = sorted(float(s) for s in s_grid)
    if u.bounding_size() > r:
        raise ValidationError("the rectangle union must lie inside [0, r]^2")
    if grid and r > grid[0]:
        raise ValidationError("r must not exceed the smallest window in s_grid")
    rng = check_random_state(rng)
    reference = rectangle_count_distribution(g, r, u, k_max, n_reference, rng)
    config = PoissonConfiguration(g, rng)
    tvs, sizes, conds = [], [], []
    for s in grid:
        lab = config.extend(s).labelled_graph()
        graph = forget_labels(lab, canonical=False)
        cond = _conditional_counts(graph, s, u, n_relabel, k_max, rng)
        tvs.append(tv_distance(cond, reference))
        sizes.append(graph.n_vertices)
        conds.append(cond)
    return RelabelReport(grid, tvs, sizes, reference, conds)


def _jump_keys(g, k, n, rng, v_cap):
    out = []
    for _ in range(n):
        keys = sample_jump_chain(g, k, rng=rng).keys(v_cap)
        out.append(OVERFLOW if None in keys else keys)
    return out


def jump_sequence_comparison(g1, g2, k, n_samples, rng=None, v_cap=DEFAULT_CAP, n_permutations=200):
    """TV between the joint laws of the first ``k`` jump graphs of two graphexes."""
    for g in (g1, g2):
        check_graphex(g)
        if g.is_zero():
            raise ValidationError("jump sequences are undefined for the zero graphex")
    rng = check_random_state(rng)
    k1 = _jump_keys(g1, k, n_samples, rng, v_cap)
    k2 = _jump_keys(g2, k, n_samples, rng, v_cap)
    return two_sample_report(k1, k2, rng, n_permutations)
