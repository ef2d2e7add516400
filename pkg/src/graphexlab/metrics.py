"""Cut norm, cut distance and L1 quantities for step kernels.

The cut norm is computed exactly for up to 20 cells by enumerating one side
of the rectangle and choosing the other side greedily.  Cut distances
minimize over cell permutations of a common equal-width refinement; the
minimum over permutations is an upper bound on the infimum over all
measure-preserving maps.
"""

from dataclasses import dataclass, field
import itertools

import numpy as np

from .core import CapExceededError, StepGraphon, StepKernel, ValidationError
from .empirical import normalizing_stretch

__all__ = [
    "CutNormResult",
    "CutDistanceResult",
    "SearchBudget",
    "cut_norm",
    "cut_distance",
    "cut_distance_stretched",
    "common_refinement",
    "projected_refinement",
    "difference",
    "permute_cells",
    "l1_norm",
    "l1_distance",
    "truncate",
]

EXACT_CUT_NORM_MAX = 20


@dataclass
class CutNormResult:
    value: float
    witness_T: tuple
    witness_U: tuple
    exact: bool


@dataclass
class CutDistanceResult:
    value: float
    alignment: tuple
    exact: bool
    refinement_size: int
    cut_norm: CutNormResult = field(default=None, repr=False)
    projection_error: float = 0.0


@dataclass
class SearchBudget:
    """Knobs for the cut-distance search.

    Permutations are enumerated when the refinement has at most
    ``exhaustive_max`` cells; otherwise simulated annealing runs
    ``restarts`` chains of ``steps`` transposition moves with geometric
    cooling from ``t0`` (relative to the starting objective) down to
    ``t0 * cooling_ratio``.  Kernels without a common grid of at most
    ``max_refinement`` cells are cell-averaged onto one when ``project`` is
    set (the result is then flagged inexact).
    """

    exhaustive_max: int = 8
    restarts: int = 16
    steps: int = 2000
    t0: float = 0.05
    cooling_ratio: float = 1e-3
    inner_exact_max: int = 10
    cut_norm_restarts: int = 32
    max_refinement: int = 256
    project: bool = True
    seed: int = 0


def _weighted(f, widths=None):
    if isinstance(f, StepKernel):
        w = f.widths
        values = f.values
    else:
        values = np.atleast_2d(np.asarray(f, dtype=float))
        w = np.ones(values.shape[0]) if widths is None else np.asarray(widths, dtype=float)
    return w[:, None] * values * w[None, :]


def _subset_bits(n, start, stop):
    masks = np.arange(start, stop, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(float)


def _exact(K):
    # For fixed T the best U takes the columns whose T-sum has the right sign.
    n = K.shape[0]
    best = (-1.0, 0, 1)
    chunk = 1 << 16
    for start in range(0, 1 << n, chunk):
        bits = _subset_bits(n, start, min(start + chunk, 1 << n))
        c = bits @ K
        pos = np.maximum(c, 0.0).sum(axis=1)
        neg = np.maximum(-c, 0.0).sum(axis=1)
        for sign, vals in ((1, pos), (-1, neg)):
            k = int(np.argmax(vals))
            if vals[k] > best[0]:
                best = (float(vals[k]), start + k, sign)
    value, mask, sign = best
    t = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
    col = t.astype(float) @ K
    u = sign * col > 0
    return value, t, u


def _alternate(K, u, sign):
    # Coordinate ascent on sign * 1_T' K 1_U; the value never decreases, so
    # it stops after finitely many rounds.
    u = u.astype(float)
    best = (-np.inf, None, None)
    while True:
        t = (sign * (K @ u) > 0).astype(float)
        u = (sign * (t @ K) > 0).astype(float)
        val = sign * float(t @ K @ u)
        if val <= best[0]:
            return best
        best = (val, t.astype(bool), u.astype(bool))


def _heuristic(K, restarts, rng, warm=None):
    n = K.shape[0]
    starts = [] if warm is None else list(warm)
    starts += [rng.random(n) < 0.5 for _ in range(restarts)]
    starts.append(np.ones(n, dtype=bool))
    best = (0.0, np.zeros(n, bool), np.zeros(n, bool))
    for u in starts:
        for sign in (1, -1):
            val, t, uu = _alternate(K, u, sign)
            if val > best[0]:
                best = (val, t, uu)
    return best


def cut_norm(f, widths=None, exact=None, restarts=32, rng=None):
    """Cut norm of a step kernel.

    ``f`` is a :class:`StepKernel` or a plain matrix (with optional cell
    ``widths``, default 1).  Exact enumeration is used for at most 20 cells
    unless ``exact=False``; the heuristic value is a lower bound.
    """
    K = _weighted(f, widths)
    n = K.shape[0]
    if exact is None:
        exact = n <= EXACT_CUT_NORM_MAX
    if exact and n > EXACT_CUT_NORM_MAX:
        raise CapExceededError(f"exact cut norm limited to {EXACT_CUT_NORM_MAX} cells, got {n}")
    if exact:
        value, t, u = _exact(K)
    else:
        value, t, u = _heuristic(K, restarts, np.random.default_rng(rng))
    return CutNormResult(
        value=max(float(value), 0.0),
        witness_T=tuple(np.flatnonzero(t).tolist()),
        witness_U=tuple(np.flatnonzero(u).tolist()),
        exact=bool(exact),
    )


def _grid_size(points, max_cells, tol=1e-9, limit=100_000):
    # Smallest n for which every point is (nearly) a multiple of 1/n.
    for n in range(1, limit + 1):
        x = points * n
        if np.all(np.abs(x - np.rint(x)) <= tol * max(n, 1)):
            return n
    return None


def common_refinement(*kernels, max_cells=256):
    """Express kernels on one equal-width grid over a common support.

    Returns ``(matrices, width)``.  Supports are padded with zeros up to the
    largest one.
    """
    total = max(k.support for k in kernels)
    points = np.concatenate([k.boundaries[1:] / total for k in kernels])
    n = _grid_size(points, max_cells, limit=max_cells)
    if n is None:
        needed = _grid_size(points, None)
        hint = f"; raise the cap to at least {needed}" if needed else ""
        raise CapExceededError(f"common refinement needs more than {max_cells} cells{hint}")
    width = total / n
    mids = (np.arange(n) + 0.5) * width
    out = []
    for k in kernels:
        idx = k.cell_of(mids)
        vals = np.pad(k.values, ((0, 1), (0, 1)))
        out.append(vals[idx[:, None], idx[None, :]])
    return out, width


def _overlap(bounds, grid):
    # |grid cell i  intersect  kernel cell j|
    lo = np.maximum(grid[:-1, None], bounds[None, :-1])
    hi = np.minimum(grid[1:, None], bounds[None, 1:])
    return np.clip(hi - lo, 0.0, None)


def projected_refinement(*kernels, max_cells=256):
    """Cell-average every kernel onto one equal-width grid.

    Used when the boundaries admit no exact common grid.  The grid width is
    the smallest kernel cell width for which the padded support fits in
    ``max_cells`` cells (or ``support / max_cells``).  Returns
    ``(matrices, width, errors)`` with ``errors[k]`` the L1 distance between
    kernel ``k`` and its projection; the cut distance of the projections is
    within ``sum(errors)`` of the cut distance of the kernels over the same
    rearrangements.
    """
    total = max(k.support for k in kernels)
    widths = np.concatenate([k.widths for k in kernels])
    width = total / max_cells
    for w in np.sort(widths[widths > 0]):
        if np.ceil(total / w - 1e-9) <= max_cells:
            width = float(w)
            break
    n = int(np.ceil(total / width - 1e-9))
    grid = np.arange(n + 1) * width
    out, errors = [], []
    for k in kernels:
        ov = _overlap(k.boundaries, grid) / width
        proj = ov @ k.values @ ov.T
        out.append(proj)
        # exact L1 error on the joint refinement of grid and kernel cells
        cuts = np.union1d(grid, k.boundaries)
        lens = np.diff(cuts)
        mids = cuts[:-1] + lens / 2
        gi = np.minimum((mids / width).astype(int), n - 1)
        ki = k.cell_of(mids)
        kv = np.pad(k.values, ((0, 1), (0, 1)))
        inside = mids < grid[-1]
        orig = kv[ki[:, None], ki[None, :]]
        pv = np.where(inside[:, None] & inside[None, :], proj[gi[:, None], gi[None, :]], 0.0)
        errors.append(float((np.abs(orig - pv) * lens[:, None] * lens[None, :]).sum()))
    return out, width, errors


def difference(w1, w2, max_cells=4096):
    """``w1 - w2`` as a :class:`StepKernel` on the common refinement."""
    (A, B), width = common_refinement(w1, w2, max_cells=max_cells)
    n = A.shape[0]
    return StepKernel(np.arange(n + 1) * width, A - B)


def permute_cells(w, perm):
    """Rearrange the cells of a step kernel in the order ``perm``."""
    perm = np.asarray(perm)
    widths = w.widths[perm]
    bounds = np.concatenate([[0.0], np.cumsum(widths)])
    return type(w)(bounds, w.values[np.ix_(perm, perm)])


def _exact_batch(F):
    # F: (P, n, n) unweighted; cut norm of each slice.
    n = F.shape[1]
    bits = _subset_bits(n, 0, 1 << n)
    c = bits @ F
    pos = np.maximum(c, 0.0).sum(axis=2)
    neg = np.maximum(-c, 0.0).sum(axis=2)
    return np.maximum(pos.max(axis=1), neg.max(axis=1))


def _exhaustive(A, B, batch=4096):
    n = A.shape[0]
    best_val, best_perm = np.inf, None
    perms = itertools.permutations(range(n))
    while True:
        block = np.array(list(itertools.islice(perms, batch)))
        if block.size == 0:
            break
        F = A[block[:, :, None], block[:, None, :]] - B[None]
        vals = _exact_batch(F)
        k = int(np.argmin(vals))
        if vals[k] < best_val - 1e-15:
            best_val, best_perm = float(vals[k]), tuple(block[k].tolist())
    return best_val, best_perm


class _Objective:
    def __init__(self, A, B, exact, rng):
        self.A, self.B, self.exact, self.rng = A, B, exact, rng
        self.warm = None

    def __call__(self, perm):
        F = self.A[np.ix_(perm, perm)] - self.B
        if self.exact:
            return _exact(F)[0]
        val, t, u = _heuristic(F, 1, self.rng, warm=self.warm)
        self.warm = [u, t]
        return val


def _anneal(A, B, budget, rng):
    n = A.shape[0]
    obj = _Objective(A, B, n <= budget.inner_exact_max, rng)
    perm = rng.permutation(n)
    cur = obj(perm)
    best_val, best_perm = cur, perm.copy()
    temp = budget.t0 * max(cur, 1e-12)
    cool = budget.cooling_ratio ** (1.0 / max(budget.steps, 1))
    for _ in range(budget.steps):
        i, j = rng.choice(n, size=2, replace=False)
        perm[i], perm[j] = perm[j], perm[i]
        val = obj(perm)
        if val <= cur or rng.random() < np.exp(-(val - cur) / temp):
            cur = val
            if val < best_val:
                best_val, best_perm = val, perm.copy()
        else:
            perm[i], perm[j] = perm[j], perm[i]
        temp *= cool
    return best_val, best_perm


def cut_distance(w1, w2, budget=None):
    """Cut distance over cell permutations of a common refinement.

    Exact (``exact=True``) when the refinement has at most
    ``budget.exhaustive_max`` cells.  Otherwise the value comes from
    simulated annealing and is the cut norm of the best alignment found:
    an upper bound on the permutation minimum while that cut norm is
    computed exactly (at most 20 cells), and a heuristic estimate beyond.
    """
    budget = budget or SearchBudget()
    proj_err = 0.0
    try:
        (A, B), width = common_refinement(w1, w2, max_cells=budget.max_refinement)
    except CapExceededError:
        if not budget.project:
            raise
        (A, B), width, errs = projected_refinement(w1, w2, max_cells=budget.max_refinement)
        proj_err = sum(errs)
    n = A.shape[0]
    scale = width * width
    if n <= budget.exhaustive_max:
        val, perm = _exhaustive(A, B)
        exact = True
    else:
        seeds = np.random.SeedSequence(budget.seed).spawn(budget.restarts)
        runs = [_anneal(A, B, budget, np.random.default_rng(ss)) for ss in seeds]
        val, perm = min(((v, tuple(int(x) for x in p)) for v, p in runs))
        exact = False
    perm = np.asarray(perm)
    cn = cut_norm(
        A[np.ix_(perm, perm)] - B,
        widths=np.full(n, width),
        restarts=budget.cut_norm_restarts,
        rng=budget.seed,
    )
    value = cn.value if n <= EXACT_CUT_NORM_MAX else max(cn.value, val * scale)
    return CutDistanceResult(
        value=value,
        alignment=tuple(perm.tolist()),
        exact=exact and proj_err == 0.0,
        refinement_size=n,
        cut_norm=cn,
        projection_error=proj_err,
    )


def cut_distance_stretched(w1, w2, budget=None):
    """Cut distance after stretching both graphons to unit L1 norm."""
    a, _ = normalizing_stretch(w1)
    b, _ = normalizing_stretch(w2)
    return cut_distance(a, b, budget)


def l1_norm(w):
    """``sum |F_ij| w_i w_j`` of a step kernel."""
    return float(w.l1_norm())


def l1_distance(w1, w2, max_cells=4096):
    """L1 distance without rearrangement, on the common refinement."""
    (A, B), width = common_refinement(w1, w2, max_cells=max_cells)
    return float(np.abs(A - B).sum() * width * width)


def truncate(w, N):
    """Zero ``w`` outside ``[0, N]^2``; returns ``(W^(N), tail integral)``.

    A cell straddling ``N`` is split there.
    """
    if not N > 0:
        raise ValidationError("truncation level must be positive")
    b = w.boundaries
    if N >= b[-1]:
        return StepGraphon(b.copy(), w.values.copy()), 0.0
    k = int(np.searchsorted(b, N, side="left"))
    if b[k] == N:
        bounds = b[: k + 1]
        vals = w.values[:k, :k]
    else:
        bounds = np.concatenate([b[:k], [N]])
        vals = w.values[:k, :k]
    out = StepGraphon(bounds, vals)
    return out, float(w.integral() - out.integral())
