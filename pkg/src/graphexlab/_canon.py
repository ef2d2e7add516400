"""Canonical labelling of small graphs.

A graph on vertices ``0..n-1`` is encoded column by column: for the vertex
placed at position ``j`` we record its loop bit followed by its adjacency to
the vertices at positions ``0..j-1``.  The canonical form is the vertex order
maximizing this code, restricted to orders compatible with an
isomorphism-invariant colour refinement.  Twin vertices are never branched on
twice, which keeps complete, empty and complete multipartite graphs cheap.
"""

from functools import lru_cache

DEFAULT_CAP = 12


class CanonicalizationError(ValueError):
    """Raised when a graph exceeds the canonicalization vertex cap."""


def _refine(n, nbrs, loops):
    colors = [(loops[v], len(nbrs[v])) for v in range(n)]
    ranks = {c: i for i, c in enumerate(sorted(set(colors)))}
    colors = [ranks[c] for c in colors]
    n_classes = len(ranks)
    while True:
        sigs = [(colors[v], tuple(sorted(colors[u] for u in nbrs[v]))) for v in range(n)]
        ranks = {c: i for i, c in enumerate(sorted(set(sigs)))}
        new = [ranks[c] for c in sigs]
        if len(ranks) == n_classes:
            return new
        colors, n_classes = new, len(ranks)


def _twin_classes(n, nbrs, loops, colors):
    rep = list(range(n))
    for v in range(n):
        for u in range(v):
            if rep[u] != u:
                continue
            if colors[u] != colors[v] or loops[u] != loops[v]:
                continue
            if nbrs[u] - {v} == nbrs[v] - {u}:
                rep[v] = u
                break
    return rep


@lru_cache(maxsize=65536)
def _canonical(n, edges):
    nbrs = [set() for _ in range(n)]
    loops = [0] * n
    for i, j in edges:
        if i == j:
            loops[i] = 1
        else:
            nbrs[i].add(j)
            nbrs[j].add(i)
    colors = _refine(n, nbrs, loops)
    twin = _twin_classes(n, nbrs, loops, colors)
    slot_color = sorted(colors)

    prefix = []
    order = []
    placed = [False] * n
    best = [None, None]  # code, order

    def dfs(k):
        seen = set()
        for v in range(n):
            if placed[v] or colors[v] != slot_color[k] or twin[v] in seen:
                continue
            seen.add(twin[v])
            col = (loops[v],) + tuple(1 if order[i] in nbrs[v] else 0 for i in range(k))
            prefix.append(col)
            code = best[0]
            if code is not None and prefix < code[: k + 1]:
                prefix.pop()
                continue
            order.append(v)
            placed[v] = True
            if k + 1 == n:
                if code is None or prefix > code:
                    best[0] = list(prefix)
                    best[1] = list(order)
            else:
                dfs(k + 1)
            placed[v] = False
            order.pop()
            prefix.pop()

    if n:
        dfs(0)
        position = {v: k for k, v in enumerate(best[1])}
    else:
        position = {}
    out = []
    for i, j in edges:
        a, b = position[i], position[j]
        out.append((a, b) if a <= b else (b, a))
    return tuple(sorted(out))


def canonical_edges(n, edges, cap=DEFAULT_CAP):
    """Return the canonical edge tuple of a graph on ``n`` vertices.

    ``edges`` is an iterable of index pairs; loops are pairs ``(i, i)``.
    Isolated vertices are kept as vertices of the graph; callers that want
    graphs without isolated vertices must compact first.
    """
    if n > cap:
        raise CanonicalizationError(
            f"graph has {n} vertices, too large to canonicalize (cap {cap})"
        )
    norm = tuple(sorted({(i, j) if i <= j else (j, i) for i, j in edges}))
    return _canonical(n, norm)
