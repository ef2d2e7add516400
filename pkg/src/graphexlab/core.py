"""Domain types: step graphons, graphexes, labelled and unlabelled graphs.

Graphons are finite-support step kernels on ``[0, B)^2``.  Labelled graphs
are edge sets over real labels; unlabelled graphs are index graphs stored in
canonical form so that isomorphic inputs compare equal.
"""

from dataclasses import dataclass, field

import numpy as np

from ._canon import DEFAULT_CAP, CanonicalizationError, canonical_edges

__all__ = [
    "GraphexError",
    "ValidationError",
    "CapExceededError",
    "CanonicalizationError",
    "StepKernel",
    "StepGraphon",
    "StepFunction",
    "Graphex",
    "ValidationReport",
    "LabelledGraph",
    "UnlabelledGraph",
    "RectangleUnion",
    "validate_graphex",
    "check_graphex",
    "to_adjacency_measure",
    "from_adjacency_measure",
    "restrict",
    "forget_labels",
    "relabel",
    "check_random_state",
]


class GraphexError(Exception):
    """Base class for errors raised by graphexlab."""


class ValidationError(GraphexError, ValueError):
    """Invalid graphex, kernel or graph input."""


class CapExceededError(GraphexError):
    """A configured size or budget cap would be exceeded."""


def check_random_state(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator`.

    ``None`` gives a fresh unseeded generator, an int or ``SeedSequence``
    seeds a new PCG64 stream, and a Generator is passed through.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _as_boundaries(boundaries):
    b = np.asarray(boundaries, dtype=float)
    if b.ndim != 1 or b.size < 2:
        raise ValidationError("boundaries must be a list of at least two reals")
    return b


class StepKernel:
    """Step function on ``[0, B)^2``, constant on products of cells.

    Values may be negative and the matrix need not be symmetric; this is the
    type differences of graphons live in.
    """

    def __init__(self, boundaries, values):
        self.boundaries = _as_boundaries(boundaries)
        self.values = np.atleast_2d(np.asarray(values, dtype=float))
        n = self.boundaries.size - 1
        if self.values.shape != (n, n):
            raise ValidationError(
                f"values must be {n}x{n} to match {n + 1} boundaries, "
                f"got shape {self.values.shape}"
            )

    @property
    def n_cells(self):
        return self.values.shape[0]

    @property
    def widths(self):
        return np.diff(self.boundaries)

    @property
    def support(self):
        """Right end ``B`` of the support interval."""
        return float(self.boundaries[-1])

    def cell_of(self, x):
        """Cell index of each point in ``x``; ``-1`` outside ``[0, B)``."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.boundaries, x, side="right") - 1
        return np.where((x >= self.boundaries[0]) & (x < self.boundaries[-1]), idx, -1)

    def __call__(self, x, y):
        i, j = self.cell_of(x), self.cell_of(y)
        out = self.values[np.maximum(i, 0), np.maximum(j, 0)]
        return np.where((i >= 0) & (j >= 0), out, 0.0)

    def integral(self):
        w = self.widths
        return float(w @ self.values @ w)

    def l1_norm(self):
        w = self.widths
        return float(w @ np.abs(self.values) @ w)

    def problems(self):
        out = []
        if np.any(np.diff(self.boundaries) <= 0):
            out.append("boundaries are not strictly increasing")
        if self.boundaries[0] != 0.0:
            out.append("boundaries must start at 0")
        if not np.all(np.isfinite(self.values)):
            out.append("values contain non-finite entries")
        return out

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and np.array_equal(self.boundaries, other.boundaries)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"{type(self).__name__}(boundaries={self.boundaries.tolist()}, "
            f"values={self.values.tolist()})"
        )

    def to_dict(self):
        return {"boundaries": self.boundaries.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["boundaries"], d["values"])


class StepGraphon(StepKernel):
    """Symmetric step kernel with values in ``[0, 1]``."""

    @classmethod
    def constant(cls, value, support=1.0):
        return cls([0.0, support], [[value]])

    @classmethod
    def zero(cls, support=1.0):
        return cls.constant(0.0, support)

    @classmethod
    def blocks(cls, values, support=1.0):
        """Graphon with equal-width cells covering ``[0, support)``."""
        values = np.atleast_2d(np.asarray(values, dtype=float))
        return cls(np.linspace(0.0, support, values.shape[0] + 1), values)

    def degree(self):
        """Per-cell marginal ``mu_W(x) = int W(x, y) dy``."""
        return self.values @ self.widths

    def diagonal_integral(self):
        return float(np.diag(self.values) @ self.widths)

    def is_zero(self):
        return not np.any(self.values)

    def problems(self):
        out = super().problems()
        if not np.allclose(self.values, self.values.T, rtol=0.0, atol=0.0):
            out.append("graphon values matrix is not symmetric")
        if np.any(self.values < 0) or np.any(self.values > 1):
            out.append("graphon values must lie in [0, 1]")
        return out


class StepFunction:
    """Nonnegative step function on ``[0, B)``; the star intensity ``S``."""

    def __init__(self, boundaries, values):
        self.boundaries = _as_boundaries(boundaries)
        self.values = np.asarray(values, dtype=float).reshape(-1)
        if self.values.size != self.boundaries.size - 1:
            raise ValidationError("star values must have one entry per cell")

    @classmethod
    def constant(cls, value, support=1.0):
        return cls([0.0, support], [value])

    @property
    def widths(self):
        return np.diff(self.boundaries)

    @property
    def support(self):
        return float(self.boundaries[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.boundaries, x, side="right") - 1
        inside = (x >= self.boundaries[0]) & (x < self.boundaries[-1])
        return np.where(inside, self.values[np.clip(idx, 0, self.values.size - 1)], 0.0)

    def integral(self):
        return float(self.values @ self.widths)

    def is_zero(self):
        return not np.any(self.values)

    def problems(self):
        out = []
        if np.any(np.diff(self.boundaries) <= 0):
            out.append("star boundaries are not strictly increasing")
        if self.boundaries[0] != 0.0:
            out.append("star boundaries must start at 0")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            out.append("star values must be finite and nonnegative")
        return out

    def __eq__(self, other):
        return (
            isinstance(other, StepFunction)
            and np.array_equal(self.boundaries, other.boundaries)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return f"StepFunction(boundaries={self.boundaries.tolist()}, values={self.values.tolist()})"

    def to_dict(self):
        return {"boundaries": self.boundaries.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["boundaries"], d["values"])


@dataclass(eq=False)
class Graphex:
    """Triple ``(I, S, W)`` of dust intensity, star function and graphon.

    Missing ``stars`` or ``graphon`` mean the zero function.  With
    ``loops=False`` (the default) no loops are ever generated, which is the
    same as setting ``W`` to zero on the diagonal ``{x = y}``.
    """

    dust: float = 0.0
    stars: StepFunction = None
    graphon: StepGraphon = None
    loops: bool = False

    def __post_init__(self):
        self.dust = float(self.dust)
        if self.stars is None:
            self.stars = StepFunction.constant(0.0)
        if self.graphon is None:
            self.graphon = StepGraphon.zero()

    @classmethod
    def from_graphon(cls, graphon, loops=False):
        return cls(graphon=graphon, loops=loops)

    @property
    def support(self):
        """Length of the type interval that carries all of ``W`` and ``S``."""
        parts = [f.support for f in (self.graphon, self.stars) if not f.is_zero()]
        return max(parts) if parts else self.graphon.support

    def is_zero(self):
        return self.dust == 0 and self.stars.is_zero() and self.graphon.is_zero()

    def is_pure_graphon(self):
        return self.dust == 0 and self.stars.is_zero()

    def __eq__(self, other):
        return (
            isinstance(other, Graphex)
            and self.dust == other.dust
            and self.loops == other.loops
            and self.stars == other.stars
            and self.graphon == other.graphon
        )

    __hash__ = None

    def to_dict(self):
        return {
            "dust": self.dust,
            "stars": self.stars.to_dict(),
            "graphon": self.graphon.to_dict(),
            "loops": self.loops,
        }

    @classmethod
    def from_dict(cls, d):
        stars = d.get("stars")
        graphon = d.get("graphon")
        return cls(
            dust=d.get("dust", 0.0),
            stars=StepFunction.from_dict(stars) if stars is not None else None,
            graphon=StepGraphon.from_dict(graphon) if graphon is not None else None,
            loops=bool(d.get("loops", False)),
        )


@dataclass
class ValidationReport:
    valid: bool
    problems: list
    conditions: dict
    graphon_integral: float
    star_integral: float
    diagonal_integral: float
    heavy_measure: float = 0.0

    def summary(self):
        lines = [f"valid: {self.valid}"]
        lines += [f"problem: {p}" for p in self.problems]
        for name, ok in self.conditions.items():
            lines.append(f"condition ({name}): {'holds' if ok else 'fails'}")
        lines.append(f"integral W: {self.graphon_integral:.17g}")
        lines.append(f"integral S: {self.star_integral:.17g}")
        lines.append(f"diagonal integral W(x,x): {self.diagonal_integral:.17g}")
        lines.append(f"measure of {{mu_W > 1}}: {self.heavy_measure:.17g}")
        return "\n".join(lines)


def validate_graphex(g):
    """Check a graphex and report the integrability conditions.

    Problems are reported, never raised.  For finite-support step graphons
    the three integrability conditions hold automatically; they are still
    evaluated from the cell values so the report shows the numbers.
    """
    problems = []
    if not np.isfinite(g.dust) or g.dust < 0:
        problems.append("dust intensity I must be finite and nonnegative")
    problems += g.stars.problems()
    problems += g.graphon.problems()

    W = g.graphon
    w = W.widths
    mu = W.degree()
    light = (mu <= 1.0).astype(float)
    heavy_measure = float(w[mu > 1.0].sum())
    light_integral = float((w * light) @ W.values @ (w * light))
    conditions = {
        "i": bool(np.all(np.isfinite(mu)) and np.isfinite(heavy_measure)),
        "ii": bool(np.isfinite(light_integral)),
        "iii": bool(np.isfinite(W.diagonal_integral())),
    }
    return ValidationReport(
        valid=not problems and all(conditions.values()),
        problems=problems,
        conditions=conditions,
        graphon_integral=W.integral(),
        star_integral=g.stars.integral(),
        diagonal_integral=W.diagonal_integral(),
        heavy_measure=heavy_measure,
    )


def check_graphex(g):
    """Raise :class:`ValidationError` unless ``g`` is a valid graphex."""
    if not isinstance(g, Graphex):
        raise ValidationError(f"expected a Graphex, got {type(g).__name__}")
    report = validate_graphex(g)
    if not report.valid:
        raise ValidationError("; ".join(report.problems))
    return g


@dataclass(frozen=True)
class LabelledGraph:
    """Finite graph given by its edge set over real vertex labels.

    Edges are stored as ``(x, y)`` with ``x <= y``; a loop is ``(x, x)``.
    Vertices are exactly the endpoint labels, so there are no isolated
    vertices.
    """

    edges: frozenset = field(default_factory=frozenset)

    @classmethod
    def from_edges(cls, edges):
        return cls(frozenset((float(min(x, y)), float(max(x, y))) for x, y in edges))

    @property
    def vertices(self):
        return sorted({v for e in self.edges for v in e})

    @property
    def n_vertices(self):
        return len({v for e in self.edges for v in e})

    @property
    def n_edges(self):
        return len(self.edges)

    def sorted_edges(self):
        return sorted(self.edges)


@dataclass(frozen=True)
class UnlabelledGraph:
    """Graph on ``0..n_vertices-1`` without isolated vertices.

    When ``canonical`` is true the edge tuple is the canonical form, so
    isomorphic graphs compare equal.  Graphs above the canonicalization cap
    can be held with ``canonical=False``; their vertex order is arbitrary
    and equality is then structural only.
    """

    n_vertices: int = 0
    edges: tuple = ()
    canonical: bool = True

    def __post_init__(self):
        seen = {v for e in self.edges for v in e}
        if seen != set(range(self.n_vertices)):
            raise ValidationError("unlabelled graphs may not have isolated vertices")

    @classmethod
    def from_edges(cls, n_vertices, edges, canonical=True, cap=DEFAULT_CAP):
        """Build from index pairs, dropping isolated vertices first."""
        edges = [(int(i), int(j)) for i, j in edges]
        used = sorted({v for e in edges for v in e})
        index = {v: k for k, v in enumerate(used)}
        edges = [(index[i], index[j]) for i, j in edges]
        n = len(used)
        if canonical:
            return cls(n, canonical_edges(n, edges, cap=cap), True)
        edges = tuple(sorted((min(i, j), max(i, j)) for i, j in set(edges)))
        return cls(n, edges, False)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def key(self):
        """Compact string id, e.g. ``"3:0-1,0-2"``."""
        return f"{self.n_vertices}:" + ",".join(f"{i}-{j}" for i, j in self.edges)

    def adjacency_matrix(self):
        a = np.zeros((self.n_vertices, self.n_vertices), dtype=np.int8)
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1
        return a

    def has_loops(self):
        return any(i == j for i, j in self.edges)


EMPTY = UnlabelledGraph()


@dataclass(frozen=True)
class RectangleUnion:
    """Finite union of half-open rectangles ``[a, b) x [c, d)``.

    Rectangles are assumed disjoint; counts of overlapping rectangles would
    double-count points.
    """

    rectangles: tuple = ()

    @classmethod
    def box(cls, a, b, c=None, d=None):
        if c is None:
            c, d = a, b
        return cls(((float(a), float(b), float(c), float(d)),))

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        hit = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        for a, b, c, d in self.rectangles:
            hit |= (x >= a) & (x < b) & (y >= c) & (y < d)
        return hit

    def bounding_size(self):
        """Smallest ``r`` with the union inside ``[0, r]^2``."""
        if not self.rectangles:
            return 0.0
        return max(max(b, d) for _, b, _, d in self.rectangles)

    def count(self, points):
        """Number of points of an adjacency measure lying in the union."""
        if len(points) == 0:
            return 0
        p = np.asarray(points, dtype=float)
        return int(self.contains(p[:, 0], p[:, 1]).sum())


def to_adjacency_measure(g):
    """Point list of the adjacency measure of a labelled graph.

    A non-loop edge ``{x, y}`` gives the two points ``(x, y)`` and
    ``(y, x)``; a loop at ``x`` gives ``(x, x)`` once.
    """
    points = []
    for x, y in g.sorted_edges():
        points.append((x, y))
        if x != y:
            points.append((y, x))
    return points


def from_adjacency_measure(points):
    """Inverse of :func:`to_adjacency_measure`."""
    pts = set(map(tuple, points))
    for x, y in pts:
        if (y, x) not in pts:
            raise ValidationError(f"point set is not symmetric: ({x}, {y}) lacks its mirror")
    return LabelledGraph.from_edges((x, y) for x, y in pts if x <= y)


def restrict(g, r):
    """Keep the edges whose endpoint labels are both at most ``r``."""
    if r < 0:
        raise ValidationError("restriction window r must be nonnegative")
    return LabelledGraph(frozenset(e for e in g.edges if e[1] <= r))


def _labelled_to_index(g):
    labels = g.vertices
    index = {x: k for k, x in enumerate(labels)}
    return len(labels), [(index[x], index[y]) for x, y in g.edges]


def forget_labels(g, canonical=True, cap=DEFAULT_CAP):
    """Unlabelled graph underlying ``g``.

    With ``canonical=False`` the vertices are numbered in increasing label
    order and no isomorphism normalisation is done, which is the only option
    for graphs above ``cap`` vertices.
    """
    n, edges = _labelled_to_index(g)
    if canonical and n > cap:
        raise CanonicalizationError(
            f"graph has {n} vertices, too large to canonicalize (cap {cap})"
        )
    return UnlabelledGraph.from_edges(n, edges, canonical=canonical, cap=cap)


def relabel(g, s, rng=None):
    """Give the vertices of ``g`` fresh iid ``U(0, s)`` labels.

    Works for labelled and unlabelled graphs alike; any existing labels are
    discarded.  Vertex ``k`` of an unlabelled graph receives the ``k``-th
    draw, and for a labelled graph vertices are taken in label order.
    """
    if s <= 0:
        raise ValidationError("relabelling window s must be positive")
    rng = check_random_state(rng)
    if isinstance(g, LabelledGraph):
        n, edges = _labelled_to_index(g)
    else:
        n, edges = g.n_vertices, g.edges
    labels = distinct_uniform(rng, n, s)
    return LabelledGraph.from_edges((labels[i], labels[j]) for i, j in edges)


def distinct_uniform(rng, n, high, low=0.0, taken=None):
    """``n`` iid ``U(low, high)`` draws distinct from each other and ``taken``.

    Collisions among 64-bit floats have probability close to zero; the loop
    only exists so that vertex labels are guaranteed distinct.
    """
    u = rng.uniform(low, high, size=n)
    offset = 0 if taken is None else len(taken)
    while True:
        pool = u if taken is None else np.concatenate([np.asarray(taken, float), u])
        _, first = np.unique(pool, return_index=True)
        if first.size == pool.size:
            return u
        dup = np.ones(pool.size, dtype=bool)
        dup[first] = False
        dup = np.flatnonzero(dup[offset:])
        u[dup] = rng.uniform(low, high, size=dup.size)
