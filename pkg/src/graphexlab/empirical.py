"""Empirical graphons of finite graphs and stretching of graphons/graphexes."""

import math

import numpy as np

from .core import Graphex, LabelledGraph, StepFunction, StepGraphon, ValidationError

__all__ = [
    "empirical_graphon",
    "stretch_graphon",
    "stretch_graphex",
    "normalizing_stretch",
]


def _adjacency(g):
    if isinstance(g, LabelledGraph):
        labels = g.vertices
        index = {x: k for k, x in enumerate(labels)}
        a = np.zeros((len(labels), len(labels)))
        for x, y in g.edges:
            a[index[x], index[y]] = a[index[y], index[x]] = 1.0
        return a
    return g.adjacency_matrix().astype(float)


def empirical_graphon(g, s):
    """Step graphon with one cell of width ``1/s`` per vertex of ``g``.

    Cells follow the stored vertex order of an unlabelled graph (the
    canonical order when it is canonical) or the label order of a labelled
    graph.  The empty graph maps to the zero graphon on ``[0, 1/s)``.
    """
    if not s > 0:
        raise ValidationError("empirical graphon needs s > 0")
    a = _adjacency(g)
    n = a.shape[0]
    if n == 0:
        return StepGraphon.zero(1.0 / s)
    return StepGraphon(np.arange(n + 1) / s, a)


def stretch_graphon(w, c):
    """``W^(c)(x, y) = W(x / c, y / c)``: boundaries scale by ``c``."""
    if not c > 0:
        raise ValidationError("stretch factor must be positive")
    return StepGraphon(w.boundaries * c, w.values.copy())


def stretch_graphex(g, c):
    """Stretch all three parts: dust ``c^2 I``, stars ``c S(x / c)``, graphon ``W^(c)``."""
    if not c > 0:
        raise ValidationError("stretch factor must be positive")
    stars = StepFunction(g.stars.boundaries * c, g.stars.values * c)
    return Graphex(
        dust=c * c * g.dust,
        stars=stars,
        graphon=stretch_graphon(g.graphon, c),
        loops=g.loops,
    )


def normalizing_stretch(w):
    """Stretch ``w`` to unit L1 norm; returns ``(W^(c), c)``."""
    norm = w.l1_norm()
    if norm == 0:
        raise ValidationError("stretched metric undefined for zero graphon")
    c = 1.0 / math.sqrt(norm)
    return stretch_graphon(w, c), c
