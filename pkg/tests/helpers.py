import math

import numpy as np

from graphexlab.core import Graphex, StepFunction, StepGraphon


def half():
    return Graphex.from_graphon(StepGraphon.constant(0.5))


def two_block():
    return Graphex.from_graphon(StepGraphon.blocks([[0.8, 0.1], [0.1, 0.6]]))


def dust_only(i=1.0):
    return Graphex(dust=i)


def mixed():
    return Graphex(
        dust=0.3,
        stars=StepFunction([0.0, 0.5, 1.0], [0.4, 0.1]),
        graphon=StepGraphon.blocks([[0.6, 0.2], [0.2, 0.4]]),
    )


FIXTURE_GRAPHEXES = {
    "half": half,
    "two_block": two_block,
    "dust": dust_only,
    "mixed": mixed,
}


def within_3se(sample, mean):
    sample = np.asarray(sample, dtype=float)
    se = sample.std(ddof=1) / math.sqrt(sample.size)
    return abs(sample.mean() - mean) <= 3 * se, sample.mean(), se


def chi2_same_law(keys1, keys2, min_expected=5):
    """p-value of a chi-squared homogeneity test; rare classes are pooled."""
    from collections import Counter

    from scipy.stats import chi2_contingency

    c1, c2 = Counter(keys1), Counter(keys2)
    n1, n2 = sum(c1.values()), sum(c2.values())
    table, rare = [], [0, 0]
    for k in set(c1) | set(c2):
        a, b = c1.get(k, 0), c2.get(k, 0)
        if min(n1, n2) * (a + b) / (n1 + n2) < min_expected:
            rare[0] += a
            rare[1] += b
        else:
            table.append([a, b])
    if sum(rare):
        table.append(rare)
    if len(table) < 2:
        return 1.0
    return chi2_contingency(np.array(table).T)[1]


def keys_of(graphs):
    return [g.key if g is not None else "overflow" for g in graphs]


def labelled_key(lab, cap=6):
    from graphexlab.core import forget_labels

    return forget_labels(lab).key if lab.n_vertices <= cap else "overflow"


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []
