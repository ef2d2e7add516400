"""Pilot run that freezes the cut-distance thresholds used by the acceptance tests.

Runs the empirical convergence experiment with a pilot seed (distinct from the
acceptance seed) and stores, per graphon, the 99th percentile of the s=40
median over bootstrap resamples of 20 replicates.

    python3 tools/pilot_thresholds.py tests/fixtures/thresholds.json
"""

import json
import sys

import numpy as np

from graphexlab.core import Graphex, StepGraphon
from graphexlab.convergence import empirical_convergence_curve
from graphexlab.metrics import SearchBudget

PILOT_SEED = 1001
REPLICATES = 40
GRID = [5, 10, 20, 40]
BUDGET = dict(restarts=4, steps=1500)

TARGETS = {
    "half": StepGraphon.constant(0.5),
    "two_block": StepGraphon.blocks([[0.8, 0.1], [0.1, 0.6]]),
}


def main(path):
    rng = np.random.default_rng(PILOT_SEED)
    out = {"pilot_seed": PILOT_SEED, "replicates": REPLICATES, "grid": GRID, "budget": BUDGET, "dcut_s40": {}}
    for name, w in TARGETS.items():
        curve = empirical_convergence_curve(
            Graphex.from_graphon(w), GRID, REPLICATES, SearchBudget(**BUDGET), seed=PILOT_SEED
        )
        final = np.asarray(curve.values[-1])
        boot = np.median(rng.choice(final, size=(10_000, 20)), axis=1)
        out["dcut_s40"][name] = {
            "threshold": float(np.quantile(boot, 0.99)),
            "pilot_medians": curve.distances,
            "pilot_q25": curve.q25,
            "pilot_q75": curve.q75,
        }
        print(name, curve.distances, out["dcut_s40"][name]["threshold"], flush=True)
    with open(path, "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1])
