"""
Cause-effect pairs benchmark on the bundled three-pair fixture.

Point the script at a real copy of the pairs dataset (a directory with
``pairmeta.txt`` and ``pairNNNN.txt`` files) by passing it as the first
argument.
"""

import sys
from pathlib import Path

from activeptree.pairsdata import bin_pair, load_pairs, run_pairs_benchmark

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures" / "pairs"

# -- each pair is binned into 5 equiprobable bins per variable ---------------
for pair in load_pairs(root):
    b = bin_pair(pair, K=5)
    print("pair %s: n=%d weight=%.2f degenerate=%s" % (b.id, len(b.cause_bins), b.weight, b.degenerate))

# -- weighted mean number of interventions to reach 95% certainty ------------
for n_obs in (50, 100):
    for s in run_pairs_benchmark(root, n_obs, ["expected", "random"], restarts=3, max_interventions=40):
        print("N=%3d %-9s %6.2f +- %.2f" % (n_obs, s.strategy, s.weighted_mean_interventions, s.weighted_stderr))
