"""
Active learning on the asymmetric two-variable problem.

Compares expected-gain, entropy and random intervention selection over a
handful of seeded restarts and writes the averaged posterior curves to
``asymmetric_curves.svg`` in the working directory.
"""

from pathlib import Path

from activeptree.simharness import asymmetric_setup, compare_strategies
from activeptree.svg import line_chart

RESTARTS = 20

results = compare_strategies(
    asymmetric_setup(0.9),
    ["expected", "entropy", "random"],
    RESTARTS,
    n_obs=300,
    max_interventions=40,
)

for name, res in results.items():
    print("%-9s mean steps to 95%% certainty: %5.2f +- %.2f" % (name, res.mean_steps, res.stderr_steps))

# -- the first few choices of one expected-gain episode ----------------------
ep = results["expected"].episodes[0]
print("first interventions:", ", ".join(str(j) for j in ep.interventions[:8]))
print("posterior of truth :", " ".join("%.2f" % p for p in ep.posterior_true[:9]))

svg = line_chart({k: (r.mean_curve, r.stderr_curve) for k, r in results.items()}, title="asymmetric, K=4")
Path("asymmetric_curves.svg").write_text(svg)
print("wrote asymmetric_curves.svg")
