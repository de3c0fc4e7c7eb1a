"""
Context-dependent causal structure.

Three hypotheses over three ternary variables: a plain chain X1 > X2 > X3,
and two trees in which one particular value of X1 swaps the order of X2 and
X3. No single causal Bayesian network can express the latter two, so the
edge-entropy baseline refuses them; the expected-gain criterion does not care.
"""

import numpy as np

from activeptree import BeliefState, UnsupportedStrategyError, candidate_interventions, expected_gain, select
from activeptree.simharness import compare_strategies, context_setup

setup = context_setup(cardinality=3, rho=0.9, k_star=1)
print("hypotheses:", setup.hset.labels)
print("truth     :", setup.hset.labels[setup.truth.k_star])

# -- observations cannot tell them apart -------------------------------------
state = BeliefState(setup.hset)
state.add_observational_counts(400 * setup.truth.joint)
print("posterior after 400 observations:", np.round(state.posterior().probabilities, 6))

# -- but interventions on X2 or X3 can --------------------------------------
scores = {str(j): expected_gain(state, j).score for j in candidate_interventions(state.hset.space)}
for name, v in sorted(scores.items(), key=lambda kv: -kv[1])[:4]:
    print("  %-8s expected gain %.4f" % (name, v))

try:
    select("entropy", state, candidate_interventions(state.hset.space), np.random.default_rng(0))
except UnsupportedStrategyError as e:
    print("entropy baseline:", e)

# -- a short active-learning comparison ---------------------------------------
res = compare_strategies(setup, ["expected", "random"], 15, n_obs=400)
for name, r in res.items():
    print("%-9s mean steps %.2f +- %.2f" % (name, r.mean_steps, r.stderr_steps))
