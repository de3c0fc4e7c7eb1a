"""
Information gain with two variables.

Which way does the arrow point between X1 and X2? With observational data
alone both orders fit equally well; an intervention breaks the tie. This
script scores every intervention on the asymmetric 4 x 4 problem and checks
the symmetric closed form for the actual gain.
"""

import math

import numpy as np

from activeptree import BeliefState, actual_gain, candidate_interventions, do, expected_gain
from activeptree.simharness import asymmetric_setup, make_joint_symmetric, parameterize_truth, two_variable_hset

# -- hot start with 300 "ideal" observations proportional to the joint ------
setup = asymmetric_setup(rho=0.9)
truth = setup.truth
print("true joint (rows X1, columns X2):")
print(np.round(truth.joint, 4))

state = BeliefState(setup.hset, alpha=1.0)
state.add_observational_counts(300 * truth.joint)
print("posterior after observations:", state.posterior().probabilities)

# -- score every single-variable intervention --------------------------------
print("\n%-10s %10s %10s" % ("do", "expected", "actual"))
for j in candidate_interventions(state.hset.space):
    eg = expected_gain(state, j).score
    ag = actual_gain(state, j, truth).score
    print("%-10s %10.4f %10.4f" % (j, eg, ag))

# -- symmetric K = 2 problem: compare with the closed form ------------------
rho, N, alpha = 0.9, 300, 1.0
hset = two_variable_hset(2)
joint = make_joint_symmetric(2, rho)
s = BeliefState(hset, alpha)
s.add_observational_counts(N * joint)
closed = 0.5 * (rho - 0.5) * math.log((N * rho + 2 * alpha) / (N * (1 - rho) + 2 * alpha))
print("\nsymmetric K=2 actual gain: %.6f   closed form: %.6f" % (
    actual_gain(s, do(0, 0), parameterize_truth(hset, joint, 0)).score, closed))
