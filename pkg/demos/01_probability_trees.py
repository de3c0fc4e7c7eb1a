"""
Probability trees: building, querying, intervening, sampling.

Run with ``python3 demos/01_probability_trees.py``.
"""

import numpy as np

from activeptree import (
    OBSERVE,
    Statement,
    VariableSpace,
    build_tree,
    do,
    event_probability,
    intervene,
    realization_probability,
    sample,
)

# -- a two-variable chain X -> Y -------------------------------------------
space = VariableSpace(("X", "Y"), (2, 2))


def theta(assigned, variable):
    # ``assigned`` maps variable index -> value for the path so far
    if not assigned:
        return (0.3, 0.7)
    return (0.9, 0.1) if assigned[0] == 0 else (0.5, 0.5)


tree = build_tree(space, branch=lambda assigned: len(assigned), theta=theta)

for x in space.assignments():
    print("P(X=%d, Y=%d) = %.3f" % (*x, realization_probability(tree, x)))

print("P(Y=1)          =", round(event_probability(tree, [Statement(1, 1)]), 4))

# -- intervening on X fixes the root branch --------------------------------
forced = intervene(tree, do(0, 1))
print("root theta before / after do(X=1):", tree.root.theta, forced.root.theta)
print("P(Y=1 | do(X=1)) =", round(event_probability(forced, [Statement(1, 1)]), 4))

# -- a context-dependent tree: X decides whether Y or Z comes first ---------
space3 = VariableSpace(("X", "Y", "Z"), (2, 2, 2))


def branch(assigned):
    if not assigned:
        return 0
    order = (1, 2) if assigned[0] == 0 else (2, 1)
    return order[len(assigned) - 1]


ctx = build_tree(space3, branch)
print("context tree nodes:", sum(1 for _ in ctx.nodes()))

# -- sampling ----------------------------------------------------------------
rng = np.random.default_rng(0)
draws = [sample(tree, OBSERVE, rng) for _ in range(10_000)]
freq = np.mean([d == (0, 0) for d in draws])
print("empirical P(0,0) = %.3f  (exact %.3f)" % (freq, realization_probability(tree, (0, 0))))
