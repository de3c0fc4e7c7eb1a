import numpy as np
import pytest

from activeptree.ptree import PTree, VariableSpace, build_tree


def binary_chain(theta_root=(0.5, 0.5), theta_children=((0.5, 0.5), (0.5, 0.5))) -> PTree:
    """X then Y, both binary (the two-variable tree of the examples)."""
    space = VariableSpace(("X", "Y"), (2, 2))

    def theta(assigned, v):
        if not assigned:
            return theta_root
        return theta_children[assigned[0]]

    return build_tree(space, lambda a: len(a), theta)


def context_tree(rng=None) -> PTree:
    """X first; Y before Z when X = 0, Z before Y when X = 1. Random transitions if ``rng`` given."""
    space = VariableSpace(("X", "Y", "Z"), (2, 2, 2))

    def branch(a):
        if not a:
            return 0
        order = (1, 2) if a[0] == 0 else (2, 1)
        return order[len(a) - 1]

    theta = None
    if rng is not None:
        theta = lambda a, v: rng.dirichlet(np.ones(space.cardinalities[v]))  # noqa: E731
    return build_tree(space, branch, theta)


def random_chain(cards, order, rng) -> PTree:
    space = VariableSpace.from_cardinalities(cards)
    return build_tree(
        space,
        lambda a: order[len(a)],
        lambda a, v: rng.dirichlet(np.ones(space.cardinalities[v])),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed at the end of the pytest run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split('criterion ')[1].split(':')[0])):
            terminalreporter.write_line(line)
