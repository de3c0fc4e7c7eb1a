"""Discrete probability trees.

A tree describes the generative process of ``m`` discrete variables as a
path from the root to a leaf. Each internal node branches on one variable
(every child assigns a different value of it) and carries the transition
probabilities to its children. Trees are immutable; :func:`intervene`
returns a transformed copy.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

THETA_TOL = 1e-12


class TreeStructureError(ValueError):
    """Raised when a tree violates the path-partition structure."""


@dataclass(frozen=True)
class VariableSpace:
    names: tuple[str, ...]
    cardinalities: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "cardinalities", tuple(int(c) for c in self.cardinalities))
        if len(self.names) < 1:
            raise ValueError("a variable space needs at least one variable")
        if len(self.names) != len(self.cardinalities):
            raise ValueError("names and cardinalities differ in length")
        if any(c < 1 for c in self.cardinalities):
            raise ValueError(f"cardinalities must be positive, got {self.cardinalities}")

    @classmethod
    def uniform(cls, m: int, cardinality: int) -> "VariableSpace":
        return cls(tuple(f"X{i + 1}" for i in range(m)), (cardinality,) * m)

    @classmethod
    def from_cardinalities(cls, cardinalities: Sequence[int]) -> "VariableSpace":
        return cls(tuple(f"X{i + 1}" for i in range(len(cardinalities))), tuple(cardinalities))

    @property
    def m(self) -> int:
        return len(self.names)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cardinalities

    @property
    def size(self) -> int:
        return int(np.prod(self.cardinalities))

    def assignments(self) -> Iterator[tuple[int, ...]]:
        """All complete assignments in C (row-major) order."""
        return itertools.product(*(range(c) for c in self.cardinalities))

    def check_assignment(self, x: Sequence[int]) -> tuple[int, ...]:
        x = tuple(int(v) for v in x)
        if len(x) != self.m:
            raise ValueError(f"assignment {x} has {len(x)} values, expected {self.m}")
        for v, c in zip(x, self.cardinalities):
            if not 0 <= v < c:
                raise ValueError(f"assignment {x} out of range for cardinalities {self.cardinalities}")
        return x


@dataclass(frozen=True, order=True)
class Statement:
    """``X_variable = value``."""

    variable: int
    value: int


@dataclass(frozen=True, order=True)
class Intervention:
    """A single-variable intervention ``do(X_variable = value)``; empty when ``variable`` is None."""

    variable: int | None = None
    value: int | None = None

    @property
    def is_empty(self) -> bool:
        return self.variable is None

    @property
    def target(self) -> Statement | None:
        return None if self.variable is None else Statement(self.variable, self.value)

    def check(self, space: VariableSpace) -> None:
        if self.variable is None:
            return
        if not 0 <= self.variable < space.m:
            raise ValueError(f"intervention variable {self.variable} out of range")
        if not 0 <= self.value < space.cardinalities[self.variable]:
            raise ValueError(f"intervention value {self.value} out of range for {space.names[self.variable]}")

    def consistent(self, x: Sequence[int]) -> bool:
        return self.variable is None or x[self.variable] == self.value

    def __str__(self):
        if self.variable is None:
            return "observe"
        return f"do(X{self.variable + 1}={self.value})"


OBSERVE = Intervention()


def do(variable: int, value: int) -> Intervention:
    return Intervention(int(variable), int(value))


@dataclass(frozen=True, eq=False)
class PNode:
    id: int
    statement: Statement | None
    children: tuple["PNode", ...] = ()
    theta: tuple[float, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def child_variable(self) -> int | None:
        return self.children[0].statement.variable if self.children else None

    def child_for(self, value: int) -> int:
        for i, c in enumerate(self.children):
            if c.statement.value == value:
                return i
        raise TreeStructureError(f"node {self.id} has no child with value {value}")

    def __repr__(self):
        return f"PNode(id={self.id}, statement={self.statement}, n_children={len(self.children)})"


@dataclass(frozen=True, eq=False)
class PTree:
    root: PNode
    space: VariableSpace
    _nodes: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = {}
        _validate(self.root, self.space, frozenset(), nodes)
        object.__setattr__(self, "_nodes", nodes)

    def nodes(self) -> Iterator[PNode]:
        """Nodes in depth-first preorder."""
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def internal_nodes(self) -> Iterator[PNode]:
        return (n for n in self.nodes() if n.children)

    def node(self, node_id: int) -> PNode:
        return self._nodes[node_id]

    def __contains__(self, node: PNode) -> bool:
        return self._nodes.get(node.id) is node

    def joint(self) -> np.ndarray:
        """Probability of every complete assignment, as an array shaped like the space."""
        out = np.zeros(self.space.shape)
        x = [0] * self.space.m

        def walk(n, p):
            if n.is_leaf:
                out[tuple(x)] += p
                return
            v = n.child_variable
            for c, t in zip(n.children, n.theta):
                x[v] = c.statement.value
                walk(c, p * t)

        walk(self.root, 1.0)
        return out

    def to_dict(self) -> dict:
        def enc(n):
            d = {
                "id": n.id,
                "variable": None if n.statement is None else self.space.names[n.statement.variable],
                "value": None if n.statement is None else n.statement.value,
                "theta": [repr(float(t)) for t in n.theta],
                "children": [enc(c) for c in n.children],
            }
            return d

        return {
            "variables": list(self.space.names),
            "cardinalities": list(self.space.cardinalities),
            "root": enc(self.root),
        }

    def dumps(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "PTree":
        space = VariableSpace(tuple(d["variables"]), tuple(d["cardinalities"]))
        lookup = {name: i for i, name in enumerate(space.names)}

        def dec(nd):
            st = None if nd["variable"] is None else Statement(lookup[nd["variable"]], int(nd["value"]))
            return PNode(
                int(nd["id"]),
                st,
                tuple(dec(c) for c in nd["children"]),
                tuple(float(t) for t in nd["theta"]),
            )

        return cls(dec(d["root"]), space)

    @classmethod
    def loads(cls, s: str) -> "PTree":
        return cls.from_dict(json.loads(s))


def _validate(n: PNode, space: VariableSpace, assigned: frozenset, nodes: dict) -> None:
    if n.id in nodes:
        raise TreeStructureError(f"duplicate node id {n.id}")
    nodes[n.id] = n
    if n.is_leaf:
        if len(assigned) != space.m:
            missing = sorted(set(range(space.m)) - assigned)
            raise TreeStructureError(f"leaf {n.id} leaves variables {missing} unassigned")
        if n.theta:
            raise TreeStructureError(f"leaf {n.id} carries transition probabilities")
        return
    if len(n.theta) != len(n.children):
        raise TreeStructureError(f"node {n.id}: {len(n.children)} children but {len(n.theta)} theta entries")
    theta = np.asarray(n.theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > 1) or abs(theta.sum() - 1.0) > THETA_TOL:
        raise TreeStructureError(f"node {n.id}: theta {n.theta} is not a distribution")
    v = n.children[0].statement.variable
    if not 0 <= v < space.m:
        raise TreeStructureError(f"node {n.id}: variable index {v} out of range")
    if v in assigned:
        raise TreeStructureError(f"variable {space.names[v]} assigned twice on a path through node {n.id}")
    values = []
    for c in n.children:
        if c.statement is None or c.statement.variable != v:
            raise TreeStructureError(f"children of node {n.id} do not all assign {space.names[v]}")
        values.append(c.statement.value)
    if sorted(values) != list(range(space.cardinalities[v])):
        raise TreeStructureError(
            f"children of node {n.id} must cover each value of {space.names[v]} exactly once, got {values}"
        )
    for c in n.children:
        _validate(c, space, assigned | {v}, nodes)


class _IdCounter:
    def __init__(self, start=0):
        self.next = start

    def __call__(self):
        i = self.next
        self.next += 1
        return i


def build_tree(space: VariableSpace, branch, theta=None, root_statement=None, start_id=0) -> PTree:
    """Build a full tree in depth-first preorder ids.

    ``branch(assigned)`` receives the dict of values assigned so far on the
    path and returns the variable the next level branches on. ``theta(assigned,
    variable)`` returns the transition probabilities (uniform by default).
    """
    new_id = _IdCounter(start_id)

    def make(statement, assigned):
        nid = new_id()
        if len(assigned) == space.m:
            return PNode(nid, statement)
        v = branch(assigned)
        card = space.cardinalities[v]
        th = theta(assigned, v) if theta is not None else [1.0 / card] * card
        children = tuple(make(Statement(v, val), {**assigned, v: val}) for val in range(card))
        return PNode(nid, statement, children, tuple(float(t) for t in th))

    return PTree(make(root_statement, {}), space)


def realization_path(tree: PTree, x: Sequence[int]) -> list[tuple[PNode, int | None]]:
    """Root-to-leaf path selected by the complete assignment ``x``.

    Returns ``(node, chosen_child_index)`` pairs; the leaf is paired with None.
    """
    x = tree.space.check_assignment(x)
    path = []
    n = tree.root
    while n.children:
        matches = [i for i, c in enumerate(n.children) if c.statement.value == x[c.statement.variable]]
        if len(matches) != 1:
            raise TreeStructureError(f"assignment {x} selects {len(matches)} children at node {n.id}")
        path.append((n, matches[0]))
        n = n.children[matches[0]]
    path.append((n, None))
    return path


def realization_probability(tree: PTree, x: Sequence[int]) -> float:
    p = 1.0
    for n, i in realization_path(tree, x):
        if i is not None:
            p *= n.theta[i]
    return p


def event_probability(tree: PTree, event: Iterable[Statement]) -> float:
    """Total probability of all realizations that agree with every statement in ``event``."""
    index: list = [slice(None)] * tree.space.m
    for st in event:
        if not 0 <= st.value < tree.space.cardinalities[st.variable]:
            raise ValueError(f"statement {st} out of range")
        cur = index[st.variable]
        if isinstance(cur, int) and cur != st.value:
            return 0.0
        index[st.variable] = st.value
    return float(np.sum(tree.joint()[tuple(index)]))


def intervene(tree: PTree, j: Intervention) -> PTree:
    """Copy of ``tree`` where every choice of ``X_j.variable`` is forced to ``j.value``."""
    if j.is_empty:
        raise ValueError("intervene needs a nonempty intervention")
    j.check(tree.space)
    hit = False

    def rebuild(n):
        nonlocal hit
        if n.is_leaf:
            return n
        children = tuple(rebuild(c) for c in n.children)
        theta = n.theta
        if n.child_variable == j.variable:
            hit = True
            theta = tuple(1.0 if c.statement.value == j.value else 0.0 for c in n.children)
        return PNode(n.id, n.statement, children, theta)

    root = rebuild(tree.root)
    if not hit:
        raise TreeStructureError(f"variable {tree.space.names[j.variable]} is never assigned in the tree")
    return PTree(root, tree.space)


def sample(tree: PTree, j: Intervention, rng: np.random.Generator) -> tuple[int, ...]:
    """Draw one complete assignment from the (possibly intervened) tree."""
    if not j.is_empty:
        tree = intervene(tree, j)
    x = [0] * tree.space.m
    n = tree.root
    while n.children:
        i = int(np.searchsorted(np.cumsum(n.theta), rng.random(), side="right"))
        i = min(i, len(n.children) - 1)
        while n.theta[i] == 0.0:  # guard against landing on a zero-width slot at the boundary
            i -= 1
        n = n.children[i]
        x[n.statement.variable] = n.statement.value
    return tuple(x)


def leaf_count(tree: PTree, node: PNode) -> int:
    if node not in tree:
        raise ValueError(f"node {node.id} does not belong to this tree")
    return _leaves(node)


def _leaves(n: PNode) -> int:
    if n.is_leaf:
        return 1
    return sum(_leaves(c) for c in n.children)


def tree_depth_paths(tree: PTree) -> list[list[tuple[PNode, int | None]]]:
    """Every root-to-leaf path, in leaf preorder."""
    out = []

    def walk(n, acc):
        if n.is_leaf:
            out.append(acc + [(n, None)])
            return
        for i, c in enumerate(n.children):
            walk(c, acc + [(n, i)])

    walk(tree.root, [])
    return out


class TreeIndex:
    """Flat array view of a full tree for vectorized computations.

    Internal nodes get a local index in preorder. For every complete
    assignment (flattened in C order over the space) the path is stored as
    ``path_node[a, d]`` (local node index), ``path_child[a, d]`` (child index)
    and ``path_var[a, d]`` (variable chosen at depth ``d``).
    """

    def __init__(self, tree: PTree):
        space = tree.space
        internal = list(tree.internal_nodes())
        self.space = space
        self.node_ids = np.array([n.id for n in internal], dtype=np.int64)
        self.local = {n.id: i for i, n in enumerate(internal)}
        self.n_children = np.array([len(n.children) for n in internal], dtype=np.int64)
        self.child_var = np.array([n.child_variable for n in internal], dtype=np.int64)
        self.max_children = int(self.n_children.max())
        self.valid = np.arange(self.max_children)[None, :] < self.n_children[:, None]
        self.leaf_counts = np.array([_leaves(n) for n in internal], dtype=np.int64)
        theta = np.zeros((len(internal), self.max_children))
        for i, n in enumerate(internal):
            theta[i, : len(n.theta)] = n.theta
        self.theta = theta

        a_total = space.size
        m = space.m
        self.path_node = np.full((a_total, m), -1, dtype=np.int64)
        self.path_child = np.full((a_total, m), -1, dtype=np.int64)
        self.path_var = np.full((a_total, m), -1, dtype=np.int64)
        seen = np.zeros(a_total, dtype=bool)
        for path in tree_depth_paths(tree):
            x = [0] * m
            for n, i in path[:-1]:
                st = n.children[i].statement
                x[st.variable] = st.value
            a = int(np.ravel_multi_index(tuple(x), space.shape))
            if seen[a]:
                raise TreeStructureError(f"assignment {tuple(x)} reached by two leaves")
            seen[a] = True
            for d, (n, i) in enumerate(path[:-1]):
                self.path_node[a, d] = self.local[n.id]
                self.path_child[a, d] = i
                self.path_var[a, d] = n.child_variable
        if not seen.all():
            raise TreeStructureError("tree does not cover every assignment")

    def flat(self, x: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(x), self.space.shape))

    def path_log_prob(self, log_trans: np.ndarray, j: Intervention = OBSERVE) -> np.ndarray:
        """Log probability of every assignment given per-node log transitions.

        Choices of the intervened variable are forced (contribute log 1) and
        assignments disagreeing with the intervention get -inf.
        """
        terms = log_trans[self.path_node, self.path_child]
        if j.is_empty:
            return terms.sum(axis=1)
        terms = np.where(self.path_var == j.variable, 0.0, terms)
        out = terms.sum(axis=1)
        grid = np.unravel_index(np.arange(self.space.size), self.space.shape)[j.variable]
        return np.where(grid == j.value, out, -np.inf)
