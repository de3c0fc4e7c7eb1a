"""Causal hypotheses as subtrees of a single meta probability tree.

The meta tree branches first on a hypothesis variable ``G`` (appended to the
variable space as its last variable); below ``G = k`` sits the tree of
hypothesis ``k``. Builders produce fully connected chains (one tree per
variable ordering) and context-swap trees, where a pivot variable decides the
order of the other two.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .ptree import (
    PNode,
    PTree,
    Statement,
    TreeIndex,
    VariableSpace,
    build_tree,
    leaf_count,
)


@dataclass(frozen=True)
class CausalOrder:
    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(v) for v in self.order))
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError(f"{self.order} is not a permutation of 0..{len(self.order) - 1}")

    def label(self, space: VariableSpace) -> str:
        return ">".join(space.names[v] for v in self.order)


@dataclass(frozen=True)
class ContextSwapSpec:
    """Pivot decided first; below pivot values in ``swap_values`` the other two variables swap order."""

    pivot: int
    swap_values: frozenset[int]
    base_order: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "swap_values", frozenset(int(v) for v in self.swap_values))
        object.__setattr__(self, "base_order", tuple(int(v) for v in self.base_order))

    def label(self, space: VariableSpace) -> str:
        vals = ",".join(str(v) for v in sorted(self.swap_values))
        rest = ">".join(space.names[v] for v in self.base_order)
        return f"ctx({space.names[self.pivot]}:{vals}; {rest})"


def chain_tree(space: VariableSpace, order: CausalOrder | Sequence[int]) -> PTree:
    """Full tree branching on ``order[d]`` at depth ``d`` with uniform transitions."""
    if not isinstance(order, CausalOrder):
        order = CausalOrder(tuple(order))
    if len(order.order) != space.m:
        raise ValueError(f"order {order.order} does not match {space.m} variables")
    return build_tree(space, lambda assigned: order.order[len(assigned)])


def context_swap_tree(space: VariableSpace, spec: ContextSwapSpec) -> PTree:
    if space.m != 3:
        raise ValueError("context-swap trees are defined for exactly three variables")
    others = sorted(set(range(3)) - {spec.pivot})
    if not 0 <= spec.pivot < 3 or sorted(spec.base_order) != others:
        raise ValueError(f"invalid pivot/base order {spec.pivot}, {spec.base_order}")
    card = space.cardinalities[spec.pivot]
    bad = [v for v in spec.swap_values if not 0 <= v < card]
    if bad:
        raise ValueError(f"swap values {bad} out of range for {space.names[spec.pivot]}")

    def branch(assigned):
        if not assigned:
            return spec.pivot
        order = spec.base_order
        if assigned[spec.pivot] in spec.swap_values:
            order = order[::-1]
        return order[len(assigned) - 1]

    return build_tree(space, branch)


def _relabel(n: PNode, counter: list, statement=None) -> PNode:
    nid = counter[0]
    counter[0] += 1
    children = tuple(_relabel(c, counter, c.statement) for c in n.children)
    return PNode(nid, statement if statement is not None else n.statement, children, n.theta)


@dataclass(frozen=True, eq=False)
class HypothesisSet:
    """S competing hypothesis trees joined under a root that branches on ``G``."""

    meta: PTree
    labels: tuple[str, ...]
    prior_g: tuple[float, ...]
    specs: tuple = ()
    _subtrees: tuple = field(init=False, repr=False)

    def __post_init__(self):
        space = self.space
        subs = tuple(PTree(c, space) for c in self.meta.root.children)
        object.__setattr__(self, "_subtrees", subs)
        if len(self.labels) != self.S or len(self.prior_g) != self.S:
            raise ValueError("labels and prior_g must have one entry per hypothesis")
        if abs(sum(self.prior_g) - 1.0) > 1e-12:
            raise ValueError("prior_g must sum to one")

    @property
    def S(self) -> int:
        return len(self.meta.root.children)

    @property
    def space(self) -> VariableSpace:
        ms = self.meta.space
        return VariableSpace(ms.names[:-1], ms.cardinalities[:-1])

    def subtree(self, k: int) -> PTree:
        return self._subtrees[k]

    @cached_property
    def index(self) -> tuple[TreeIndex, ...]:
        return tuple(TreeIndex(t) for t in self._subtrees)

    @property
    def is_chain_set(self) -> bool:
        return all(isinstance(s, CausalOrder) for s in self.specs) and len(self.specs) == self.S

    def with_subtrees(self, trees: Sequence[PTree]) -> "HypothesisSet":
        """Same set with each subtree replaced by a tree of identical structure and node ids."""
        children = []
        for old, new in zip(self._subtrees, trees):
            if [n.id for n in old.nodes()] != [n.id for n in new.nodes()]:
                raise ValueError("replacement subtree must keep node ids")
            children.append(PNode(old.root.id, old.root.statement, new.root.children, new.root.theta))
        root = self.meta.root
        meta = PTree(PNode(root.id, None, tuple(children), root.theta), self.meta.space)
        return HypothesisSet(meta, self.labels, self.prior_g, self.specs)


def build_hypothesis_set(trees: Sequence[PTree], labels: Sequence[str] | None = None, specs=()) -> HypothesisSet:
    """Join hypothesis trees under a uniform prior over ``G``; node ids are renumbered in meta preorder."""
    trees = list(trees)
    if len(trees) < 2:
        raise ValueError("need at least two hypotheses")
    space = trees[0].space
    for t in trees[1:]:
        if t.space != space:
            raise ValueError("all hypotheses must share the same variable space")
    S = len(trees)
    g = space.m
    counter = [1]
    children = tuple(_relabel(t.root, counter, Statement(g, k)) for k, t in enumerate(trees))
    prior = tuple([1.0 / S] * S)
    meta_space = VariableSpace(space.names + ("G",), space.cardinalities + (S,))
    meta = PTree(PNode(0, None, children, prior), meta_space)
    if labels is None:
        labels = [f"H{k + 1}" for k in range(S)]
    return HypothesisSet(meta, tuple(labels), prior, tuple(specs))


def from_specs(space: VariableSpace, specs: Sequence[CausalOrder | ContextSwapSpec]) -> HypothesisSet:
    trees, labels = [], []
    for s in specs:
        if isinstance(s, CausalOrder):
            trees.append(chain_tree(space, s))
        elif isinstance(s, ContextSwapSpec):
            trees.append(context_swap_tree(space, s))
        else:
            raise TypeError(f"unknown hypothesis spec {s!r}")
        labels.append(s.label(space))
    return build_hypothesis_set(trees, labels, specs)


def all_orders(space: VariableSpace) -> HypothesisSet:
    """Every fully connected chain over the space, in lexicographic permutation order."""
    return from_specs(space, [CausalOrder(p) for p in itertools.permutations(range(space.m))])


@dataclass(frozen=True)
class PriorTable:
    """Dirichlet concentration per internal node of every hypothesis subtree."""

    alpha: float
    node_alpha: dict
    arrays: tuple  # per hypothesis, aligned with TreeIndex local order

    def __getitem__(self, node_id: int) -> float:
        return self.node_alpha[node_id]


def assign_priors(hset: HypothesisSet, alpha: float = 1.0) -> PriorTable:
    """Concentration ``leaf_count(n) / |ch(n)| * alpha`` at every internal node.

    With these concentrations observational data cannot favour one ordering
    over another: the evidence telescopes to a product over leaves.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    node_alpha = {}
    arrays = []
    for k in range(hset.S):
        tree = hset.subtree(k)
        idx = hset.index[k]
        arr = np.empty(len(idx.node_ids))
        for i, nid in enumerate(idx.node_ids):
            n = tree.node(int(nid))
            a = leaf_count(tree, n) / len(n.children) * alpha
            node_alpha[int(nid)] = a
            arr[i] = a
        arrays.append(arr)
    return PriorTable(float(alpha), node_alpha, tuple(arrays))
