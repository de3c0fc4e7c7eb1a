"""Intervention-selection policies."""

from __future__ import annotations

import enum
import itertools
from typing import Sequence

import numpy as np
from scipy.special import softmax

from . import gain
from .inference import BeliefState
from .ptree import Intervention

TIE_RTOL = 1e-12


class StrategyKind(str, enum.Enum):
    EXPECTED = "expected"
    ACTUAL = "actual"
    RANDOM = "random"
    ENTROPY = "entropy"


class UnsupportedStrategyError(ValueError):
    pass


def _orientation_matrix(state: BeliefState) -> tuple[list[tuple[int, int]], np.ndarray]:
    """For each hypothesis and variable pair (i < j): 1 if i precedes j in the hypothesis's order."""
    hset = state.hset
    if not hset.is_chain_set:
        raise UnsupportedStrategyError(
            "edge beliefs need every hypothesis to be a causal Bayesian network; "
            "context-dependent hypotheses have no single edge orientation"
        )
    pairs = list(itertools.combinations(range(hset.space.m), 2))
    orient = np.zeros((hset.S, len(pairs)))
    for k, spec in enumerate(hset.specs):
        pos = {v: d for d, v in enumerate(spec.order)}
        for p, (i, j) in enumerate(pairs):
            orient[k, p] = float(pos[i] < pos[j])
    return pairs, orient


def edge_beliefs(state: BeliefState) -> dict[tuple[int, int], np.ndarray]:
    """Probabilities of (i -> j, j -> i, no edge) for every pair i < j."""
    pairs, orient = _orientation_matrix(state)
    p = state.posterior().probabilities @ orient
    # fully connected hypotheses never leave a pair unlinked
    return {pair: np.array([p[n], 1.0 - p[n], 0.0]) for n, pair in enumerate(pairs)}


def _cost(probs: np.ndarray, orient: np.ndarray) -> np.ndarray:
    """Summed edge entropy for posterior vectors along axis 0."""
    p = np.clip(np.tensordot(orient.T, probs, axes=1), 0.0, 1.0)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log(p), 0.0) - np.where(q > 0, q * np.log(q), 0.0)
    return h.sum(axis=0)


def entropy_cost(state: BeliefState) -> float:
    _, orient = _orientation_matrix(state)
    return float(_cost(state.posterior().probabilities, orient))


def expected_entropy_after(state: BeliefState, j: Intervention, max_outcomes: int = gain.MAX_OUTCOMES) -> float:
    """Edge-entropy cost expected after observing the outcome of ``j``."""
    _, orient = _orientation_matrix(state)
    outcomes = gain._outcomes(state.hset.space, j, max_outcomes)
    post = state.posterior()
    logq = np.stack([state.log_predictive(k, j)[outcomes] for k in range(state.hset.S)])
    new_post = softmax(post.log_weights[:, None] + logq, axis=0)
    cost = _cost(new_post, orient)
    return float(np.sum(post.probabilities[:, None] * np.exp(logq) * cost[None, :]))


def _first_best(scores: np.ndarray) -> int:
    best = scores.max()
    return int(np.flatnonzero(scores >= best - TIE_RTOL * max(1.0, abs(best)))[0])


def scores(
    strategy: StrategyKind | str,
    state: BeliefState,
    candidates: Sequence[Intervention],
    truth=None,
    **gain_kwargs,
) -> np.ndarray:
    """Score of every candidate; higher is better for all strategies except entropy."""
    strategy = StrategyKind(strategy)
    if strategy is StrategyKind.EXPECTED:
        return np.array([gain.expected_gain(state, j, **gain_kwargs).score for j in candidates])
    if strategy is StrategyKind.ACTUAL:
        if truth is None:
            raise UnsupportedStrategyError("the actual-gain strategy needs the ground truth")
        return np.array([gain.actual_gain(state, j, truth, **gain_kwargs).score for j in candidates])
    if strategy is StrategyKind.ENTROPY:
        return np.array([expected_entropy_after(state, j) for j in candidates])
    raise ValueError(f"strategy {strategy.value} has no scores")


def select(
    strategy: StrategyKind | str,
    state: BeliefState,
    candidates: Sequence[Intervention],
    rng: np.random.Generator,
    truth=None,
    **gain_kwargs,
) -> Intervention:
    """Pick the next intervention.

    Ties go to the first candidate, so pass candidates in (variable, value)
    order for the lexicographic rule.
    """
    if not candidates:
        raise ValueError("no candidate interventions")
    strategy = StrategyKind(strategy)
    if strategy is StrategyKind.RANDOM:
        return candidates[int(rng.integers(len(candidates)))]
    if gain_kwargs.get("n_samples"):
        gain_kwargs.setdefault("rng", rng)
    s = scores(strategy, state, candidates, truth, **gain_kwargs)
    if strategy is StrategyKind.ENTROPY:
        s = -s
    return candidates[_first_best(s)]
