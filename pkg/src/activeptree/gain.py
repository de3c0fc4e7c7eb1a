"""Information gain of interventions, in nats.

The gain of an observed outcome for hypothesis ``k`` is the change in the
log posterior odds of ``k`` against all other hypotheses. The expected gain
averages it over the agent's own posterior and predictive distributions;
the actual gain averages it over the true model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .inference import BeliefState, Posterior, true_log_likelihoods, true_log_outcome
from .ptree import Intervention, VariableSpace

EPS = 1e-12
MAX_OUTCOMES = 10**6
_EVIDENCE_CAP = float(np.log((1 - EPS) / EPS))


class CapacityError(RuntimeError):
    """Raised when an intervention has more outcomes than may be enumerated."""


@dataclass(frozen=True)
class GainScore:
    intervention: Intervention
    score: float


def candidate_interventions(space: VariableSpace) -> list[Intervention]:
    """Every single-variable intervention, ordered by (variable, value)."""
    return [Intervention(v, x) for v in range(space.m) for x in range(space.cardinalities[v])]


def _evidence(log_weights: np.ndarray) -> np.ndarray:
    """Log odds of each hypothesis (axis 0) against the rest, clamped to p in [EPS, 1-EPS]."""
    lw = np.asarray(log_weights, dtype=float)
    S = lw.shape[0]
    others = np.stack([logsumexp(np.delete(lw, k, axis=0), axis=0) for k in range(S)])
    with np.errstate(invalid="ignore"):
        ev = lw - others
    ev = np.where(np.isnan(ev), 0.0, ev)
    return np.clip(ev, -_EVIDENCE_CAP, _EVIDENCE_CAP)


def evidence_in_favor(post: Posterior, k: int) -> float:
    """``log(p_k / (1 - p_k))`` with ``p_k`` clamped to ``[1e-12, 1 - 1e-12]``."""
    if len(post.log_weights) < 2:
        raise ValueError("evidence needs at least two hypotheses")
    return float(_evidence(post.log_weights)[k])


def information_gain(state: BeliefState, x: Sequence[int], j: Intervention, k: int) -> float:
    """Increase in evidence for ``k`` from observing ``x`` under ``j``; ``state`` is not modified."""
    if j.is_empty:
        raise ValueError("information gain is defined for interventions")
    if not j.consistent(x):
        raise ValueError(f"outcome {tuple(x)} contradicts {j}")
    before = evidence_in_favor(state.posterior(), k)
    after = evidence_in_favor(state.with_record(x, j).posterior(), k)
    return after - before


def _outcomes(space: VariableSpace, j: Intervention, max_outcomes: int) -> np.ndarray:
    n = space.size // space.cardinalities[j.variable]
    if n > max_outcomes:
        raise CapacityError(f"{j} has {n} outcomes, more than the enumeration cap {max_outcomes}")
    grid = np.unravel_index(np.arange(space.size), space.shape)[j.variable]
    return np.flatnonzero(grid == j.value)


def gain_matrix(state: BeliefState, j: Intervention, outcomes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gain ``I[k, o]`` for every hypothesis and outcome, plus the agent's log predictives ``[k, o]``.

    Appending one record multiplies the evidence of hypothesis ``k'`` by its
    predictive probability of that record, so the updated posterior for
    every outcome follows from the predictives without recounting.
    """
    post = state.posterior()
    logq = np.stack([state.log_predictive(k, j)[outcomes] for k in range(state.hset.S)])
    ev0 = _evidence(post.log_weights)
    ev1 = _evidence(post.log_weights[:, None] + logq)
    return ev1 - ev0[:, None], logq


def _expectation(gain, weights_k, outcome_probs, rng, n_samples):
    if n_samples is None:
        return float(np.sum(weights_k[:, None] * outcome_probs * gain))
    total = 0.0
    for k in range(gain.shape[0]):
        if weights_k[k] == 0.0:
            continue
        p = outcome_probs[k] / outcome_probs[k].sum()
        draws = rng.choice(len(p), size=n_samples, p=p)
        total += weights_k[k] * gain[k, draws].mean()
    return float(total)


def expected_gain(
    state: BeliefState,
    j: Intervention,
    max_outcomes: int = MAX_OUTCOMES,
    n_samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> GainScore:
    """Gain averaged over the agent's posterior and predictive distributions.

    By default every outcome consistent with ``j`` is enumerated. With
    ``n_samples`` the inner sum is replaced by a Monte Carlo average of that
    many outcomes per hypothesis (requires ``rng``); the cap is then not
    enforced.
    """
    if j.is_empty:
        raise ValueError("expected gain is defined for interventions")
    outcomes = _outcomes(state.hset.space, j, np.inf if n_samples else max_outcomes)
    gain, logq = gain_matrix(state, j, outcomes)
    weights = state.posterior().probabilities
    return GainScore(j, _expectation(gain, weights, np.exp(logq), rng, n_samples))


def true_posterior(state: BeliefState, truth) -> Posterior:
    """``P(G=k | D, theta)`` with the likelihood evaluated at the true transitions."""
    ll = true_log_likelihoods(truth.hset, state.table)
    with np.errstate(divide="ignore"):
        return Posterior.from_log_weights(np.log(np.asarray(state.hset.prior_g)) + ll)


def actual_gain(
    state: BeliefState,
    j: Intervention,
    truth,
    max_outcomes: int = MAX_OUTCOMES,
    n_samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> GainScore:
    """Gain averaged over the true posterior and true interventional outcome distribution.

    ``truth.hset`` must be a hypothesis set of the same structure as the
    agent's, carrying the true transition probabilities in every subtree.
    The gain itself is still the agent's.
    """
    if j.is_empty:
        raise ValueError("actual gain is defined for interventions")
    outcomes = _outcomes(state.hset.space, j, np.inf if n_samples else max_outcomes)
    gain, _ = gain_matrix(state, j, outcomes)
    weights = true_posterior(state, truth).probabilities
    probs = np.exp(np.stack([true_log_outcome(truth.hset, k, j)[outcomes] for k in range(state.hset.S)]))
    return GainScore(j, _expectation(gain, weights, probs, rng, n_samples))


def jeffrey_divergence(p, q) -> float:
    """Symmetrised KL divergence ``sum (p - q) log(p / q)``."""
    p = np.clip(np.asarray(p, dtype=float), EPS, 1.0)
    q = np.clip(np.asarray(q, dtype=float), EPS, 1.0)
    if p.shape != q.shape:
        raise ValueError("distributions must have the same support")
    return float(np.sum((p - q) * np.log(p / q)))


def two_var_predictives(counts: np.ndarray, x1: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Smoothed ``Q(X2 | x1, D)`` and ``Q(X2 | D)`` from a two-variable count table."""
    counts = np.asarray(counts, dtype=float)
    k1, k2 = counts.shape
    cond = (counts[x1] + alpha) / (counts[x1].sum() + k2 * alpha)
    marg = (counts.sum(axis=0) + k1 * alpha) / (counts.sum() + k1 * k2 * alpha)
    return cond, marg


def two_var_actual_gain_closed_form(counts, truth_joint, x1: int, alpha: float) -> float:
    """Actual gain of ``do(X1 = x1)`` for two variables and the two chain hypotheses.

    Valid only when all data is observational; ``counts[x1, x2]`` and
    ``truth_joint[x1, x2]`` are two-dimensional tables.
    """
    counts = np.asarray(counts, dtype=float)
    joint = np.asarray(truth_joint, dtype=float)
    if counts.ndim != 2 or joint.shape != counts.shape:
        raise ValueError("closed form needs matching two-variable count and joint tables")
    if not 0 <= x1 < counts.shape[0]:
        raise ValueError(f"x1={x1} out of range")
    p_cond = joint[x1] / joint[x1].sum()
    p_marg = joint.sum(axis=0)
    q_cond, q_marg = two_var_predictives(counts, x1, alpha)
    return float(0.5 * np.sum((p_cond - p_marg) * np.log(q_cond / q_marg)))
