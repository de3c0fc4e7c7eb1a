"""Exact Bayesian inference over the hypothesis variable.

Counts ``N[j|n]`` are kept per hypothesis, since one record walks a
different path in each subtree. Choices forced by an intervention are not
counted. Evidence is the Dirichlet-multinomial marginal likelihood,
evaluated in log space.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from .hypotheses import HypothesisSet, PriorTable, assign_priors
from .ptree import OBSERVE, Intervention, VariableSpace

Record = tuple[tuple[int, ...], Intervention]


class CountTable:
    """Per-hypothesis child counts; ``counts[k][i, c]`` for local internal node ``i``."""

    def __init__(self, hset: HypothesisSet):
        self.counts = [np.zeros((len(ix.node_ids), ix.max_children)) for ix in hset.index]
        self.total_records = 0
        self._local = [ix.local for ix in hset.index]

    def copy(self) -> "CountTable":
        new = object.__new__(CountTable)
        new.counts = [c.copy() for c in self.counts]
        new.total_records = self.total_records
        new._local = self._local
        return new

    def get(self, k: int, node_id: int, j: int) -> float:
        return float(self.counts[k][self._local[k][node_id], j])


@dataclass
class Dataset:
    records: list

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def to_csv(self, space: VariableSpace) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "intervened_var", "intervened_val"] + [f"x_{i + 1}" for i in range(space.m)])
        for step, (x, j) in enumerate(self.records):
            jv = "" if j.is_empty else j.variable + 1
            jx = "" if j.is_empty else j.value
            w.writerow([step, jv, jx, *x])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, space: VariableSpace) -> "Dataset":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("dataset CSV is empty")
        header = rows[0]
        expected = ["step", "intervened_var", "intervened_val"] + [f"x_{i + 1}" for i in range(space.m)]
        if header != expected:
            raise ValueError(f"dataset header {header} != {expected}")
        records = []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != len(expected):
                raise ValueError(f"line {lineno}: expected {len(expected)} columns, got {len(row)}")
            try:
                if row[1] == "" and row[2] == "":
                    j = OBSERVE
                else:
                    j = Intervention(int(row[1]) - 1, int(row[2]))
                x = space.check_assignment(tuple(int(v) for v in row[3:]))
                j.check(space)
            except ValueError as e:
                raise ValueError(f"line {lineno}: {e}") from None
            if not j.consistent(x):
                raise ValueError(f"line {lineno}: assignment {x} contradicts {j}")
            records.append((x, j))
        return cls(records)


@dataclass
class Posterior:
    log_weights: np.ndarray
    probabilities: np.ndarray

    @classmethod
    def from_log_weights(cls, log_weights) -> "Posterior":
        lw = np.asarray(log_weights, dtype=float)
        if np.all(np.isneginf(lw)):
            lw = np.zeros_like(lw)
        p = np.exp(lw - logsumexp(lw))
        return cls(lw, p / p.sum())


def update_counts(table: CountTable, hset: HypothesisSet, record: Record, weight: float = 1.0) -> CountTable:
    """Add one record in place (and return the table).

    At every node on the record's path the chosen child is counted, except at
    nodes that branch on the intervened variable. ``weight`` lets analytic
    checks feed fractional counts such as ``N * p``.
    """
    x, j = record
    for k, ix in enumerate(hset.index):
        a = ix.flat(x)
        keep = ix.path_var[a] != (-2 if j.is_empty else j.variable)
        table.counts[k][ix.path_node[a, keep], ix.path_child[a, keep]] += weight
    table.total_records += 1
    return table


def add_observational_counts(table: CountTable, hset: HypothesisSet, counts: np.ndarray) -> CountTable:
    """Add a whole grid of (possibly fractional) observational counts at once."""
    flat = np.asarray(counts, dtype=float).ravel()
    for k, ix in enumerate(hset.index):
        for d in range(ix.path_node.shape[1]):
            np.add.at(table.counts[k], (ix.path_node[:, d], ix.path_child[:, d]), flat)
    table.total_records += int(round(flat.sum()))
    return table


def log_marginal_likelihood(
    hset: HypothesisSet, table: CountTable, priors: PriorTable, k: int, include_normalizer: bool = True
) -> float:
    """Log Dirichlet-multinomial evidence of the counts under hypothesis ``k``.

    With ``include_normalizer`` the prior normalizer ``Gamma(|ch| a) / Gamma(a)^|ch|``
    is included at every node, so that an empty table has evidence 1.
    """
    ix = hset.index[k]
    n = table.counts[k]
    a = priors.arrays[k]
    ch = ix.n_children
    per_cell = np.where(ix.valid, gammaln(n + a[:, None]), 0.0)
    val = per_cell.sum() - gammaln(n.sum(axis=1) + ch * a).sum()
    if include_normalizer:
        val += (gammaln(ch * a) - ch * gammaln(a)).sum()
    return float(val)


def posterior(hset: HypothesisSet, table: CountTable, priors: PriorTable, include_normalizer: bool = True) -> Posterior:
    lml = np.array(
        [log_marginal_likelihood(hset, table, priors, k, include_normalizer) for k in range(hset.S)]
    )
    return Posterior.from_log_weights(np.log(np.asarray(hset.prior_g)) + lml)


def log_transitions(hset: HypothesisSet, table: CountTable, priors: PriorTable, k: int) -> np.ndarray:
    """Log posterior-mean transition ``(N[j|n] + a) / (N[n] + |ch| a)`` at every internal node."""
    ix = hset.index[k]
    n = table.counts[k]
    a = priors.arrays[k][:, None]
    denom = n.sum(axis=1, keepdims=True) + ix.n_children[:, None] * a
    return np.where(ix.valid, np.log(n + a) - np.log(denom), -np.inf)


def log_predictive(
    hset: HypothesisSet, table: CountTable, priors: PriorTable, k: int, j: Intervention = OBSERVE
) -> np.ndarray:
    """Log predictive probability of every assignment (flat C order) under hypothesis ``k`` and ``j``."""
    return hset.index[k].path_log_prob(log_transitions(hset, table, priors, k), j)


def predictive(
    hset: HypothesisSet, table: CountTable, priors: PriorTable, k: int, j: Intervention = OBSERVE
) -> np.ndarray:
    """Predictive distribution over assignments, shaped like the variable space."""
    return np.exp(log_predictive(hset, table, priors, k, j)).reshape(hset.space.shape)


def true_log_likelihoods(truth_hset: HypothesisSet, table: CountTable) -> np.ndarray:
    """``log P(D | G=k, theta)`` for every k, using the true transitions of ``truth_hset``.

    The counts must come from a hypothesis set with the same structure.
    """
    out = np.empty(truth_hset.S)
    for k, ix in enumerate(truth_hset.index):
        out[k] = xlogy(table.counts[k], ix.theta).sum()
    return out


def true_log_outcome(truth_hset: HypothesisSet, k: int, j: Intervention = OBSERVE) -> np.ndarray:
    """Log probability of every assignment under the intervened true subtree ``k``."""
    ix = truth_hset.index[k]
    with np.errstate(divide="ignore"):
        log_theta = np.log(ix.theta)
    return ix.path_log_prob(log_theta, j)


class BeliefState:
    """The agent's knowledge: hypothesis set, Dirichlet priors and accumulated counts."""

    def __init__(self, hset: HypothesisSet, alpha: float = 1.0, priors: PriorTable | None = None):
        self.hset = hset
        self.priors = priors if priors is not None else assign_priors(hset, alpha)
        self.table = CountTable(hset)
        self._cache = {}

    @property
    def alpha(self) -> float:
        return self.priors.alpha

    @property
    def n_records(self) -> int:
        return self.table.total_records

    def copy(self) -> "BeliefState":
        new = object.__new__(BeliefState)
        new.hset = self.hset
        new.priors = self.priors
        new.table = self.table.copy()
        new._cache = {}
        return new

    def add(self, x: Sequence[int], j: Intervention = OBSERVE, weight: float = 1.0) -> None:
        update_counts(self.table, self.hset, (tuple(x), j), weight)
        self._cache.clear()

    def extend(self, records: Iterable[Record]) -> None:
        for x, j in records:
            update_counts(self.table, self.hset, (tuple(x), j))
        self._cache.clear()

    def add_observational_counts(self, counts: np.ndarray) -> None:
        add_observational_counts(self.table, self.hset, counts)
        self._cache.clear()

    def with_record(self, x: Sequence[int], j: Intervention = OBSERVE) -> "BeliefState":
        new = self.copy()
        new.add(x, j)
        return new

    def log_marginal_likelihoods(self, include_normalizer: bool = True) -> np.ndarray:
        return np.array(
            [
                log_marginal_likelihood(self.hset, self.table, self.priors, k, include_normalizer)
                for k in range(self.hset.S)
            ]
        )

    def posterior(self) -> Posterior:
        if "post" not in self._cache:
            self._cache["post"] = posterior(self.hset, self.table, self.priors)
        return self._cache["post"]

    def log_transitions(self, k: int) -> np.ndarray:
        key = ("lt", k)
        if key not in self._cache:
            self._cache[key] = log_transitions(self.hset, self.table, self.priors, k)
        return self._cache[key]

    def log_predictive(self, k: int, j: Intervention = OBSERVE) -> np.ndarray:
        return self.hset.index[k].path_log_prob(self.log_transitions(k), j)

    def predictive(self, k: int, j: Intervention = OBSERVE) -> np.ndarray:
        return np.exp(self.log_predictive(k, j)).reshape(self.hset.space.shape)


def state_from_dataset(hset: HypothesisSet, dataset: Dataset, alpha: float = 1.0) -> BeliefState:
    state = BeliefState(hset, alpha)
    state.extend(dataset.records)
    return state
