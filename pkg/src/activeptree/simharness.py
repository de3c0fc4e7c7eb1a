"""Ground-truth problems, the active-learning episode loop and restart aggregation."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .gain import candidate_interventions
from .hypotheses import (
    CausalOrder,
    ContextSwapSpec,
    HypothesisSet,
    all_orders,
    from_specs,
)
from .inference import BeliefState, Dataset, true_log_outcome
from .ptree import OBSERVE, Intervention, PNode, PTree, VariableSpace
from .strategies import StrategyKind, select

log = logging.getLogger(__name__)


def check_joint(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("joint table must be nonnegative and sum to one")
    return p


def make_joint_symmetric(K: int, rho: float) -> np.ndarray:
    """Mass ``rho`` spread over the diagonal of a K x K table, the rest evenly off it."""
    if K < 2:
        raise ValueError("K must be at least 2")
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    eye = np.eye(K)
    return rho / K * eye + (1 - rho) / (K * (K - 1)) * (1 - eye)


def make_joint_asymmetric(rho: float) -> np.ndarray:
    """4 x 4 table with heavy cells on the first row of X1 and at (X1, X2) = (3, 0)."""
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    heavy = np.zeros((4, 4), dtype=bool)
    heavy[0, :] = True
    heavy[3, 0] = True
    return np.where(heavy, rho / 5, (1 - rho) / 11)


def make_joint_pattern(pattern: np.ndarray, rho: float) -> np.ndarray:
    """``rho`` spread evenly over the cells where ``pattern`` is 1, the rest over the others."""
    pattern = np.asarray(pattern).astype(bool)
    M = int(pattern.sum())
    if M == 0 or M == pattern.size:
        raise ValueError("sparsity pattern must be neither empty nor full")
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    return np.where(pattern, rho / M, (1 - rho) / (pattern.size - M))


def make_joint_three(cardinality: int, rho: float, pattern: np.ndarray) -> np.ndarray:
    pattern = np.asarray(pattern)
    if pattern.shape != (cardinality,) * 3:
        raise ValueError(f"pattern must have shape {(cardinality,) * 3}")
    return make_joint_pattern(pattern, rho)


def diagonal_pattern(cardinality: int, m: int = 3) -> np.ndarray:
    idx = np.indices((cardinality,) * m)
    return np.all(idx == idx[0], axis=0).astype(int)


def random_pattern(cardinality: int, rng: np.random.Generator, n_cells: int | None = None, m: int = 3) -> np.ndarray:
    """0/1 pattern with ``n_cells`` ones (default ``cardinality**2``) at random positions."""
    return random_pattern_shape((cardinality,) * m, rng, n_cells)


def random_pattern_shape(shape: Sequence[int], rng: np.random.Generator, n_cells: int | None = None) -> np.ndarray:
    size = int(np.prod(shape))
    if n_cells is None:
        n_cells = int(round(size ** (2 / 3)))
    if not 0 < n_cells < size:
        raise ValueError(f"pattern needs between 1 and {size - 1} cells, got {n_cells}")
    flat = np.zeros(size, dtype=int)
    flat[rng.choice(size, size=n_cells, replace=False)] = 1
    return flat.reshape(tuple(shape))


def _conditional_tree(tree: PTree, joint: np.ndarray) -> PTree:
    """Same tree with every transition set to the joint's conditional given the path so far."""
    m = tree.space.m

    def rebuild(n: PNode, assigned: dict) -> PNode:
        if n.is_leaf:
            return n
        v = n.child_variable
        idx = tuple(assigned.get(i, slice(None)) for i in range(m))
        sub = joint[idx]
        # remaining axes are the unassigned variables in index order
        free = [i for i in range(m) if i not in assigned]
        axes = tuple(a for a, i in enumerate(free) if i != v)
        mass = sub.sum(axis=axes) if axes else sub
        total = mass.sum()
        children = []
        theta = []
        for c in n.children:
            val = c.statement.value
            children.append(rebuild(c, {**assigned, v: val}))
            theta.append(mass[val] / total if total > 0 else 1.0 / len(n.children))
        theta = np.asarray(theta)
        theta = theta / theta.sum()
        return PNode(n.id, n.statement, tuple(children), tuple(float(t) for t in theta))

    return PTree(rebuild(tree.root, {}), tree.space)


@dataclass(eq=False)
class GroundTruth:
    """The data-generating subtree ``k_star``; every subtree carries the joint's conditionals."""

    k_star: int
    hset: HypothesisSet
    joint: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    def outcome_distribution(self, j: Intervention = OBSERVE) -> np.ndarray:
        """Flat probabilities of every assignment when sampling subtree ``k_star`` under ``j``."""
        if j not in self._cache:
            p = np.exp(true_log_outcome(self.hset, self.k_star, j))
            self._cache[j] = p / p.sum()
        return self._cache[j]

    def sample(self, j: Intervention, rng: np.random.Generator, size: int | None = None):
        p = self.outcome_distribution(j)
        return rng.choice(len(p), size=size, p=p)


def parameterize_truth(hset: HypothesisSet, joint: np.ndarray, k_star: int) -> GroundTruth:
    if not 0 <= k_star < hset.S:
        raise ValueError(f"k_star={k_star} out of range for {hset.S} hypotheses")
    joint = check_joint(joint)
    if joint.shape != hset.space.shape:
        raise ValueError(f"joint shape {joint.shape} does not match {hset.space.shape}")
    trees = [_conditional_tree(hset.subtree(k), joint) for k in range(hset.S)]
    return GroundTruth(k_star, hset.with_subtrees(trees), joint)


@dataclass
class Setup:
    """A hypothesis set together with its ground truth.

    ``truth`` may be a callable drawing a fresh truth from a generator, for
    problems whose joint is itself random (one draw per restart).
    """

    name: str
    hset: HypothesisSet
    truth: GroundTruth | Callable[[np.random.Generator], GroundTruth]

    def draw_truth(self, rng: np.random.Generator) -> GroundTruth:
        return self.truth(rng) if callable(self.truth) else self.truth


@dataclass
class PatternTruth:
    """Random-sparsity-pattern truth over all variable orders; picklable for worker processes."""

    hset: HypothesisSet
    rho: float
    n_cells: int | None = None
    k_star: int = 0

    def __call__(self, rng: np.random.Generator) -> GroundTruth:
        pattern = random_pattern_shape(self.hset.space.shape, rng, self.n_cells)
        return parameterize_truth(self.hset, make_joint_pattern(pattern, self.rho), self.k_star)


def two_variable_hset(K: int):
    space = VariableSpace.uniform(2, K)
    return from_specs(space, [CausalOrder((0, 1)), CausalOrder((1, 0))])


def symmetric_setup(K: int = 4, rho: float = 0.9) -> Setup:
    hset = two_variable_hset(K)
    return Setup("symmetric", hset, parameterize_truth(hset, make_joint_symmetric(K, rho), 0))


def asymmetric_setup(rho: float = 0.9) -> Setup:
    hset = two_variable_hset(4)
    return Setup("asymmetric", hset, parameterize_truth(hset, make_joint_asymmetric(rho), 0))


def three_var_setup(cardinality: int = 6, rho: float = 0.9, n_cells: int | None = None) -> Setup:
    """All six orders of three variables; truth X1 -> X2 -> X3 with a random pattern per restart."""
    hset = all_orders(VariableSpace.uniform(3, cardinality))
    if n_cells is None:
        n_cells = cardinality**2
    return Setup("three-var", hset, PatternTruth(hset, rho, n_cells, 0))


def context_hset(cardinality: int = 3) -> HypothesisSet:
    """The chain X1 > X2 > X3 and two trees where X1 = 0 (resp. X1 = 1) swaps X2 and X3."""
    space = VariableSpace.uniform(3, cardinality)
    return from_specs(
        space,
        [
            CausalOrder((0, 1, 2)),
            ContextSwapSpec(0, frozenset({0}), (1, 2)),
            ContextSwapSpec(0, frozenset({1}), (1, 2)),
        ],
    )


def context_setup(cardinality: int = 3, rho: float = 0.9, k_star: int = 0) -> Setup:
    hset = context_hset(cardinality)
    joint = make_joint_three(cardinality, rho, diagonal_pattern(cardinality))
    return Setup("context", hset, parameterize_truth(hset, joint, k_star))


@dataclass
class EpisodeConfig:
    setup: Setup
    strategy: StrategyKind | str = StrategyKind.EXPECTED
    n_obs: int = 300
    max_interventions: int = 40
    alpha: float = 1.0
    threshold: float = 0.95
    seed: int = 0
    n_samples: int | None = None

    def __post_init__(self):
        self.strategy = StrategyKind(self.strategy)
        if self.n_obs < 0:
            raise ValueError("n_obs must be nonnegative")
        if self.max_interventions < 0:
            raise ValueError("max_interventions must be nonnegative")
        if not 0.5 < self.threshold < 1:
            raise ValueError(f"threshold must lie in (0.5, 1), got {self.threshold}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


@dataclass
class EpisodeResult:
    strategy: str
    restart: int
    k_star: int
    posteriors: np.ndarray  # (max_interventions + 1, S), row 0 after the observational hot start
    interventions: list
    steps_to_certainty: int
    dataset: Dataset

    @property
    def final_posterior(self) -> np.ndarray:
        return self.posteriors[-1]

    @property
    def posterior_true(self) -> np.ndarray:
        return self.posteriors[:, self.k_star]


def steps_to_certainty(curve: Sequence[float], threshold: float = 0.95) -> int:
    """First index where ``curve`` reaches ``threshold``; ``len(curve) - 1`` if it never does.

    ``curve[0]`` is the posterior after the hot start, so a run that starts
    certain takes zero steps.
    """
    hits = np.flatnonzero(np.asarray(curve) >= threshold)
    return int(hits[0]) if len(hits) else len(curve) - 1


def run_episode(cfg: EpisodeConfig, restart: int = 0) -> EpisodeResult:
    """One hot-started active-learning run.

    Streams are derived from ``(seed, restart)`` only, so every strategy sees
    the same truth and the same observational hot start for a given restart.
    """
    truth_ss, data_ss, policy_ss = np.random.SeedSequence([cfg.seed, restart]).spawn(3)
    truth = cfg.setup.draw_truth(np.random.default_rng(truth_ss))
    data_rng = np.random.default_rng(data_ss)
    policy_rng = np.random.default_rng(policy_ss)
    hset = cfg.setup.hset
    space = hset.space

    state = BeliefState(hset, cfg.alpha)
    obs = truth.sample(OBSERVE, data_rng, size=cfg.n_obs)
    state.add_observational_counts(np.bincount(obs, minlength=space.size).reshape(space.shape))
    records = [(tuple(int(v) for v in np.unravel_index(a, space.shape)), OBSERVE) for a in obs]

    candidates = candidate_interventions(space)
    gain_kwargs = {"n_samples": cfg.n_samples} if cfg.n_samples else {}
    posteriors = [state.posterior().probabilities]
    chosen = []
    for _ in range(cfg.max_interventions):
        j = select(cfg.strategy, state, candidates, policy_rng, truth=truth, **gain_kwargs)
        a = int(truth.sample(j, data_rng))
        x = tuple(int(v) for v in np.unravel_index(a, space.shape))
        state.add(x, j)
        records.append((x, j))
        chosen.append(j)
        posteriors.append(state.posterior().probabilities)

    posteriors = np.array(posteriors)
    steps = steps_to_certainty(posteriors[:, truth.k_star], cfg.threshold)
    return EpisodeResult(cfg.strategy.value, restart, truth.k_star, posteriors, chosen, steps, Dataset(records))


def _stderr(values: np.ndarray, axis=0) -> np.ndarray:
    n = values.shape[axis]
    if n < 2:
        return np.zeros(np.delete(values.shape, axis)) if values.ndim > 1 else np.float64(0.0)
    return values.std(axis=axis, ddof=1) / np.sqrt(n)


@dataclass
class ExperimentResult:
    strategy: str
    episodes: list

    @property
    def curves(self) -> np.ndarray:
        return np.array([e.posterior_true for e in self.episodes])

    @property
    def mean_curve(self) -> np.ndarray:
        return self.curves.mean(axis=0)

    @property
    def stderr_curve(self) -> np.ndarray:
        return _stderr(self.curves)

    @property
    def steps(self) -> np.ndarray:
        return np.array([e.steps_to_certainty for e in self.episodes], dtype=float)

    @property
    def mean_steps(self) -> float:
        return float(self.steps.mean())

    @property
    def stderr_steps(self) -> float:
        return float(_stderr(self.steps))


def _run_one(args):
    cfg, restart = args
    return run_episode(cfg, restart)


def run_experiment(cfg: EpisodeConfig, restarts: int, n_jobs: int = 1) -> ExperimentResult:
    """Independent seeded restarts of one configuration; results are ordered by restart."""
    if restarts < 1:
        raise ValueError("need at least one restart")
    jobs = [(cfg, r) for r in range(restarts)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            episodes = list(ex.map(_run_one, jobs))
    else:
        episodes = [_run_one(a) for a in jobs]
    log.info("%s: mean steps %.2f", cfg.strategy.value, np.mean([e.steps_to_certainty for e in episodes]))
    return ExperimentResult(cfg.strategy.value, episodes)


def compare_strategies(
    setup: Setup, strategies: Sequence[StrategyKind | str], restarts: int, n_jobs: int = 1, **cfg_kwargs
) -> dict[str, ExperimentResult]:
    out = {}
    for s in strategies:
        cfg = EpisodeConfig(setup, s, **cfg_kwargs)
        out[cfg.strategy.value] = run_experiment(cfg, restarts, n_jobs)
    return out
