import math

import numpy as np
import pytest

from activeptree.gain import candidate_interventions, expected_gain
from activeptree.hypotheses import all_orders
from activeptree.inference import BeliefState, Posterior
from activeptree.ptree import VariableSpace, do
from activeptree.simharness import asymmetric_setup, context_hset, symmetric_setup
from activeptree.strategies import (
    StrategyKind,
    UnsupportedStrategyError,
    edge_beliefs,
    entropy_cost,
    expected_entropy_after,
    scores,
    select,
)

from test_inference import random_records


def state_with_posterior(hset, probs):
    """An empty belief state whose cached posterior is overridden with ``probs``."""
    s = BeliefState(hset)
    with np.errstate(divide="ignore"):
        s._cache["post"] = Posterior.from_log_weights(np.log(probs))
    return s


def edge_entropy_oracle(probs, hset):
    """Entropy of each pair's orientation from explicit orders."""
    total = 0.0
    m = hset.space.m
    for i in range(m):
        for j in range(i + 1, m):
            p = sum(pk for pk, spec in zip(probs, hset.specs) if spec.order.index(i) < spec.order.index(j))
            for q in (p, 1 - p):
                if q > 0:
                    total -= q * math.log(q)
    return total


class TestEdgeBeliefs:
    def test_two_variable_uniform(self):
        s = BeliefState(all_orders(VariableSpace.uniform(2, 2)))
        np.testing.assert_allclose(edge_beliefs(s)[(0, 1)], [0.5, 0.5, 0.0])

    def test_three_variable_uniform(self):
        s = BeliefState(all_orders(VariableSpace.uniform(3, 2)))
        for b in edge_beliefs(s).values():
            np.testing.assert_allclose(b, [0.5, 0.5, 0.0])

    def test_concentrated(self):
        hset = all_orders(VariableSpace.uniform(3, 2))
        probs = np.eye(6)[4]  # order (2, 0, 1)
        s = state_with_posterior(hset, probs)
        b = edge_beliefs(s)
        np.testing.assert_allclose(b[(0, 1)], [1, 0, 0])
        np.testing.assert_allclose(b[(0, 2)], [0, 1, 0])
        np.testing.assert_allclose(b[(1, 2)], [0, 1, 0])

    def test_context_hypotheses_unsupported(self):
        s = BeliefState(context_hset(3))
        with pytest.raises(UnsupportedStrategyError):
            edge_beliefs(s)
        with pytest.raises(UnsupportedStrategyError):
            select("entropy", s, candidate_interventions(s.hset.space), np.random.default_rng(0))


class TestEntropy:
    def test_uniform_pair_is_ln2(self):
        s = BeliefState(all_orders(VariableSpace.uniform(2, 3)))
        assert entropy_cost(s) == pytest.approx(math.log(2))

    def test_certain_is_zero(self):
        s = state_with_posterior(all_orders(VariableSpace.uniform(2, 2)), np.array([1.0, 0.0]))
        assert entropy_cost(s) == 0.0

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_oracle(self, seed):
        hset = all_orders(VariableSpace.uniform(3, 2))
        probs = np.random.default_rng(seed).dirichlet(np.ones(6))
        s = state_with_posterior(hset, probs)
        assert entropy_cost(s) == pytest.approx(edge_entropy_oracle(probs, hset), abs=1e-12)

    def test_relabelling_invariance(self):
        hset = all_orders(VariableSpace.uniform(2, 2))
        a = state_with_posterior(hset, np.array([0.2, 0.8]))
        b = state_with_posterior(hset, np.array([0.8, 0.2]))
        assert entropy_cost(a) == pytest.approx(entropy_cost(b))

    def test_decreases_as_posterior_concentrates(self):
        hset = all_orders(VariableSpace.uniform(2, 2))
        costs = [entropy_cost(state_with_posterior(hset, np.array([p, 1 - p]))) for p in (0.5, 0.7, 0.9, 0.99)]
        assert np.all(np.diff(costs) < 0)

    def test_expected_after_matches_recompute(self):
        hset = all_orders(VariableSpace.uniform(3, 2))
        s = BeliefState(hset)
        s.extend(random_records(hset.space, 20, np.random.default_rng(7)))
        lml0 = s.log_marginal_likelihoods()
        post0 = s.posterior().probabilities
        j = do(1, 0)
        oracle = 0.0
        for x in hset.space.assignments():
            if x[1] != 0:
                continue
            after = s.with_record(x, j)
            q = np.exp(after.log_marginal_likelihoods() - lml0)
            oracle += float(post0 @ q) * edge_entropy_oracle(after.posterior().probabilities, hset)
        assert expected_entropy_after(s, j) == pytest.approx(oracle, abs=1e-12)

    def test_expected_after_certain_state(self):
        s = state_with_posterior(all_orders(VariableSpace.uniform(2, 2)), np.array([1.0, 0.0]))
        assert expected_entropy_after(s, do(0, 1)) == pytest.approx(0.0, abs=1e-12)


class TestSelect:
    def test_asymmetric_picks_heavy_row(self):
        setup = asymmetric_setup()
        s = BeliefState(setup.hset)
        s.add_observational_counts(300 * setup.truth.joint)
        cands = candidate_interventions(s.hset.space)
        assert select("expected", s, cands, np.random.default_rng(0)) == do(0, 3)
        assert select("actual", s, cands, np.random.default_rng(0), truth=setup.truth) == do(0, 3)

    def test_symmetric_ties_go_to_first(self):
        setup = symmetric_setup(4)
        s = BeliefState(setup.hset)
        s.add_observational_counts(300 * setup.truth.joint)
        cands = candidate_interventions(s.hset.space)
        sc = scores("expected", s, cands)
        np.testing.assert_allclose(sc, sc[0], rtol=1e-9)
        assert select("expected", s, cands, np.random.default_rng(0)) == do(0, 0)
        assert select("entropy", s, cands, np.random.default_rng(0)) == do(0, 0)

    def test_reordered_candidates_same_choice_when_unique(self):
        setup = asymmetric_setup()
        s = BeliefState(setup.hset)
        s.add_observational_counts(300 * setup.truth.joint)
        cands = candidate_interventions(s.hset.space)[::-1]
        assert select("expected", s, cands, np.random.default_rng(0)) == do(0, 3)

    def test_random_is_seeded(self):
        s = BeliefState(all_orders(VariableSpace.uniform(2, 3)))
        cands = candidate_interventions(s.hset.space)
        a = [select("random", s, cands, np.random.default_rng(5)) for _ in range(3)]
        assert a[0] == a[1] == a[2]
        rng = np.random.default_rng(1)
        picks = {select("random", s, cands, rng) for _ in range(200)}
        assert picks == set(cands)

    def test_scores_match_gain(self):
        s = BeliefState(all_orders(VariableSpace.uniform(2, 2)))
        s.extend(random_records(s.hset.space, 10, np.random.default_rng(2)))
        cands = candidate_interventions(s.hset.space)
        np.testing.assert_allclose(scores("expected", s, cands), [expected_gain(s, j).score for j in cands])

    def test_errors(self):
        s = BeliefState(all_orders(VariableSpace.uniform(2, 2)))
        with pytest.raises(ValueError):
            select("expected", s, [], np.random.default_rng(0))
        with pytest.raises(UnsupportedStrategyError):
            select("actual", s, candidate_interventions(s.hset.space), np.random.default_rng(0))
        with pytest.raises(ValueError):
            StrategyKind("greedy")
