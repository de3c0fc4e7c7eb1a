import numpy as np
import pytest
from scipy.stats import chisquare

from activeptree.ptree import OBSERVE, do, realization_probability
from activeptree.simharness import (
    EpisodeConfig,
    PatternTruth,
    asymmetric_setup,
    context_setup,
    diagonal_pattern,
    make_joint_asymmetric,
    make_joint_pattern,
    make_joint_symmetric,
    parameterize_truth,
    random_pattern,
    run_episode,
    run_experiment,
    steps_to_certainty,
    symmetric_setup,
    three_var_setup,
    two_variable_hset,
)


class TestJoints:
    def test_symmetric_uniform_at_half_for_two(self):
        np.testing.assert_allclose(make_joint_symmetric(2, 0.5), 0.25)

    def test_symmetric_four(self):
        p = make_joint_symmetric(4, 0.9)
        np.testing.assert_allclose(np.diag(p), 0.225)
        assert p[0, 1] == pytest.approx(0.1 / 12)
        np.testing.assert_allclose(p.sum(axis=0), 0.25)
        np.testing.assert_allclose(p.sum(axis=1), 0.25)

    def test_asymmetric(self):
        p = make_joint_asymmetric(0.9)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        heavy = np.isclose(p, 0.18)
        assert heavy.sum() == 5 and heavy[0].all() and heavy[3, 0]
        np.testing.assert_allclose(p[~heavy], 0.1 / 11)

    def test_asymmetric_conditionals(self):
        p = make_joint_asymmetric(0.9)
        cond = p / p.sum(axis=1, keepdims=True)
        for row in range(3):
            np.testing.assert_allclose(cond[row], 0.25)
        assert not np.allclose(cond[3], 0.25)

    def test_diagonal_pattern(self):
        p = make_joint_pattern(diagonal_pattern(3), 0.9)
        assert np.count_nonzero(np.isclose(p, 0.3)) == 3
        assert np.count_nonzero(np.isclose(p, 0.1 / 24)) == 24

    def test_random_pattern_seeded(self):
        a = random_pattern(4, np.random.default_rng(3))
        b = random_pattern(4, np.random.default_rng(3))
        np.testing.assert_array_equal(a, b)
        assert a.sum() == 16 and a.shape == (4, 4, 4)

    @pytest.mark.parametrize("n_cells", [0, 27])
    def test_pattern_extremes_rejected(self, n_cells):
        with pytest.raises(ValueError):
            random_pattern(3, np.random.default_rng(0), n_cells)
        with pytest.raises(ValueError):
            make_joint_pattern(np.full((3, 3, 3), n_cells // 27), 0.9)

    @pytest.mark.parametrize("rho", [-0.1, 1.5])
    def test_rho_range(self, rho):
        with pytest.raises(ValueError):
            make_joint_symmetric(2, rho)


class TestGroundTruth:
    def test_symmetric_transitions(self):
        truth = symmetric_setup(2, 0.8).truth
        sub = truth.hset.subtree(0)
        assert sub.root.theta == pytest.approx((0.5, 0.5))
        assert sub.root.children[0].theta == pytest.approx((0.8, 0.2))
        assert sub.root.children[1].theta == pytest.approx((0.2, 0.8))

    @pytest.mark.parametrize(
        "setup", [asymmetric_setup(), context_setup(3, 0.9, 1), context_setup(3, 0.9, 2)], ids=["asym", "ctx1", "ctx2"]
    )
    def test_every_subtree_reproduces_the_joint(self, setup):
        truth = setup.truth
        for k in range(truth.hset.S):
            sub = truth.hset.subtree(k)
            for x in sub.space.assignments():
                assert realization_probability(sub, x) == pytest.approx(truth.joint[x], abs=1e-10)

    def test_observationally_indistinguishable_samples(self):
        truth = context_setup(3, 0.9, 0).truth
        rng = np.random.default_rng(0)
        draws = truth.sample(OBSERVE, rng, size=50_000)
        counts = np.bincount(draws, minlength=27)
        assert chisquare(counts, truth.joint.ravel() * 50_000).pvalue > 0.001

    def test_interventional_distribution_depends_on_hypothesis(self):
        hset = two_variable_hset(4)
        joint = make_joint_asymmetric(0.9)
        a = parameterize_truth(hset, joint, 0).outcome_distribution(do(0, 3))
        b = parameterize_truth(hset, joint, 1).outcome_distribution(do(0, 3))
        assert not np.allclose(a, b)
        assert a.sum() == pytest.approx(1.0) and b.sum() == pytest.approx(1.0)

    def test_bad_arguments(self):
        hset = two_variable_hset(2)
        with pytest.raises(ValueError):
            parameterize_truth(hset, make_joint_symmetric(2, 0.9), 2)
        with pytest.raises(ValueError):
            parameterize_truth(hset, make_joint_symmetric(3, 0.9), 0)
        with pytest.raises(ValueError):
            parameterize_truth(hset, np.full((2, 2), 0.3), 0)

    def test_pattern_truth_is_reproducible(self):
        setup = three_var_setup(3, 0.9)
        assert isinstance(setup.truth, PatternTruth)
        a = setup.draw_truth(np.random.default_rng(1)).joint
        b = setup.draw_truth(np.random.default_rng(1)).joint
        np.testing.assert_array_equal(a, b)


class TestEpisodes:
    def test_steps_to_certainty(self):
        assert steps_to_certainty([0.96, 0.5, 0.99]) == 0
        assert steps_to_certainty([0.5, 0.6, 0.95, 0.2]) == 2
        assert steps_to_certainty([0.5, 0.6, 0.7]) == 2
        assert steps_to_certainty([0.5, 0.8], threshold=0.75) == 1

    def test_deterministic(self):
        cfg = EpisodeConfig(asymmetric_setup(), "expected", n_obs=100, max_interventions=8, seed=3)
        a, b = run_episode(cfg, 2), run_episode(cfg, 2)
        np.testing.assert_array_equal(a.posteriors, b.posteriors)
        assert a.interventions == b.interventions and a.dataset.records == b.dataset.records

    def test_common_hot_start_across_strategies(self):
        setup = asymmetric_setup()
        runs = [run_episode(EpisodeConfig(setup, s, n_obs=50, max_interventions=3), 1) for s in ("expected", "random")]
        assert runs[0].dataset.records[:50] == runs[1].dataset.records[:50]

    def test_hot_start_posterior_is_uniform(self):
        res = run_episode(EpisodeConfig(three_var_setup(3), "random", n_obs=200, max_interventions=2))
        np.testing.assert_allclose(res.posteriors[0], 1 / 6, atol=1e-10)
        assert res.posteriors.shape == (3, 6)
        assert len(res.dataset) == 202

    def test_interventional_records_respect_intervention(self):
        res = run_episode(EpisodeConfig(context_setup(), "random", n_obs=20, max_interventions=15))
        for x, j in res.dataset.records[20:]:
            assert x[j.variable] == j.value

    def test_single_restart_has_zero_stderr(self):
        exp = run_experiment(EpisodeConfig(asymmetric_setup(), "random", n_obs=50, max_interventions=5), 1)
        assert exp.stderr_steps == 0.0
        np.testing.assert_array_equal(exp.stderr_curve, 0.0)

    def test_experiment_parallel_matches_serial(self):
        cfg = EpisodeConfig(asymmetric_setup(), "expected", n_obs=100, max_interventions=5)
        a, b = run_experiment(cfg, 3), run_experiment(cfg, 3, n_jobs=2)
        np.testing.assert_array_equal(a.curves, b.curves)

    def test_expected_gain_posterior_rises_on_average(self):
        exp = run_experiment(EpisodeConfig(asymmetric_setup(), "expected", n_obs=300, max_interventions=15), 12)
        m, se = exp.mean_curve, exp.stderr_curve
        assert m[-1] > m[0] + 2 * se[-1]

    @pytest.mark.parametrize(
        "kwargs",
        [dict(threshold=0.5), dict(threshold=1.0), dict(n_obs=-1), dict(alpha=0), dict(max_interventions=-2)],
    )
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            EpisodeConfig(asymmetric_setup(), **kwargs)

    def test_bad_strategy(self):
        with pytest.raises(ValueError):
            EpisodeConfig(asymmetric_setup(), "greedy")
