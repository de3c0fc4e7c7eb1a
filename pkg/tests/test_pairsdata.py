from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from activeptree.pairsdata import (
    PairsFormatError,
    bin_pair,
    load_pair,
    load_pairs,
    parse_meta_line,
    quantile_bin,
    read_meta,
    run_pairs_benchmark,
    weighted_mean_stderr,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "pairs"


class TestLoading:
    def test_meta(self):
        meta = read_meta(FIXTURES / "pairmeta.txt")
        assert [m.id for m in meta] == ["0001", "0002", "0003"]
        assert meta[1].cause_cols == (1, 2) and meta[1].effect_cols == (3, 4)
        assert [m.weight for m in meta] == [1.0, 0.5, 0.5]

    def test_two_column_pair(self):
        p = load_pair(FIXTURES / "pair0001.txt", "0001 1 1 2 2 1")
        assert len(p.cause) == len(p.effect) == 300
        assert p.cause[0] == 0.647906 and p.effect[0] == 0.793501

    def test_multivariate_pair_uses_first_columns(self):
        p = load_pair(FIXTURES / "pair0002.txt", "0002 1 2 3 4 0.5")
        assert p.cause[0] == 9.098442 and p.effect[0] == 2.445042

    def test_reversed_columns(self):
        p = load_pair(FIXTURES / "pair0003.txt", "0003 2 2 1 1 0.5")
        assert p.cause[0] == 2.0 and p.effect[0] == 5.934365

    def test_load_directory(self):
        pairs = load_pairs(FIXTURES)
        assert [p.id for p in pairs] == ["0001", "0002", "0003"]

    def test_missing_meta(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_pairs(tmp_path)

    @pytest.mark.parametrize(
        "line", ["0001 1 1 2 2", "0001 a 1 2 2 1", "0001 2 1 2 2 1", "0001 0 0 2 2 1", "0001 1 1 2 2 0"]
    )
    def test_bad_meta(self, line):
        with pytest.raises(PairsFormatError):
            parse_meta_line(line)

    def test_non_numeric_cell(self, tmp_path):
        f = tmp_path / "pair0009.txt"
        f.write_text("1.0 2.0\n3.0 abc\n")
        with pytest.raises(PairsFormatError, match=":2:"):
            load_pair(f, "0009 1 1 2 2 1")

    def test_too_few_columns(self, tmp_path):
        f = tmp_path / "pair0009.txt"
        f.write_text("1.0\n")
        with pytest.raises(PairsFormatError):
            load_pair(f, "0009 1 1 2 2 1")

    def test_empty_file(self, tmp_path):
        f = tmp_path / "pair0009.txt"
        f.write_text("\n")
        with pytest.raises(PairsFormatError):
            load_pair(f, "0009 1 1 2 2 1")


class TestBinning:
    def test_one_to_ten(self):
        bins, degenerate = quantile_bin(np.arange(1, 11), 5)
        assert tuple(bins) == (0, 0, 1, 1, 2, 2, 3, 3, 4, 4)
        assert not degenerate

    def test_all_equal(self):
        bins, degenerate = quantile_bin(np.full(20, 3.0), 5)
        assert len(set(bins)) == 1 and degenerate

    def test_normal_draws_near_equal_frequency(self):
        x = np.random.default_rng(0).normal(size=10_000)
        bins, _ = quantile_bin(x, 5)
        np.testing.assert_allclose(np.bincount(bins) / len(x), 0.2, atol=0.02)

    @given(st.lists(st.integers(-50, 50), min_size=1, max_size=200), st.integers(2, 8))
    @settings(max_examples=60)
    def test_monotone_and_in_range(self, values, K):
        x = np.array(values, dtype=float)
        bins, _ = quantile_bin(x, K)
        order = np.argsort(x, kind="stable")
        assert np.all(np.diff(bins[order]) >= 0)
        assert bins.min() >= 0 and bins.max() < K
        for v in np.unique(x):
            assert len(set(bins[x == v])) == 1

    def test_errors(self):
        with pytest.raises(ValueError):
            quantile_bin([], 5)
        with pytest.raises(ValueError):
            quantile_bin([1, 2], 1)

    def test_fixture_joint_has_uniform_cause_marginal(self):
        pairs = {p.id: bin_pair(p) for p in load_pairs(FIXTURES)}
        joint = pairs["0001"].joint()
        assert joint.shape == (5, 5) and joint.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(joint.sum(axis=1), 0.2, atol=1e-12)


class TestWeightedMean:
    def test_values(self):
        mean, se = weighted_mean_stderr([1.0, 3.0], [1.0, 1.0])
        assert mean == 2.0
        assert se == pytest.approx(np.sqrt(2) / 2)

    @pytest.mark.parametrize("c", [0.1, 7.0])
    def test_weight_scale_invariant(self, c):
        x, w = [4.0, 10.0, 7.0], np.array([1.0, 0.5, 0.25])
        a, b = weighted_mean_stderr(x, w), weighted_mean_stderr(x, c * w)
        assert a == pytest.approx(b)

    def test_single_value(self):
        assert weighted_mean_stderr([5.0], [2.0]) == (5.0, 0.0)


class TestBenchmark:
    def test_fixture_run(self):
        out = run_pairs_benchmark(FIXTURES, 100, ["expected", "random"], restarts=2, max_interventions=10)
        assert [s.strategy for s in out] == ["expected", "random"]
        for s in out:
            assert set(s.per_pair) == {"0001", "0002", "0003"}
            assert 0 <= s.weighted_mean_interventions <= 10

    def test_deterministic(self):
        a = run_pairs_benchmark(FIXTURES, 50, ["random"], restarts=2, max_interventions=5)
        b = run_pairs_benchmark(FIXTURES, 50, ["random"], restarts=2, max_interventions=5)
        assert a == b

    def test_independent_pair_stays_at_ceiling(self, tmp_path):
        rng = np.random.default_rng(0)
        np.savetxt(tmp_path / "pair0001.txt", rng.normal(size=(500, 2)))
        (tmp_path / "pairmeta.txt").write_text("0001 1 1 2 2 1\n")
        out = run_pairs_benchmark(tmp_path, 100, ["expected", "random"], restarts=3, max_interventions=20)
        for s in out:
            assert s.weighted_mean_interventions >= 15
