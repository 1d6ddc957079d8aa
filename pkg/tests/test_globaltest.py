import numpy as np
import pytest

from pdbacktest.fixtures import sp_hl_pvalues, sp_sample
from pdbacktest.globaltest import (
    global_reject,
    hl_exact_test,
    hl_null_sample,
    hl_statistic,
    hl_statistics,
    mc_pvalue,
)
from pdbacktest.minp import MinPInput
from pdbacktest.report import adjust


def sp_input(approach, year):
    data = sp_sample(approach, year)
    keep = [i for i, n in enumerate(data["n"]) if n > 0]
    return MinPInput(*([data[k][i] for i in keep] for k in ("n", "pd", "defaults")))


class TestStatistic:
    def test_expected_counts_give_zero(self):
        data = MinPInput((10, 40), (0.5, 0.25), (5, 10))
        assert hl_statistic(data) == 0.0

    def test_single_class(self):
        assert hl_statistic(MinPInput((10,), (0.5,), (8,))) == pytest.approx(3.6)

    def test_table_example(self, table_input):
        # exact rational evaluation of the sum gives 136.26414721452664
        assert hl_statistic(table_input) == pytest.approx(136.26414721452664, rel=1e-12)

    def test_vectorised(self, table_input, rng):
        d = rng.integers(0, 3, size=(50, len(table_input)))
        ref = [hl_statistic(MinPInput(table_input.n, table_input.pd, row)) for row in d]
        np.testing.assert_allclose(hl_statistics(table_input.n, table_input.pd, d), ref)

    def test_degenerate_pd(self):
        with pytest.raises(ValueError):
            hl_statistics((10,), (0.0,), np.array([[0]]))

    def test_null_mean_is_class_count(self):
        n, pd = (200, 300, 150, 400), (0.05, 0.1, 0.2, 0.03)
        sample = hl_null_sample(n, pd, 40_000, np.random.default_rng(5))
        se = sample.std() / np.sqrt(sample.size)
        assert abs(sample.mean() - len(n)) < 4 * se


class TestMonteCarloPvalue:
    def test_add_one(self):
        null = np.array([1.0, 2.0, 3.0, 4.0])
        assert mc_pvalue(2.5, null) == pytest.approx(3 / 5)
        assert mc_pvalue(10.0, null) == pytest.approx(1 / 5)
        assert mc_pvalue(0.0, null) == 1.0

    def test_ties_count_as_extreme(self):
        assert mc_pvalue(2.0, np.array([2.0, 2.0, 1.0])) == pytest.approx(3 / 4)

    def test_expected_counts_near_one(self):
        data = MinPInput((100, 200), (0.05, 0.1), (5, 20))
        assert hl_exact_test(data, n_sim=2000, seed=1) == 1.0

    def test_minimum_simulations(self, table_input):
        with pytest.raises(ValueError):
            hl_exact_test(table_input, n_sim=999)

    def test_seeded_reproducible(self, table_input):
        assert hl_exact_test(table_input, 2000, seed=9) == hl_exact_test(table_input, 2000, seed=9)

    def test_stable_when_doubling(self):
        data = sp_input("duration", 2003)
        p1 = hl_exact_test(data, 10_000, seed=21)
        p2 = hl_exact_test(data, 20_000, seed=22)
        assert 0 < p1 <= 1
        assert abs(p1 - p2) < 3 * np.sqrt(p1 * (1 - p1) / 10_000) + 3 * np.sqrt(p2 * (1 - p2) / 20_000)


class TestReferenceHlValues:
    def test_duration_2003(self):
        reference = sp_hl_pvalues()[("duration", 2003)]
        assert hl_exact_test(sp_input("duration", 2003), n_sim=10_000, seed=1) == pytest.approx(reference, abs=0.02)

    def test_cluster_2008(self):
        reference = sp_hl_pvalues()[("cluster", 2008)]
        assert reference == 0.0082
        assert hl_exact_test(sp_input("cluster", 2008), n_sim=10_000, seed=1) == pytest.approx(reference, abs=0.005)


class TestGlobalReject:
    def test_table_example(self, table_input):
        out = global_reject(adjust(table_input), 0.05)
        assert out == {
            "bonf": False,
            "hol": False,
            "hom": False,
            "bh": False,
            "a-bh": False,
            "d-bonf": True,
            "d-ind": True,
            "sd-d-bonf": True,
        }

    def test_all_ones(self):
        assert global_reject({"x": [1.0, 1.0]}, 0.05) == {"x": False}

    def test_boundary_is_rejection(self):
        assert global_reject({"x": [0.3, 0.05]}, 0.05) == {"x": True}

    def test_untested_classes_skipped(self):
        assert global_reject({"x": [None, 0.5]}, 0.05) == {"x": False}
        assert global_reject({"x": [None, None]}, 0.05) == {"x": False}
