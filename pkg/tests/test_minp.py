import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdbacktest.minp import MinPEngine, MinPInput, minp_single_step, minp_step_down

import oracles


@st.composite
def small_samples(draw, max_k=3, max_n=5):
    k = draw(st.integers(1, max_k))
    n = [draw(st.integers(1, max_n)) for _ in range(k)]
    pd = [draw(st.sampled_from([0.02, 0.1, 0.25, 0.5])) for _ in range(k)]
    defaults = [draw(st.integers(0, nj)) for nj in n]
    return MinPInput(n, pd, defaults)


@st.composite
def samples(draw, max_k=6):
    k = draw(st.integers(1, max_k))
    n = [draw(st.integers(1, 40)) for _ in range(k)]
    pd = [draw(st.floats(0.001, 0.3)) for _ in range(k)]
    defaults = [draw(st.integers(0, min(nj, 6))) for nj in n]
    return MinPInput(n, pd, defaults)


class TestReferenceRow:
    def test_single_step(self, table_input):
        ind = minp_single_step(table_input, "independence")
        bonf = minp_single_step(table_input, "bonferroni")
        assert ind[7] == pytest.approx(0.0322, abs=1e-4)
        assert bonf[7] == pytest.approx(0.0327, abs=1e-4)
        assert bonf[1] == pytest.approx(0.0564, abs=1e-4)

    def test_step_down(self, table_input):
        sd = minp_step_down(table_input, "bonferroni")
        assert sd[7] == pytest.approx(0.0327, abs=1e-4)
        assert sd[1] == pytest.approx(0.0472, abs=1e-4)
        assert sd[8] == pytest.approx(0.3703, abs=1e-4)


class TestInput:
    @pytest.mark.parametrize(
        "n, pd, d",
        [((0,), (0.1,), (0,)), ((5,), (0.0,), (0,)), ((5,), (1.0,), (0,)), ((5,), (0.1,), (6,)), ((), (), ())],
    )
    def test_invalid(self, n, pd, d):
        with pytest.raises(ValueError):
            MinPInput(n, pd, d)

    def test_bad_alternative(self):
        with pytest.raises(ValueError):
            MinPInput((5,), (0.1,), (1,), alternative="upper")

    def test_bad_mode(self, table_input):
        with pytest.raises(ValueError):
            minp_single_step(table_input, "exchangeable")


class TestOracle:
    @settings(max_examples=120, deadline=None)
    @given(small_samples(), st.sampled_from(["independence", "bonferroni"]), st.booleans())
    def test_matches_enumeration(self, data, mode, step_down):
        classes = list(zip(data.n, data.pd))
        expected = oracles.minp_adjusted(classes, data.defaults, mode, step_down)
        fn = minp_step_down if step_down else minp_single_step
        np.testing.assert_allclose(fn(data, mode), expected, atol=1e-12)

    def test_one_class_equals_raw(self):
        data = MinPInput((12,), (0.07,), (3,))
        for mode in ("independence", "bonferroni"):
            np.testing.assert_allclose(minp_single_step(data, mode), data.pvalues(), atol=1e-15)
            np.testing.assert_allclose(minp_step_down(data, mode), data.pvalues(), atol=1e-15)


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(samples())
    def test_orderings(self, data):
        eps = 1e-12
        ss_b = minp_single_step(data, "bonferroni")
        ss_i = minp_single_step(data, "independence")
        sd_b = minp_step_down(data, "bonferroni")
        sd_i = minp_step_down(data, "independence")
        assert np.all(sd_b <= ss_b + eps)
        assert np.all(sd_i <= ss_i + eps)
        assert np.all(ss_i <= ss_b + eps)
        assert np.all(sd_i <= sd_b + eps)
        raw = data.pvalues()
        assert np.all(sd_i >= raw - eps)

    @settings(max_examples=150, deadline=None)
    @given(samples())
    def test_step_down_monotone_in_raw_order(self, data):
        raw = data.pvalues()
        sd = minp_step_down(data, "bonferroni")
        order = np.argsort(raw, kind="stable")
        assert np.all(np.diff(sd[order]) >= -1e-15)
        for a in range(len(raw)):
            for b in range(len(raw)):
                if raw[a] == raw[b]:
                    assert sd[a] == sd[b]


class TestEngine:
    @pytest.mark.parametrize("mode", ["independence", "bonferroni"])
    def test_matches_reference_path(self, mode, rng):
        n, pd = (5, 5, 8, 3, 20), (0.1, 0.1, 0.2, 0.3, 0.01)
        engine = MinPEngine(n, pd)
        defaults = np.column_stack([rng.integers(0, nj + 1, 300) for nj in n])
        ref_ss = np.array([minp_single_step(MinPInput(n, pd, d), mode) for d in defaults])
        ref_sd = np.array([minp_step_down(MinPInput(n, pd, d), mode) for d in defaults])
        np.testing.assert_allclose(engine.single_step(defaults, mode), ref_ss, atol=1e-12)
        np.testing.assert_allclose(engine.step_down(defaults, mode), ref_sd, atol=1e-12)

    def test_table_example(self, table_input):
        engine = MinPEngine(table_input.n, table_input.pd)
        d = np.array([table_input.defaults])
        np.testing.assert_allclose(engine.pvalues(d)[0], table_input.pvalues())
        np.testing.assert_allclose(
            engine.step_down(d, "bonferroni")[0], minp_step_down(table_input, "bonferroni"), atol=1e-12
        )

    def test_null_fwer(self, table_input):
        # defaults drawn from the forecast PDs: no hypothesis is false
        engine = MinPEngine(table_input.n, table_input.pd)
        rng = np.random.default_rng(3)
        n_sim = 20_000
        defaults = rng.binomial(table_input.n, table_input.pd, size=(n_sim, len(table_input)))
        rej = (engine.step_down(defaults, "bonferroni") <= 0.05).any(axis=1).mean()
        assert rej <= 0.05 + 3 * np.sqrt(0.05 * 0.95 / n_sim)

    def test_one_sided(self):
        data = MinPInput((46,), (0.0003,), (1,), alternative="greater")
        assert data.pvalues()[0] == pytest.approx(1 - (1 - 0.0003) ** 46)
        engine = MinPEngine((46,), (0.0003,), alternative="greater")
        assert engine.single_step(np.array([[1]]))[0, 0] == pytest.approx(data.pvalues()[0])
