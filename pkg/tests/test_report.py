import json

import numpy as np
import pytest

from pdbacktest.fixtures import parse_flags, sp_hl_pvalues, sp_sample, sp_years, table_expected, table_sample
from pdbacktest.minp import MinPEngine
from pdbacktest.report import (
    DEFAULT_METHODS,
    AdjustmentReport,
    adjust,
    adjust_many,
    build_report,
    check_methods,
)


def table_report(**kw):
    d = table_sample()
    return build_report(d["class"], d["label"], d["n"], d["pd"], d["defaults"], **kw)


class TestMethods:
    def test_check_methods_normalises(self):
        assert check_methods([" BONF", "d-Ind"]) == ("bonf", "d-ind")

    def test_unknown_lists_valid(self):
        with pytest.raises(ValueError, match="valid methods: bonf, hol"):
            check_methods(["bonf", "tukey"])

    def test_empty(self):
        with pytest.raises(ValueError):
            check_methods([])

    def test_batch_matches_single(self, table_input):
        engine = MinPEngine(table_input.n, table_input.pd)
        many = adjust_many(engine, np.array([table_input.defaults]))
        one = adjust(table_input)
        for m in DEFAULT_METHODS:
            np.testing.assert_allclose(many[m][0], one[m], atol=1e-12)


class TestReport:
    def test_decisions(self):
        rep = table_report()
        assert rep.flagged("sd-d-bonf") == ["2", "8"]
        assert rep.flagged("d-bonf") == ["8"]
        assert rep.flagged("bonf") == []
        assert rep.global_reject()["d-ind"] is True

    def test_json_round_trip(self):
        rep = table_report(hl_pvalue=0.0071)
        again = AdjustmentReport.from_dict(json.loads(rep.to_json()))
        assert again == rep
        assert again.to_json() == rep.to_json()

    def test_empty_class_excluded(self):
        rep = build_report(["a", "b", "c"], ["A", "B", "C"], [10, 0, 20], [0.1, 0.2, 0.3], [1, 0, 2])
        assert rep.raw[1] is None
        assert all(rep.adjusted[m][1] is None for m in rep.methods)
        assert rep.rejected("bonf")[1] is None
        assert rep.meta["family_size"] == 2
        # Bonferroni multiplies by the family size 2, not 3
        assert rep.adjusted["bonf"][0] == pytest.approx(min(1.0, 2 * rep.raw[0]))

    def test_no_active_class(self):
        with pytest.raises(ValueError):
            build_report(["a"], ["A"], [0], [0.1], [0])

    def test_one_sided_meta(self):
        assert table_report(alternative="greater").meta["alternative"] == "greater"


class TestFixtures:
    def test_flags_parser(self):
        assert parse_flags("") == set()
        assert parse_flags("1--8") == set(range(1, 9))
        assert parse_flags("4,5,8") == {4, 5, 8}
        assert parse_flags("1--3,6") == {1, 2, 3, 6}

    def test_sp_tables(self):
        for approach in ("cluster", "duration"):
            assert sp_years(approach) == list(range(2003, 2009))
            data = sp_sample(approach, 2008)
            assert len(data["n"]) == 17
            assert all(0 < p < 1 for p in data["pd"])

    def test_duration_2008_a_minus(self):
        data = sp_sample("duration", 2008)
        i = data["label"].index("A-")
        assert (data["n"][i], data["defaults"][i]) == (500, 3)
        assert data["pd"][i] == pytest.approx(1e-4)
        assert data["flags"][i] == set(range(1, 9))

    def test_verbatim_typos(self):
        assert sp_sample("cluster", 2004)["n"][1] == 4
        assert sp_sample("duration", 2004)["n"][1] == 41

    def test_hl_footers(self):
        hl = sp_hl_pvalues()
        assert len(hl) == 12
        assert hl[("duration", 2003)] == 0.35

    def test_table_expected_rows(self):
        exp = table_expected()
        assert set(exp) == {"raw", "bonf", "holm", "hommel", "bh", "abh", "d-ind", "d-bonf", "sd-d-bonf"}
        assert exp["sd-d-bonf"]["2"] == 0.0472
