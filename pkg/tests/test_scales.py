"""Tests for instrument scoring and Likert aggregation.

Aggregation oracles are the published response tables: seven motivation
questions over 15 ratings and eight experience items over 5 respondents
per session key into known percentage figures.
"""
from __future__ import annotations

from statistics import fmean

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rehabsim.scales import (
    CognitiveClass,
    EmptyDomain,
    InconsistentRow,
    LikertTable,
    MasResponse,
    MocaResponse,
    OutOfRange,
    ParseError,
    SamResponse,
    Severity,
    SrmsResponse,
    TonusClass,
    UeqResponse,
    WhoqolResponse,
    aggregate_likert,
    eligibility,
    mas_score,
    moca_score,
    read_mas_csv,
    read_moca_csv,
    read_sam_csv,
    read_srms_csv,
    read_ueq_csv,
    read_whoqol_csv,
    round_half_up,
    sam_delta,
    srms_likert_table,
    srms_score,
    tally_likert,
    ueq_likert_table,
    ueq_score,
    whoqol_score,
    SRMS_CATEGORIES,
    UEQ_CATEGORIES,
    UEQ_ITEMS,
)


class TestMas:
    def test_maximum_with_normal_tonus(self) -> None:
        r = MasResponse(items=(6,) * 8, general_tonus=4)
        s = mas_score(r)
        assert s.total == 48
        assert s.tonus is TonusClass.NORMAL

    def test_minimum_with_low_tonus(self) -> None:
        s = mas_score(MasResponse(items=(0,) * 8, general_tonus=2))
        assert s.total == 0
        assert s.tonus is TonusClass.HYPERTONUS

    def test_high_tonus(self) -> None:
        s = mas_score(MasResponse(items=(3,) * 8, general_tonus=6))
        assert s.tonus is TonusClass.HYPOTONUS

    def test_item_out_of_range(self) -> None:
        with pytest.raises(OutOfRange):
            MasResponse(items=(7, 0, 0, 0, 0, 0, 0, 0), general_tonus=4)
        with pytest.raises(OutOfRange):
            MasResponse(items=(0, -1, 0, 0, 0, 0, 0, 0), general_tonus=4)

    def test_wrong_item_count(self) -> None:
        with pytest.raises(OutOfRange):
            MasResponse(items=(1, 2, 3), general_tonus=4)

    def test_tonus_out_of_range(self) -> None:
        with pytest.raises(OutOfRange):
            MasResponse(items=(0,) * 8, general_tonus=7)

    @given(
        items=st.tuples(*[st.integers(0, 6)] * 8),
        tonus=st.integers(0, 6),
    )
    def test_total_bounded_and_tonus_invariant(self, items, tonus) -> None:
        s = mas_score(MasResponse(items=items, general_tonus=tonus))
        assert 0 <= s.total <= 48
        # The tonus observation never moves the total.
        other = mas_score(MasResponse(items=items, general_tonus=(tonus + 1) % 7))
        assert other.total == s.total


class TestMoca:
    def test_max_high_education(self) -> None:
        s = moca_score(MocaResponse(raw=30, education_years=16))
        assert s.adjusted == 30
        assert s.classification is CognitiveClass.NORMAL

    def test_education_bonus_reaches_cutoff(self) -> None:
        s = moca_score(MocaResponse(raw=25, education_years=10))
        assert s.adjusted == 26
        assert s.classification is CognitiveClass.NORMAL

    def test_bonus_capped_at_max(self) -> None:
        s = moca_score(MocaResponse(raw=30, education_years=10))
        assert s.adjusted == 30

    def test_below_cutoff(self) -> None:
        s = moca_score(MocaResponse(raw=25, education_years=13))
        assert s.adjusted == 25
        assert s.classification is CognitiveClass.BELOW_CUTOFF

    def test_education_boundary_is_twelve(self) -> None:
        assert moca_score(MocaResponse(raw=20, education_years=12)).adjusted == 21
        assert moca_score(MocaResponse(raw=20, education_years=13)).adjusted == 20

    def test_out_of_range(self) -> None:
        with pytest.raises(OutOfRange):
            MocaResponse(raw=31, education_years=10)
        with pytest.raises(OutOfRange):
            MocaResponse(raw=-1, education_years=10)
        with pytest.raises(OutOfRange):
            MocaResponse(raw=20, education_years=-1)

    @given(raw=st.integers(0, 29), edu=st.integers(0, 30))
    def test_monotone_in_raw_and_capped(self, raw, edu) -> None:
        lo = moca_score(MocaResponse(raw=raw, education_years=edu)).adjusted
        hi = moca_score(MocaResponse(raw=raw + 1, education_years=edu)).adjusted
        assert lo <= hi <= 30


class TestEligibility:
    def test_study_subject_profile(self) -> None:
        assert eligibility(27, 9, Severity.LIGHT) is True

    def test_cognitive_cutoff_is_strict(self) -> None:
        assert eligibility(30, 7, Severity.MILD) is False
        assert eligibility(30, 8, Severity.MILD) is True

    def test_age_window(self) -> None:
        assert eligibility(66, 9, Severity.LIGHT) is False
        assert eligibility(20, 9, Severity.LIGHT) is False
        assert eligibility(21, 9, Severity.LIGHT) is True
        assert eligibility(65, 9, Severity.LIGHT) is True

    def test_severity_strings(self) -> None:
        assert eligibility(40, 9, "Light") is True
        assert eligibility(40, 9, "Mild") is True
        assert eligibility(40, 9, "LightMild") is True
        assert eligibility(40, 9, "Severe") is False
        assert eligibility(40, 9, "") is False


class TestSrms:
    def test_range_extremes(self) -> None:
        assert srms_score(SrmsResponse(items=(5,) * 7)) == 35
        assert srms_score(SrmsResponse(items=(1,) * 7)) == 7

    def test_mixed_sum(self) -> None:
        assert srms_score(SrmsResponse(items=(5, 4, 5, 4, 5, 4, 5))) == 32

    def test_out_of_range_item(self) -> None:
        with pytest.raises(OutOfRange):
            SrmsResponse(items=(5, 4, 5, 6, 5, 4, 5))
        with pytest.raises(OutOfRange):
            SrmsResponse(items=(0, 4, 5, 4, 5, 4, 5))

    def test_wrong_count(self) -> None:
        with pytest.raises(OutOfRange):
            SrmsResponse(items=(5,) * 6)

    @given(items=st.tuples(*[st.integers(1, 5)] * 7))
    def test_bounds(self, items) -> None:
        assert 7 <= srms_score(SrmsResponse(items=items)) <= 35


class TestUeq:
    def test_range_extremes(self) -> None:
        assert ueq_score(UeqResponse(items=(7,) * 8)) == 56
        assert ueq_score(UeqResponse(items=(1,) * 8)) == 8

    def test_all_middling_is_not_above_forty(self) -> None:
        score = ueq_score(UeqResponse(items=(5,) * 8))
        assert score == 40
        assert not score > 40

    def test_out_of_range(self) -> None:
        with pytest.raises(OutOfRange):
            UeqResponse(items=(8, 1, 1, 1, 1, 1, 1, 1))
        with pytest.raises(OutOfRange):
            UeqResponse(items=(0, 1, 1, 1, 1, 1, 1, 1))

    @given(items=st.tuples(*[st.integers(1, 7)] * 8))
    def test_bounds(self, items) -> None:
        assert 8 <= ueq_score(UeqResponse(items=items)) <= 56


class TestSam:
    def test_no_change(self) -> None:
        r = SamResponse(valence=3, arousal=3, dominance=3)
        assert sam_delta(r, r).to_dict() == {"valence": 0, "arousal": 0, "dominance": 0}

    def test_pleasure_increase(self) -> None:
        pre = SamResponse(valence=3, arousal=2, dominance=4)
        post = SamResponse(valence=5, arousal=2, dominance=4)
        assert sam_delta(pre, post).valence == 2

    def test_extreme_drop(self) -> None:
        pre = SamResponse(valence=3, arousal=3, dominance=5)
        post = SamResponse(valence=3, arousal=3, dominance=1)
        assert sam_delta(pre, post).dominance == -4

    def test_out_of_range(self) -> None:
        with pytest.raises(OutOfRange):
            SamResponse(valence=0, arousal=3, dominance=3)
        with pytest.raises(OutOfRange):
            SamResponse(valence=3, arousal=6, dominance=3)

    @given(
        pre=st.tuples(*[st.integers(1, 5)] * 3),
        post=st.tuples(*[st.integers(1, 5)] * 3),
    )
    def test_delta_bounds(self, pre, post) -> None:
        d = sam_delta(SamResponse(*pre), SamResponse(*post))
        for v in (d.valence, d.arousal, d.dominance):
            assert -4 <= v <= 4


class TestWhoqol:
    def make(self, value: int) -> WhoqolResponse:
        return WhoqolResponse(
            physical=(value,) * 7,
            psychological=(value,) * 6,
            social=(value,) * 3,
            environment=(value,) * 8,
        )

    def test_maximum(self) -> None:
        s = whoqol_score(self.make(5))
        assert s.to_dict() == {
            "physical": 100.0,
            "psychological": 100.0,
            "social": 100.0,
            "environment": 100.0,
        }

    def test_minimum(self) -> None:
        assert whoqol_score(self.make(1)).physical == 0.0

    def test_midpoint(self) -> None:
        assert whoqol_score(self.make(3)).environment == 50.0

    def test_mixed_matches_mean_formula(self) -> None:
        r = WhoqolResponse(
            physical=(1, 2, 3, 4, 5, 4, 3),
            psychological=(2, 2, 3, 3, 4, 4),
            social=(5, 4, 3),
            environment=(1, 1, 2, 2, 3, 3, 4, 4),
        )
        s = whoqol_score(r)
        assert s.physical == pytest.approx((fmean(r.physical) - 1) / 4 * 100)
        assert s.social == pytest.approx((fmean(r.social) - 1) / 4 * 100)

    def test_empty_domain(self) -> None:
        with pytest.raises(EmptyDomain):
            WhoqolResponse(physical=(), psychological=(3,), social=(3,), environment=(3,))

    def test_out_of_range_item(self) -> None:
        with pytest.raises(OutOfRange):
            WhoqolResponse(physical=(6,), psychological=(3,), social=(3,), environment=(3,))

    @given(
        items=st.lists(st.integers(1, 5), min_size=1, max_size=10).map(tuple)
    )
    def test_domain_score_bounded(self, items) -> None:
        r = WhoqolResponse(physical=items, psychological=(3,), social=(3,), environment=(3,))
        assert 0.0 <= whoqol_score(r).physical <= 100.0


class TestRounding:
    def test_half_goes_up(self) -> None:
        assert round_half_up(0.5) == 1
        assert round_half_up(1.5) == 2
        assert round_half_up(2.5) == 3

    def test_plain_cases(self) -> None:
        assert round_half_up(2.4) == 2
        assert round_half_up(2.6) == 3
        assert round_half_up(93.0 + 1.0 / 3.0) == 93
        assert round_half_up(86.0 + 2.0 / 3.0) == 87
        assert round_half_up(73.0 + 1.0 / 3.0) == 73


# The published motivation-question counts over 15 ratings.
SRMS_TABLE_COUNTS = {
    "Q1": (0, 0, 0, 9, 6),
    "Q2": (0, 0, 4, 6, 5),
    "Q3": (0, 0, 3, 5, 7),
    "Q4": (0, 0, 1, 8, 6),
    "Q5": (0, 0, 1, 7, 7),
    "Q6": (0, 0, 2, 6, 7),
    "Q7": (1, 0, 5, 5, 4),
}

AGREE = ("somewhat_agree", "completely_agree")


def srms_table() -> LikertTable:
    return LikertTable(
        categories=SRMS_CATEGORIES,
        rows=tuple((q, SRMS_TABLE_COUNTS[q]) for q in sorted(SRMS_TABLE_COUNTS)),
        n_respondents=15,
    )


class TestLikertTable:
    def test_row_sum_must_match_n(self) -> None:
        with pytest.raises(InconsistentRow):
            LikertTable(
                categories=SRMS_CATEGORIES,
                rows=(("Q1", (1, 1, 1, 1, 1)),),
                n_respondents=15,
            )

    def test_count_arity_must_match_categories(self) -> None:
        with pytest.raises(InconsistentRow):
            LikertTable(
                categories=SRMS_CATEGORIES,
                rows=(("Q1", (5, 5, 5)),),
                n_respondents=15,
            )

    def test_negative_count_rejected(self) -> None:
        with pytest.raises(InconsistentRow):
            LikertTable(
                categories=SRMS_CATEGORIES,
                rows=(("Q1", (-1, 0, 0, 8, 8)),),
                n_respondents=15,
            )


class TestAggregateLikert:
    def test_exact_distribution_for_q2(self) -> None:
        summary = aggregate_likert(srms_table())
        row = summary.row("Q2")
        assert row.exact_pct == pytest.approx((0.0, 0.0, 4 * 100 / 15, 40.0, 5 * 100 / 15))
        assert row.display_pct == (0, 0, 27, 40, 33)

    def test_agree_unions_match_published_values(self) -> None:
        summary = aggregate_likert(srms_table())
        expected = {
            "Q1": 15,
            "Q2": 11,
            "Q3": 12,
            "Q4": 14,
            "Q5": 14,
            "Q6": 13,
            "Q7": 9,
        }
        for q, agree_count in expected.items():
            assert summary.union_pct(q, AGREE) == agree_count * 100.0 / 15

    def test_union_display_values(self) -> None:
        summary = aggregate_likert(srms_table())
        display = {
            q: round_half_up(summary.union_pct(q, AGREE)) for q in SRMS_TABLE_COUNTS
        }
        assert display == {
            "Q1": 100,
            "Q2": 73,
            "Q3": 80,
            "Q4": 93,
            "Q5": 93,
            "Q6": 87,
            "Q7": 60,
        }

    def test_union_sums_counts_not_rounded_percentages(self) -> None:
        # 7 + 7 of 15: each category rounds to 47 so the rounded sum is
        # 94, but the true union is 93.33 and must display as 93.
        summary = aggregate_likert(srms_table())
        row = summary.row("Q5")
        rounded_sum = row.display_pct[3] + row.display_pct[4]
        assert rounded_sum == 94
        union = summary.union_pct("Q5", AGREE)
        assert union == pytest.approx(1400.0 / 15.0)
        assert round_half_up(union) == 93

    def test_percentages_conserve_total(self) -> None:
        summary = aggregate_likert(srms_table())
        for row in summary.rows:
            assert sum(row.exact_pct) == pytest.approx(100.0)
            assert abs(sum(row.display_pct) - 100) <= len(row.counts) * 0.5

    def test_unknown_row_label(self) -> None:
        with pytest.raises(KeyError):
            aggregate_likert(srms_table()).row("Q9")


class TestTally:
    def test_tally_reproduces_counts(self) -> None:
        responses = [
            SrmsResponse(items=(4, 4, 4, 4, 4, 4, 4)),
            SrmsResponse(items=(5, 5, 5, 5, 5, 5, 5)),
            SrmsResponse(items=(4, 3, 3, 4, 4, 3, 1)),
        ]
        table = srms_likert_table(responses)
        assert table.n_respondents == 3
        assert table.rows[0] == ("Q1", (0, 0, 0, 2, 1))
        assert table.rows[6] == ("Q7", (1, 0, 0, 1, 1))

    def test_ueq_table_uses_item_labels(self) -> None:
        responses = [UeqResponse(items=(4, 3, 3, 4, 4, 3, 1, 7))]
        table = ueq_likert_table(responses)
        assert table.categories == UEQ_CATEGORIES
        assert [label for label, _ in table.rows] == list(UEQ_ITEMS)
        assert table.rows[7] == ("leading_edge", (0, 0, 0, 0, 0, 0, 1))

    def test_empty_tally_rejected(self) -> None:
        with pytest.raises(InconsistentRow):
            tally_likert(("Q1",), [], SRMS_CATEGORIES)


class TestCsvReaders:
    def test_mas_round_trip(self) -> None:
        text = (
            "subject,item1,item2,item3,item4,item5,item6,item7,item8,general_tonus\n"
            "S1,6,6,6,6,6,6,6,6,4\n"
            "S2,0,1,2,3,4,5,6,0,2\n"
        )
        rows = read_mas_csv(text)
        assert rows[0][0] == "S1"
        assert mas_score(rows[0][1]).total == 48
        assert mas_score(rows[1][1]).total == 21

    def test_srms_out_of_range_names_cell(self) -> None:
        text = (
            "subject,session,q1,q2,q3,q4,q5,q6,q7\n"
            "S1,1,5,4,5,6,5,4,5\n"
        )
        with pytest.raises(OutOfRange, match=r"row 2.*q4"):
            read_srms_csv(text)

    def test_bad_header(self) -> None:
        with pytest.raises(ParseError):
            read_moca_csv("subject,total\nS1,30\n")

    def test_non_integer_cell(self) -> None:
        text = "subject,raw,education_years\nS1,abc,10\n"
        with pytest.raises(ParseError, match=r"row 2.*raw"):
            read_moca_csv(text)

    def test_empty_file(self) -> None:
        with pytest.raises(ParseError):
            read_srms_csv("")

    def test_header_only(self) -> None:
        with pytest.raises(ParseError):
            read_moca_csv("subject,raw,education_years\n")

    def test_sam_phase_validation(self) -> None:
        good = (
            "subject,session,phase,valence,arousal,dominance\n"
            "S1,1,pre,3,3,3\n"
            "S1,1,post,5,3,3\n"
        )
        rows = read_sam_csv(good)
        assert rows[0][1] == "pre"
        assert sam_delta(rows[0][2], rows[1][2]).valence == 2
        bad = good.replace("pre", "before")
        with pytest.raises(ParseError, match="phase"):
            read_sam_csv(bad)

    def test_ueq_and_whoqol_round_trip(self) -> None:
        ueq_text = (
            "subject,session,supportive,easy,efficient,clear,exciting,"
            "interesting,inventive,leading_edge\n"
            "S1,1,4,3,3,4,4,3,1,7\n"
        )
        assert ueq_score(read_ueq_csv(ueq_text)[0][1]) == 29
        who_cols = ",".join(
            ["subject"]
            + [f"phys{i}" for i in range(1, 8)]
            + [f"psych{i}" for i in range(1, 7)]
            + [f"soc{i}" for i in range(1, 4)]
            + [f"env{i}" for i in range(1, 9)]
        )
        who_text = who_cols + "\n" + "S1," + ",".join(["3"] * 24) + "\n"
        assert read_whoqol_csv(who_text)[0][1].social == (3, 3, 3)
