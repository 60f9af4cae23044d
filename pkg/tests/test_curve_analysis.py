"""Tests for level crossings and SNR gaps between curves."""

import pytest

from core.generators.csv_generator import ResultRow
from core.services.curve_analysis import all_gaps, curves, snr_at_level, snr_gap
from utils.exceptions import InvalidInputError


def row(snr_db, value, curve="improved", quantity="outage_rate", pilot_length=2, iteration=0):
    return ResultRow(experiment="x", quantity=quantity, snr_db=snr_db, pilot_length=pilot_length, curve=curve,
                     iteration=iteration, value=value, trials=100, std_error=0.0, seed=1)


def rate_curve(curve, offset_db, pilot_length=2):
    # one bit per 3 dB
    return [row(x, (x - offset_db) / 3.0, curve=curve, pilot_length=pilot_length) for x in (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)]


class TestSnrAtLevel:
    def test_linear_interpolation_for_rates(self):
        rows = [row(0.0, 2.0), row(10.0, 6.0)]
        assert snr_at_level(rows, 5.0) == pytest.approx(7.5)

    def test_log_interpolation_for_error_rates(self):
        rows = [row(0.0, 1e-1, quantity="ber"), row(10.0, 1e-3, quantity="ber")]
        assert snr_at_level(rows, 1e-2) == pytest.approx(5.0)

    def test_exact_grid_hit(self):
        rows = [row(0.0, 1.0), row(5.0, 3.0), row(10.0, 4.0)]
        assert snr_at_level(rows, 3.0) == 5.0
        assert snr_at_level(rows, 4.0) == 10.0

    def test_unsorted_input(self):
        rows = [row(10.0, 6.0), row(0.0, 2.0)]
        assert snr_at_level(rows, 4.0) == pytest.approx(5.0)

    def test_level_never_reached(self):
        assert snr_at_level([row(0.0, 1.0), row(10.0, 2.0)], 5.0) is None
        assert snr_at_level([], 1.0) is None

    def test_zero_error_point(self):
        rows = [row(0.0, 1e-2, quantity="ber"), row(5.0, 0.0, quantity="ber")]
        assert snr_at_level(rows, 1e-4) == 5.0

    def test_nonpositive_error_level(self):
        with pytest.raises(InvalidInputError):
            snr_at_level([row(0.0, 0.1, quantity="ber")], 0.0)


class TestCurves:
    def test_grouping_and_last_iteration(self):
        rows = [
            row(0.0, 0.2, quantity="ber", iteration=1),
            row(0.0, 0.1, quantity="ber", iteration=2),
            row(0.0, 0.3, quantity="fer", iteration=2),
            row(0.0, 0.15, quantity="ber", iteration=2, curve="mismatched"),
        ]
        grouped = curves(rows)
        assert set(grouped) == {("improved", 2), ("mismatched", 2)}
        assert [r.value for r in grouped[("improved", 2)]] == [0.1]

    def test_explicit_quantity(self):
        rows = [row(0.0, 0.1, quantity="ber", iteration=1), row(0.0, 0.3, quantity="fer", iteration=1)]
        assert curves(rows, "fer")[("improved", 2)][0].value == 0.3

    def test_nothing_to_analyse(self):
        with pytest.raises(InvalidInputError):
            curves([])


class TestSnrGap:
    def test_gap_sign(self):
        rows = rate_curve("theoretical", 0.0) + rate_curve("mismatched", 5.0)
        assert snr_gap(rows, 4.0, "theoretical", "mismatched") == pytest.approx(5.0)
        assert snr_gap(rows, 4.0, "mismatched", "theoretical") == pytest.approx(-5.0)

    def test_missing_level(self):
        rows = rate_curve("theoretical", 0.0) + rate_curve("mismatched", 5.0)
        assert snr_gap(rows, 50.0, "theoretical", "mismatched") is None

    def test_unknown_curve(self):
        with pytest.raises(InvalidInputError):
            snr_gap(rate_curve("theoretical", 0.0), 4.0, "theoretical", "improved")

    def test_several_pilot_lengths_need_choice(self):
        rows = rate_curve("a", 0.0, 2) + rate_curve("b", 1.0, 2) + rate_curve("a", 0.0, 4) + rate_curve("b", 3.0, 4)
        with pytest.raises(InvalidInputError):
            snr_gap(rows, 2.0, "a", "b")
        assert snr_gap(rows, 2.0, "a", "b", pilot_length=4) == pytest.approx(3.0)

    def test_all_pairs(self):
        rows = rate_curve("improved", 2.0) + rate_curve("mismatched", 5.0) + rate_curve("theoretical", 0.0)
        gaps = {(ref, other): gap for _, ref, other, gap in all_gaps(rows, 4.0)}
        assert gaps == {
            ("improved", "mismatched"): pytest.approx(3.0),
            ("improved", "theoretical"): pytest.approx(-2.0),
            ("mismatched", "theoretical"): pytest.approx(-5.0),
        }
