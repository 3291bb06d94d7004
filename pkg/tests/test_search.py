"""Voltage classification and critical-voltage bisection tests."""

import math

import pytest

from memsim import (
    InvalidBracket,
    Verdict,
    bisect_lambda_star,
    classify,
    make_preset,
)


class TestClassify:
    def test_zero_voltage(self):
        cfg = make_preset("1d-unit", n=51, t_max=2.0)
        result = classify(0.0, cfg)
        assert result.verdict is Verdict.CONVERGED
        assert result.t_terminal < 1.0

    def test_supercritical(self):
        cfg = make_preset("1d-unit", n=101)
        result = classify(9.0, cfg)
        assert result.verdict is Verdict.QUENCHED
        assert 0 < result.t_terminal < 2.0
        assert result.evidence.max_u > 0.9

    def test_undetermined_near_threshold(self):
        # 8.54 quenches just after t=10; at the preset horizon this is
        # undetermined, and the resolver must settle it by stretching t_max
        cfg = make_preset("1d-unit")
        result = classify(8.54, cfg)
        assert result.verdict is Verdict.UNDETERMINED

    def test_rejects_negative_lambda(self):
        cfg = make_preset("1d-unit", n=51)
        with pytest.raises(ValueError):
            classify(-0.5, cfg)


class TestBisect:
    def test_invalid_bracket_converging_top(self):
        cfg = make_preset("1d-unit", n=51, t_max=2.0)
        with pytest.raises(InvalidBracket):
            bisect_lambda_star(cfg, 1.0, 2.0, 0.5)

    def test_invalid_bracket_quenching_bottom(self):
        cfg = make_preset("1d-unit", n=101)
        with pytest.raises(InvalidBracket):
            bisect_lambda_star(cfg, 9.0, 9.5, 0.25)

    def test_invalid_arguments(self):
        cfg = make_preset("1d-unit", n=51)
        with pytest.raises(InvalidBracket):
            bisect_lambda_star(cfg, 2.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            bisect_lambda_star(cfg, 1.0, 2.0, 0.0)

    def test_bracket_and_call_count(self):
        cfg = make_preset("1d-unit", n=101)
        calls = []
        lo, hi = bisect_lambda_star(
            cfg, 8.0, 9.0, 0.1,
            on_iteration=lambda i, lo, hi, mid, v: calls.append((mid, v)))
        assert hi - lo <= 0.1
        assert lo <= 8.54 <= hi + 0.1  # coarse-mesh threshold nearby
        # interval halves each iteration: at most ceil(log2(1/0.1)) midpoints
        assert len(calls) <= math.ceil(math.log2(1.0 / 0.1))

    def test_width_halves(self):
        cfg = make_preset("1d-unit", n=101)
        widths = []
        bisect_lambda_star(
            cfg, 8.0, 9.0, 0.2,
            on_iteration=lambda i, lo, hi, mid, v: widths.append(hi - lo))
        for a, b in zip(widths[:-1], widths[1:]):
            assert b == pytest.approx(a / 2.0)

    def test_parallel_batching_matches_serial(self):
        cfg = make_preset("1d-unit", n=101)
        lo1, hi1 = bisect_lambda_star(cfg, 8.0, 9.0, 0.25)
        lo2, hi2 = bisect_lambda_star(cfg, 8.0, 9.0, 0.25, jobs=2)
        # same threshold inside both intervals, tolerances met
        assert hi1 - lo1 <= 0.25 and hi2 - lo2 <= 0.25
        assert max(lo1, lo2) < min(hi1, hi2) + 0.25
