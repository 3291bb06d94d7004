"""Voltage classification and bisection for the pull-in threshold.

A voltage either lets the membrane settle to a steady profile or drives it
to touchdown in finite time.  :func:`classify` runs one simulation and maps
the outcome onto that dichotomy; :func:`bisect_lambda_star` brackets the
critical voltage by bisection on the verdict.

Runs that hit t_max without deciding come back Undetermined; bisection
retries them with doubled time horizons (up to a cap) and finally counts
them as convergent, which biases the reported bracket's upper end toward
the safe side (transients stretch out just below the threshold).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

from .integrate import (Converged, Quenched, SimConfig, TrajectorySample, run)

T_MAX_GROWTH_CAP = 8  # max factor by which a rerun may stretch t_max

logger = logging.getLogger(__name__)


class Verdict(Enum):
    CONVERGED = "converged"
    QUENCHED = "quenched"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class LambdaClassification:
    lam: float
    verdict: Verdict
    t_terminal: float
    evidence: TrajectorySample
    reason: str = ""


class InvalidBracket(ValueError):
    """Bisection endpoints do not straddle the threshold."""


def classify(lam: float, scenario: SimConfig) -> LambdaClassification:
    """Run the scenario at the given voltage and name the outcome."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    config = scenario.with_lambda(lam)
    try:
        outcome, samples, _ = run(config)
    except Exception as exc:  # simulation-level failure, not a verdict
        return LambdaClassification(
            lam, Verdict.UNDETERMINED, 0.0,
            TrajectorySample(0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
            reason=f"simulation error: {exc}")
    evidence = samples[-1]
    if isinstance(outcome, Converged):
        return LambdaClassification(lam, Verdict.CONVERGED,
                                    outcome.t_reached, evidence)
    if isinstance(outcome, Quenched):
        reason = "dt collapse" if outcome.by_dt_collapse else ""
        return LambdaClassification(lam, Verdict.QUENCHED,
                                    outcome.t_quench, evidence, reason)
    return LambdaClassification(lam, Verdict.UNDETERMINED, config.t_max,
                                evidence, reason="t_max reached")


def _classify_resolving(lam: float, scenario: SimConfig) -> LambdaClassification:
    """Classify, stretching t_max on Undetermined; final fallback: Converged."""
    factor = 1
    while True:
        cfg = scenario if factor == 1 else replace(
            scenario, t_max=scenario.t_max * factor)
        result = classify(lam, cfg)
        if result.verdict is not Verdict.UNDETERMINED:
            return result
        if factor >= T_MAX_GROWTH_CAP:
            return LambdaClassification(
                result.lam, Verdict.CONVERGED, result.t_terminal,
                result.evidence,
                reason=f"undetermined at {factor}x t_max; counted convergent")
        factor *= 2


def _check_monotone(conv_max: float, quench_min: float) -> None:
    if conv_max > quench_min:
        logger.warning(
            "verdict monotonicity violated: converged at %g above quenched at %g",
            conv_max, quench_min)


def bisect_lambda_star(scenario: SimConfig, lo: float, hi: float, tol: float,
                       jobs: int = 1,
                       on_iteration: Callable[[int, float, float, float, Verdict], None]
                       | None = None) -> tuple[float, float]:
    """Shrink [lo, hi] around the critical voltage until hi - lo <= tol.

    Requires classify(lo) convergent and classify(hi) quenching; raises
    InvalidBracket otherwise.  Returns the final (lo, hi).

    With jobs > 1 each round evaluates `jobs` equally spaced interior
    voltages concurrently, narrowing the bracket by a factor jobs + 1 per
    round.  Converged verdicts above quenched ones are logged as a
    monotonicity diagnostic, never raised.
    """
    if not (0 <= lo < hi):
        raise InvalidBracket(f"need 0 <= lo < hi, got ({lo}, {hi})")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    jobs = max(1, int(jobs))

    lo_check = _classify_resolving(lo, scenario)
    if lo_check.verdict is not Verdict.CONVERGED:
        raise InvalidBracket(
            f"lower endpoint {lo} classified {lo_check.verdict.value}")
    hi_check = classify(hi, scenario)
    if hi_check.verdict is not Verdict.QUENCHED:
        raise InvalidBracket(
            f"upper endpoint {hi} classified {hi_check.verdict.value}")

    conv_max, quench_min = lo, hi
    iteration = 0
    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        while hi - lo > tol:
            k = min(jobs, max(1, int(math.ceil((hi - lo) / tol)) - 1))
            mids = [lo + (hi - lo) * (i + 1) / (k + 1) for i in range(k)]
            if executor is not None and k > 1:
                verdicts = [r.verdict for r in executor.map(
                    _classify_resolving, mids, [scenario] * k)]
            else:
                verdicts = [_classify_resolving(m, scenario).verdict
                            for m in mids]
            new_lo, new_hi = lo, hi
            for m, v in zip(mids, verdicts):
                iteration += 1
                if on_iteration is not None:
                    on_iteration(iteration, lo, hi, m, v)
                if v is Verdict.QUENCHED:
                    quench_min = min(quench_min, m)
                    new_hi = min(new_hi, m)
                else:
                    conv_max = max(conv_max, m)
                    if m < new_hi:
                        new_lo = max(new_lo, m)
            _check_monotone(conv_max, quench_min)
            lo, hi = new_lo, new_hi
    finally:
        if executor is not None:
            executor.shutdown()
    return lo, hi


def expected_classify_calls(lo: float, hi: float, tol: float) -> int:
    """Bisection iterations needed to shrink (hi - lo) below tol."""
    if hi - lo <= tol:
        return 0
    return math.ceil(math.log2((hi - lo) / tol))
