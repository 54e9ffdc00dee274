"""Perplexity-based performance gating and the alignment reward.

Per-language validation perplexity is a strong linear predictor of
glossing error, so a deployment can fit that line once and route each
language either to the model or to a fallback glosser depending on its
expected error rate. The alignment score doubles as a scalar reward for
reinforcement learning on outputs that carry both a segmentation and a
gloss line.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .formats import TaskFormat, decode_concatenated, decode_interleaved
from .metrics import alignment_score


@dataclass(frozen=True)
class RegressionFit:
    """Ordinary least squares line with its coefficient of determination."""

    slope: float
    intercept: float
    r2: float
    n: int

    def expected_error(self, perplexity: float) -> float:
        return self.slope * perplexity + self.intercept

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "n": self.n,
        }


class GateDecision(Enum):
    PREDICT = "predict"
    FALLBACK = "fallback"


def fit(points: Iterable[tuple[float, float]]) -> RegressionFit:
    """Least squares fit of error rate on perplexity.

    Needs at least two points with at least two distinct x values. When
    all y values coincide the fit is degenerate but exact, so r2 is 1.
    """
    pairs = list(points)
    n = len(pairs)
    if n < 2:
        raise ValueError("regression needs at least 2 points")
    xs = [float(x) for x, _ in pairs]
    ys = [float(y) for _, y in pairs]
    if len(set(xs)) < 2:
        raise ValueError("regression needs at least 2 distinct x values")
    x_mean = sum(xs) / n
    y_mean = sum(ys) / n
    sxx = sum((x - x_mean) ** 2 for x in xs)
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - y_mean) ** 2 for y in ys)
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    # Guard against floating point wobble just outside [0, 1].
    r2 = min(1.0, max(0.0, r2))
    return RegressionFit(slope=slope, intercept=intercept, r2=r2, n=n)


def gate(fitted: RegressionFit, perplexity: float, threshold: float) -> GateDecision:
    """Route to the model only when its expected error beats the threshold.

    The comparison is strict: an expected error exactly at the threshold
    falls back.
    """
    if fitted.expected_error(perplexity) < threshold:
        return GateDecision.PREDICT
    return GateDecision.FALLBACK


def reward(model_output: str, fmt: TaskFormat) -> float:
    """Alignment score of a raw model output, as a scalar reward in [0, 1].

    The output is decoded with the matching lenient codec; anything that
    fails to yield both a gloss line and a segmentation line scores 0,
    penalizing format violations outright.
    """
    if fmt is TaskFormat.CONCATENATED:
        decoded = decode_concatenated(model_output)
    elif fmt is TaskFormat.INTERLEAVED:
        decoded = decode_interleaved(model_output)
    else:
        raise ValueError(f"reward is undefined for format {fmt.value!r}")
    if not decoded.glosses or not decoded.segmentation:
        return 0.0
    return alignment_score(decoded.glosses, decoded.segmentation)
