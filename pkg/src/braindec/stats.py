"""Self-contained statistical kernel: Spearman correlation and t-tests.

Implements exactly the machinery the evaluation needs — fractional ranks,
Spearman's rank correlation with a t-approximated p-value, one-sample and
pooled independent two-sample t-tests — on top of a Student-t CDF computed
through the regularized incomplete beta function. No external statistics
library is used; tests cross-check every routine against an independent
reference implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

ONE_SIDED_GREATER = "one_sided_greater"
TWO_SIDED = "two_sided"

_BETACF_MAX_ITER = 300
_BETACF_EPS = 1e-14
_FPMIN = 1e-300


class StatsError(ValueError):
    """A statistic is undefined for the given input (degenerate data, bad df)."""


@dataclass(frozen=True)
class TestResult:
    """Outcome of a statistical test: statistic (t or rho), p-value, df, sidedness."""

    statistic: float
    p_value: float
    df: float
    sidedness: str

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise StatsError(f"p-value {self.p_value} outside [0, 1]")
        if self.df <= 0:
            raise StatsError(f"degrees of freedom must be positive, got {self.df}")


def fractional_ranks(x: Sequence[float]) -> list[float]:
    """Ranks starting at 1; ties get the mean of the ranks they span.

    The output always sums to n(n+1)/2 exactly (tie means are midpoints of
    integer runs, hence representable).
    """
    n = len(x)
    if n < 1:
        raise StatsError("cannot rank an empty vector")
    order = sorted(range(n), key=lambda i: x[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise StatsError(
        f"incomplete beta continued fraction did not converge within "
        f"{_BETACF_MAX_ITER} iterations (a={a}, b={b}, x={x})"
    )


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if a <= 0 or b <= 0:
        raise StatsError(f"incomplete beta requires positive parameters, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the continued fraction on the side where it converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: float) -> float:
    """Student-t CDF, F(t; df), via I_x(df/2, 1/2) with x = df/(df + t^2)."""
    if df <= 0:
        raise StatsError(f"degrees of freedom must be positive, got {df}")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def _p_from_t(t: float, df: float, sidedness: str) -> float:
    if sidedness == ONE_SIDED_GREATER:
        return 1.0 - t_cdf(t, df)
    if sidedness == TWO_SIDED:
        return 2.0 * (1.0 - t_cdf(abs(t), df))
    raise StatsError(f"unknown sidedness {sidedness!r}")


def spearman(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Spearman rank correlation with a two-sided t-approximated p-value.

    rho is the Pearson correlation of the fractional ranks; the p-value uses
    t = rho * sqrt((n - 2) / (1 - rho^2)) with df = n - 2. rho = +-1 gives
    p = 0 exactly.
    """
    n = len(x)
    if len(y) != n:
        raise StatsError(f"length mismatch: {n} vs {len(y)}")
    if n < 4:
        raise StatsError(f"need at least 4 observations, got {n}")
    if min(x) == max(x):
        raise StatsError("undefined correlation: first vector is constant")
    if min(y) == max(y):
        raise StatsError("undefined correlation: second vector is constant")

    rx = fractional_ranks(x)
    ry = fractional_ranks(y)
    df = float(n - 2)
    # Identical or exactly reversed rankings short-circuit to +-1 so the
    # degenerate p = 0 cases are exact rather than within rounding.
    if rx == ry:
        return TestResult(1.0, 0.0, df, TWO_SIDED)
    if all(a + b == n + 1 for a, b in zip(rx, ry)):
        return TestResult(-1.0, 0.0, df, TWO_SIDED)

    mx = sum(rx) / n
    my = sum(ry) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    sxx = sum((a - mx) ** 2 for a in rx)
    syy = sum((b - my) ** 2 for b in ry)
    rho = sxy / math.sqrt(sxx * syy)
    rho = max(-1.0, min(1.0, rho))
    denom = 1.0 - rho * rho
    if denom <= 0.0:
        return TestResult(rho, 0.0, df, TWO_SIDED)
    t = rho * math.sqrt(df / denom)
    return TestResult(rho, _p_from_t(t, df, TWO_SIDED), df, TWO_SIDED)


def one_sample_t(x: Sequence[float], mu0: float, sidedness: str = ONE_SIDED_GREATER) -> TestResult:
    """One-sample t-test of mean(x) against mu0 with df = n - 1."""
    n = len(x)
    if n < 2:
        raise StatsError(f"need at least 2 observations, got {n}")
    mean = sum(x) / n
    ss = sum((v - mean) ** 2 for v in x)
    if ss == 0.0:
        raise StatsError("zero variance: t statistic undefined")
    sd = math.sqrt(ss / (n - 1))
    t = (mean - mu0) / (sd / math.sqrt(n))
    df = float(n - 1)
    return TestResult(t, _p_from_t(t, df, sidedness), df, sidedness)


def two_sample_t_summary(
    m1: float, sem1: float, n1: int, m2: float, sem2: float, n2: int
) -> TestResult:
    """Pooled independent two-sample t-test from summary statistics.

    Pooling (rather than Welch) gives df = n1 + n2 - 2. Sample variances are
    recovered from the standard errors as s_i^2 = n_i * sem_i^2.
    """
    if n1 < 2 or n2 < 2:
        raise StatsError(f"need at least 2 observations per group, got {n1} and {n2}")
    if sem1 <= 0 or sem2 <= 0:
        raise StatsError(f"standard errors must be positive, got {sem1} and {sem2}")
    var1 = n1 * sem1 * sem1
    var2 = n2 * sem2 * sem2
    df = float(n1 + n2 - 2)
    pooled = ((n1 - 1) * var1 + (n2 - 1) * var2) / df
    t = (m1 - m2) / math.sqrt(pooled * (1.0 / n1 + 1.0 / n2))
    return TestResult(t, _p_from_t(abs(t), df, TWO_SIDED), df, TWO_SIDED)
