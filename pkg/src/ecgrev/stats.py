"""Welch's t-test with p-values from a continued-fraction regularized incomplete beta."""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple

import numpy as np

_FPMIN = 1e-300
_EPS = 1e-15
_MAXIT = 500


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXIT + 1):
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
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def t_sf(t: float, df: float) -> float:
    """Upper tail P(T > t) of Student's t with ``df`` degrees of freedom."""
    tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t * t))
    return tail if t > 0 else 1.0 - tail


class Alternative(str, Enum):
    GREATER = "greater"
    TWO_SIDED = "two-sided"


class TTestResult(NamedTuple):
    t: float
    p: float
    df: float


def welch_t_test(sample_a, sample_b, alternative: Alternative | str = Alternative.GREATER) -> TTestResult:
    """Welch's unequal-variance test. ``greater`` tests mean(a) > mean(b)."""
    alternative = Alternative(alternative)
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 observations")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    se2 = va + vb
    if se2 == 0:
        diff = a.mean() - b.mean()
        if diff == 0:
            raise ValueError("both samples are constant and equal")
        # constant but distinct samples: the difference is certain
        t = math.copysign(math.inf, diff)
        if alternative is Alternative.GREATER:
            return TTestResult(t, 0.0 if diff > 0 else 1.0, float(a.size + b.size - 2))
        return TTestResult(t, 0.0, float(a.size + b.size - 2))
    t = float((a.mean() - b.mean()) / math.sqrt(se2))
    df = float(se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1)))
    if alternative is Alternative.GREATER:
        p = t_sf(t, df)
    else:
        p = betainc(df / 2.0, 0.5, df / (df + t * t))
    return TTestResult(t, min(1.0, p), df)
