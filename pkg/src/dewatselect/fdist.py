"""Self-contained F-distribution tail probabilities and quantiles.

Built on the regularized incomplete beta function evaluated by continued
fraction (modified Lentz), with a Lanczos log-gamma. No external statistics
dependency; accuracy is limited by the continued fraction's epsilon, around
1e-15 relative, which is far tighter than anything the ANOVA layer needs.
"""

from __future__ import annotations

import math

# Lanczos approximation, g = 7, 9 coefficients. Relative error of gamma is
# below 1e-13 over the positive reals with this published constant set.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_CF_EPS = 3e-16
_CF_FPMIN = 1e-300
_CF_MAX_ITER = 300


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if x <= 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    if x < 0.5:
        # Reflection; sin(pi x) > 0 on (0, 0.5).
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(acc)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, evaluated with the
    modified Lentz method."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_FPMIN:
        d = _CF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (log_gamma(a + b) - log_gamma(a) - log_gamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    # Evaluate on the side where the continued fraction converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_cdf(x: float, d1: float, d2: float) -> float:
    """P(F <= x) for an F distribution with (d1, d2) degrees of freedom."""
    _check_df(d1, d2)
    if x < 0:
        raise ValueError(f"F statistic must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    t = d1 * x / (d1 * x + d2)
    return reg_inc_beta(t, d1 / 2.0, d2 / 2.0)


def f_sf(x: float, d1: float, d2: float) -> float:
    """Upper tail P(F > x), computed on the complementary beta side so that
    tiny p-values keep full relative precision."""
    _check_df(d1, d2)
    if x < 0:
        raise ValueError(f"F statistic must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    t = d2 / (d2 + d1 * x)
    return reg_inc_beta(t, d2 / 2.0, d1 / 2.0)


def f_critical(alpha: float, d1: float, d2: float) -> float:
    """The x with upper-tail probability alpha: 1 - f_cdf(x) = alpha.
    Bracketing doubles upward, then bisection to 1e-10."""
    _check_df(d1, d2)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    hi = 1.0
    while f_sf(hi, d1, d2) > alpha:
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("failed to bracket the F quantile")
    lo = 0.0
    for _ in range(200):
        if hi - lo <= 1e-10:
            break
        mid = 0.5 * (lo + hi)
        if f_sf(mid, d1, d2) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_df(d1: float, d2: float) -> None:
    if d1 <= 0 or d2 <= 0:
        raise ValueError(f"degrees of freedom must be positive, got ({d1}, {d2})")
