"""
Special functions for the rate expressions.

Γ(0, t) is the exponential integral E1(t). Upper incomplete gamma functions of
negative integer order follow the closed form

    Γ(-n, t) = ((-1)^n / n!) [Γ(0, t) - e^{-t} Σ_{i<n} (-1)^i i! / t^{i+1}]

and λ_n(t) = t^n e^t Γ(-n, t). For large t the product e^t Γ(-n, t) is
evaluated with the Lentz continued fraction of Γ(a, x), which carries the
factor e^{-x} x^a outside the fraction and therefore never overflows.
"""

import math
import sys

from scipy import integrate, special

from utils.constants import CF_ACCURACY, CF_MAX_ITERATIONS, LARGE_T_THRESHOLD
from utils.exceptions import DomainError

_FPMIN = sys.float_info.min / sys.float_info.epsilon


def _require_positive(t: float, name: str = "t") -> float:
    t = float(t)
    if not t > 0.0 or not math.isfinite(t):
        raise DomainError(f"{name} must be positive and finite", context={name: t})
    return t


def _require_order(n: int) -> int:
    if int(n) != n or n < 0:
        raise DomainError("order n must be a nonnegative integer", context={"n": n})
    return int(n)


def exp_integral_gamma0(t: float) -> float:
    """Γ(0, t) = ∫_t^∞ e^{-u}/u du."""
    t = _require_positive(t)
    return float(special.exp1(t))


def upper_gamma_neg(n: int, t: float) -> float:
    n = _require_order(n)
    t = _require_positive(t)
    tail = sum((-1) ** i * math.factorial(i) / t ** (i + 1) for i in range(n))
    bracket = exp_integral_gamma0(t) - math.exp(-t) * tail
    return (-1) ** n / math.factorial(n) * bracket


def _scaled_upper_gamma_cf(a: float, x: float) -> float:
    """h such that Γ(a, x) = e^{-x} x^a h (modified Lentz)."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, CF_MAX_ITERATIONS + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_ACCURACY:
            return h
    raise DomainError("continued fraction did not converge", context={"a": a, "x": x})


def lambda_coefficient(n: int, t: float) -> float:
    """λ_n(t) = t^n e^t Γ(-n, t); continued fraction above the large-t threshold."""
    n = _require_order(n)
    t = _require_positive(t)
    if t > LARGE_T_THRESHOLD:
        return _scaled_upper_gamma_cf(-float(n), t)
    return t ** n * math.exp(t) * upper_gamma_neg(n, t)


def decay_moment(t: float, order: int, exponent: int) -> float:
    """
    ∫_0^∞ s^order e^{-s} (1 + s/t)^{-exponent} ds, all terms positive.

    Used where differences of λ values would cancel catastrophically.
    """
    t = _require_positive(t)

    def integrand(s: float) -> float:
        return s ** order * math.exp(-s - exponent * math.log1p(s / t))

    split = min(t, 1.0)
    head, _ = integrate.quad(integrand, 0.0, split, epsabs=0.0, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(integrand, split, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return head + tail


__all__ = [
    "decay_moment",
    "exp_integral_gamma0",
    "lambda_coefficient",
    "upper_gamma_neg",
]
