"""Scalar special functions: log-gamma, gamma ratios, Gegenbauer and Legendre
polynomials, and the normalized zonal polynomials of S^{n-1}.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, RangeError

# exp() overflows just above this
_LOG_MAX = 709.78


def gamma_ln(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"gamma_ln requires a finite positive argument, got {x!r}")
    return math.lgamma(x)


def gamma_ratio(a: float, b: float) -> float:
    """Gamma(a) / Gamma(b) evaluated in log space."""
    log_ratio = gamma_ln(a) - gamma_ln(b)
    if log_ratio > _LOG_MAX:
        raise RangeError(
            f"Gamma({a})/Gamma({b}) overflows: log ratio {log_ratio:.6g} exceeds {_LOG_MAX}"
        )
    return math.exp(log_ratio)


def gegenbauer_eval(nu: float, m: int, t):
    """Gegenbauer polynomial C_m^nu(t) by forward recurrence in the degree.

    Accepts scalar or array ``t``; the return type follows the input.
    """
    if nu <= -0.5:
        raise DomainError(f"Gegenbauer parameter must exceed -1/2, got {nu}")
    if m < 0:
        raise DomainError(f"degree must be non-negative, got {m}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > 1.0 + 1e-12):
        raise DomainError("Gegenbauer evaluation requires |t| <= 1")
    prev = np.ones_like(t_arr)
    if m == 0:
        return _like(prev, t)
    cur = 2.0 * nu * t_arr
    for k in range(2, m + 1):
        prev, cur = cur, (2.0 * (k + nu - 1.0) * t_arr * cur - (k + 2.0 * nu - 2.0) * prev) / k
    return _like(cur, t)


def legendre_eval(m: int, t):
    """Legendre polynomial P_m(t) by Bonnet's recurrence."""
    if m < 0:
        raise DomainError(f"degree must be non-negative, got {m}")
    t_arr = np.asarray(t, dtype=float)
    prev = np.ones_like(t_arr)
    if m == 0:
        return _like(prev, t)
    cur = t_arr.copy()
    for k in range(1, m):
        prev, cur = cur, ((2 * k + 1) * t_arr * cur - k * prev) / (k + 1)
    return _like(cur, t)


def zonal_polynomial(n: int, m: int, t):
    """Legendre polynomial of degree m in dimension n, normalized to 1 at t = 1.

    For n >= 3 this is C_m^{(n-2)/2}(t) / C_m^{(n-2)/2}(1); for n = 2 it is the
    Chebyshev polynomial T_m(t).
    """
    if n < 2:
        raise DomainError(f"dimension must be at least 2, got {n}")
    if n == 2:
        t_arr = np.asarray(t, dtype=float)
        prev = np.ones_like(t_arr)
        if m == 0:
            return _like(prev, t)
        cur = t_arr.copy()
        for _ in range(1, m):
            prev, cur = cur, 2.0 * t_arr * cur - prev
        return _like(cur, t)
    nu = 0.5 * (n - 2)
    return gegenbauer_eval(nu, m, t) / gegenbauer_at_one(nu, m)


def gegenbauer_at_one(nu: float, m: int) -> float:
    """C_m^nu(1) = Gamma(m + 2 nu) / (m! Gamma(2 nu)) for nu > 0."""
    if nu <= 0:
        raise DomainError("closed form for C_m^nu(1) needs nu > 0")
    return math.exp(gamma_ln(m + 2.0 * nu) - gamma_ln(m + 1.0) - gamma_ln(2.0 * nu))


def _like(value: np.ndarray, template):
    if np.ndim(template) == 0:
        return float(value)
    return value
