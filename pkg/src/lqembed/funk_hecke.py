"""Funk-Hecke eigenvalues of the kernel |<x, xi>|^q on S^{n-1}.

Convolution with |<x, xi>|^q acts on degree-m harmonics as multiplication by

    lambda_m = pi^{n/2-1} Gamma(q+1) sin(pi (m-q)/2) Gamma((m-q)/2)
               / (2^{q-1} Gamma((m+n+q)/2))

for even m, and by 0 for odd m. The closed form is evaluated in log space;
when (m - q)/2 < 0 the product sin(pi z) Gamma(z) is replaced by
pi / Gamma(1 - z) so no gamma value at a negative argument is ever needed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import mpmath
import numpy as np

from .errors import AccuracyError, DomainError, ExcludedExponentError, HypothesisError
from .specfun import gamma_ln, zonal_polynomial
from .sphere import IntervalRule, surface_area

EVEN_GUARD = 1e-9


def check_exponent(q: float, guard: float = EVEN_GUARD) -> float:
    """Validate q > 0 away from the even integers 2, 4, 6, ..."""
    q = float(q)
    if not q > 0.0 or math.isinf(q):
        raise DomainError(f"exponent q must be positive and finite, got {q}")
    if distance_to_even(q) <= guard:
        raise ExcludedExponentError(
            f"q={q!r} is within {guard:g} of an even integer; the kernel |t|^q is then a "
            "polynomial and its eigenvalues vanish from some degree on"
        )
    return q


def distance_to_even(q: float) -> float:
    """Distance from q to the nearest even integer 2k, k >= 1."""
    k = max(1, round(q / 2.0))
    return abs(q - 2.0 * k)


def check_smoothness(n: int, q: float, r: int) -> None:
    if not 2 * r > n + q:
        raise HypothesisError(f"smoothness order r={r} violates 2r > n + q = {n + q:g}")


def auto_order(n: int, q_max: float) -> int:
    """Smallest integer r with 2r > n + q_max + 1."""
    return int(math.floor((n + q_max + 1.0) / 2.0)) + 1


def log_abs_lambda(n: int, m: int, q: float) -> tuple[float, float]:
    """(sign, log|lambda_m|) of the closed form for even m."""
    if m % 2:
        raise DomainError("log_abs_lambda is defined for even m only")
    z = 0.5 * (m - q)
    log_val = ((0.5 * n - 1.0) * math.log(math.pi) + gamma_ln(q + 1.0)
               - (q - 1.0) * math.log(2.0) - gamma_ln(0.5 * (m + n + q)))
    if z < 0.0:
        # sin(pi z) Gamma(z) = pi / Gamma(1 - z)
        return 1.0, log_val + math.log(math.pi) - gamma_ln(1.0 - z)
    # sin(pi (m - q)/2) for even m, without a large-argument sine
    sine = (-1.0) ** (m // 2 + 1) * math.sin(0.5 * math.pi * q)
    return math.copysign(1.0, sine), log_val + math.log(abs(sine)) + gamma_ln(z)


def lambda_closed(n: int, m: int, q: float) -> float:
    """Closed-form Funk-Hecke eigenvalue for f(t) = |t|^q; exactly 0 for odd m."""
    if n < 2 or m < 0:
        raise DomainError(f"need n >= 2 and m >= 0, got n={n}, m={m}")
    check_exponent(q)
    if m % 2:
        return 0.0
    sign, log_val = log_abs_lambda(n, m, q)
    return sign * math.exp(log_val)


def eigenvalues(n: int, q: float, max_degree: int) -> np.ndarray:
    """lambda_m for m = 0..max_degree."""
    return np.array([lambda_closed(n, m, q) for m in range(max_degree + 1)])


def c_constant(n: int, q: float) -> float:
    """c(q) = Gamma((n+q)/2) / (2 Gamma((q+1)/2) pi^{(n-1)/2}).

    It normalizes the uniform measure: c(q) int |<x, xi>|^q d xi = 1.
    """
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    log_c = gamma_ln(0.5 * (n + q)) - gamma_ln(0.5 * (q + 1.0)) - 0.5 * (n - 1) * math.log(math.pi)
    return 0.5 * math.exp(log_c)


# ---------------------------------------------------------------------------
# quadrature oracle


def _rodrigues_coefficients(n: int, m: int) -> list[int]:
    """Exact integer coefficients (ascending powers) of d^m/dt^m (1 - t^2)^{m + (n-3)/2}."""
    power = m + (n - 3) // 2
    coeffs = [0] * (2 * power - m + 1)
    for k in range(power + 1):
        deg = 2 * k
        if deg < m:
            continue
        coeffs[deg - m] = (-1) ** k * math.comb(power, k) * (math.factorial(deg) // math.factorial(deg - m))
    return coeffs


def _oracle_gegenbauer(n: int, m: int, q: float, rule: IntervalRule) -> float:
    values = zonal_polynomial(n, m, rule.nodes)
    if rule.abs_power is None:
        values = values * np.abs(rule.nodes) ** q
    elif rule.abs_power != q:
        raise DomainError(f"rule carries |t|^{rule.abs_power}, oracle asked for q={q}")
    omega_lower = surface_area(n - 1) if n > 2 else 2.0
    return omega_lower * math.fsum(rule.weights * values)


def _mp_zonal(n: int, m: int, t):
    """P_m(n; t) in mpmath arithmetic (Chebyshev T_m for n = 2)."""
    if n == 2:
        prev, cur = mpmath.mpf(1), t
        if m == 0:
            return prev
        for _ in range(1, m):
            prev, cur = cur, 2 * t * cur - prev
        return cur
    nu = mpmath.mpf(n - 2) / 2
    prev, cur = mpmath.mpf(1), 2 * nu * t
    if m == 0:
        return prev
    for k in range(2, m + 1):
        prev, cur = cur, (2 * (k + nu - 1) * t * cur - (k + 2 * nu - 2) * prev) / k
    return cur / mpmath.gegenbauer(m, nu, 1)


def lambda_oracle(n: int, m: int, q: float, rule: IntervalRule | None = None,
                  tol: float = 1e-14) -> float:
    """Funk-Hecke eigenvalue of |t|^q by direct quadrature, independent of the closed form.

    With no ``rule`` the integral is taken by tanh-sinh quadrature in extended-precision
    arithmetic (40 digits): for odd n the Rodrigues-type form

        (-1)^m pi^{(n-1)/2} / (2^{m-1} Gamma(m + (n-1)/2))
            * int |t|^q d^m/dt^m (1-t^2)^{m+(n-3)/2} dt

    with the derivative expanded in exact integers; for even n the Gegenbauer
    form omega_{n-1} int |t|^q P_m(n; t) (1-t^2)^{(n-3)/2} dt. Eigenvalues of
    high degree come out of heavy cancellation, which double precision rules
    cannot resolve to 1e-8. With a ``rule``, the Gegenbauer form is evaluated
    once on that double-precision rule.
    """
    if n < 2 or m < 0:
        raise DomainError(f"need n >= 2 and m >= 0, got n={n}, m={m}")
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    if rule is not None:
        if rule.weight_exponent != 0.5 * (n - 3):
            raise DomainError("rule weight does not match (1 - t^2)^{(n-3)/2}")
        return _oracle_gegenbauer(n, m, q, rule)
    if m % 2:
        return 0.0
    with mpmath.workdps(40):
        qq = mpmath.mpf(q)
        if n % 2:
            coeffs = _rodrigues_coefficients(n, m)

            def integrand(t):
                return t ** qq * mpmath.polyval(coeffs[::-1], t)

            pref = ((-1) ** m * mpmath.pi ** (mpmath.mpf(n - 1) / 2)
                    / (mpmath.mpf(2) ** (m - 1) * mpmath.gamma(m + mpmath.mpf(n - 1) / 2)))
        else:
            a = mpmath.mpf(n - 3) / 2

            def integrand(t):
                return t ** qq * _mp_zonal(n, m, t) * (1 - t * t) ** a

            pref = 2 * mpmath.pi ** (mpmath.mpf(n - 1) / 2) / mpmath.gamma(mpmath.mpf(n - 1) / 2)
        # even integrand: twice the integral over [0, 1]
        half, err = mpmath.quad(integrand, [0, 1], error=True)
        value = 2 * pref * half
        if abs(2 * pref * err) > tol * max(abs(value), mpmath.mpf(10) ** -30):
            raise AccuracyError(f"oracle for n={n}, m={m}, q={q} did not converge",
                                estimate=float(value))
        return float(value)


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class EigenvalueTable:
    n: int
    q: float
    values: dict = field(default_factory=dict)

    @property
    def max_degree(self) -> int:
        return max(self.values)


def eigenvalue_table(n: int, q: float, max_degree: int) -> EigenvalueTable:
    check_exponent(q)
    return EigenvalueTable(n, q, {m: lambda_closed(n, m, q) for m in range(max_degree + 1)})


def lambda_table_rows(n: int, q: float, max_degree: int) -> list[dict]:
    """Closed form against oracle for every even m <= max_degree."""
    check_exponent(q)
    rows = []
    for m in range(0, max_degree + 1, 2):
        closed = lambda_closed(n, m, q)
        oracle = lambda_oracle(n, m, q)
        rows.append({"n": n, "q": q, "m": m, "lambda_closed": closed, "lambda_oracle": oracle,
                     "rel_err": abs(closed - oracle) / abs(oracle)})
    return rows


def write_table_csv(handle, rows: list[dict]) -> None:
    writer = csv.DictWriter(handle, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})


def write_lambda_table(path, n: int, q: float, max_degree: int) -> list[dict]:
    """CSV with columns n, q, m, lambda_closed, lambda_oracle, rel_err over even m."""
    rows = lambda_table_rows(n, q, max_degree)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        write_table_csv(handle, rows)
    return rows


def decay_exponent_check(n: int, q: float, table: EigenvalueTable, m_min: int = 10) -> float:
    """Least-squares slope of log |lambda_m|^{-1} against log m over even m >= m_min.

    Compare with the asymptotic growth exponent (n + 2q) / 2.
    """
    ms = [m for m in sorted(table.values) if m % 2 == 0 and m >= m_min]
    if not ms or max(ms) < 40 or len(ms) < 3:
        raise DomainError("decay fit needs even degrees up to at least 40")
    x = np.log(np.array(ms, dtype=float))
    y = -np.log(np.abs(np.array([table.values[m] for m in ms])))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


# ---------------------------------------------------------------------------
# bound constants K(q), L(q)


class BoundConstants(NamedTuple):
    K: float
    L: float
    tail: float


def _log_dim(n: int, m: int) -> float:
    if n == 2:
        return math.log(2.0)
    return (math.log(2 * m + n - 2) + gamma_ln(m + n - 2.0) - gamma_ln(m + 1.0) - gamma_ln(n - 1.0))


def l_summand(n: int, q: float, r: int, m: int) -> float:
    """|lambda_m|^{-1} m^{-2r} (N(n, m) / omega_n)^{1/2} for even m >= 2."""
    _, log_lam = log_abs_lambda(n, m, q)
    log_s = -log_lam - 2 * r * math.log(m) + 0.5 * (_log_dim(n, m) - math.log(surface_area(n)))
    return math.exp(log_s)


def l_tail_bound(n: int, q: float, r: int, m_cap: int) -> float:
    """Upper bound on sum_{even m > m_cap} l_summand(n, q, r, m).

    Uses Gamma(x + a) / Gamma(x) <= (x + a)^a (Wendel) with a = (n + 2q)/2,
    N(n, m) <= (2m + n - 2)(m + n - 3)^{n-3} / (n - 2)!, and an integral
    comparison for the remaining power sum m^e, e = n + q - 1 - 2r < -1.
    """
    check_smoothness(n, q, r)
    m0 = m_cap + 2 if m_cap % 2 == 0 else m_cap + 1
    if m0 <= q:
        raise DomainError(f"tail bound needs m_cap beyond q={q}")
    a = 0.5 * (n + 2.0 * q)
    e = n + q - 1.0 - 2.0 * r
    omega = surface_area(n)
    log_a0 = ((q - 1.0) * math.log(2.0) - (0.5 * n - 1.0) * math.log(math.pi)
              - gamma_ln(q + 1.0) - math.log(abs(math.sin(0.5 * math.pi * q))))
    log_h = log_a0 + a * math.log(0.5 * (1.0 + (n + q) / m0))
    if n == 2:
        log_h += 0.5 * math.log(2.0 / omega)
    else:
        log_dim = (math.log(2.0 + (n - 2.0) / m0) + (n - 3) * math.log(1.0 + (n - 3.0) / m0)
                   - gamma_ln(n - 1.0))
        log_h += 0.5 * (log_dim - math.log(omega))
    power_sum = m0 ** e + m0 ** (e + 1.0) / (2.0 * (-1.0 - e))
    return math.exp(log_h) * power_sum


def bound_constants(n: int, q: float, r: int, m_cap: int = 512) -> BoundConstants:
    """K(q) = |lambda_0|^{-1} omega_n^{-1/2} and L(q) = sum_{even m >= 2} l_summand.

    L is the partial sum up to ``m_cap`` plus ``tail``, a rigorous bound on the
    remainder, so L over-estimates the true series.
    """
    check_exponent(q)
    check_smoothness(n, q, r)
    m_cap = max(int(m_cap), int(math.ceil(q)) + 2)
    m_cap += m_cap % 2
    omega = surface_area(n)
    k_const = 1.0 / (abs(lambda_closed(n, 0, q)) * math.sqrt(omega))
    partial = math.fsum(l_summand(n, q, r, m) for m in range(2, m_cap + 1, 2))
    tail = l_tail_bound(n, q, r, m_cap)
    return BoundConstants(k_const, partial + tail, tail)


def l_remainder(n: int, q: float, r: int, after: int, explicit: int = 256) -> float:
    """Upper bound on sum_{even m > after} l_summand(n, q, r, m).

    The first ``explicit`` even terms are summed directly, the rest bounded
    by ``l_tail_bound``.
    """
    check_smoothness(n, q, r)
    start = max(2, after + 1 + (after + 1) % 2)
    stop = max(start + 2 * explicit, int(math.ceil(q)) + 2)
    stop += stop % 2
    partial = math.fsum(l_summand(n, q, r, m) for m in range(start, stop + 1, 2))
    return partial + l_tail_bound(n, q, r, stop)
