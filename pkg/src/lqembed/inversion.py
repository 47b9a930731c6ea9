"""Densities of Levy-type representations.

Given an even function H on the sphere, find b with

    H(x) = int |<x, xi>|^q b(xi) d xi.

By Funk-Hecke the kernel is diagonal on harmonics, so b has coefficients
(H, Y_mj) / lambda_m on even degrees. The uniform bound

    |b(x)| <= K(q) ||H|| + L(q) ||Delta^r H||

follows degree by degree from Cauchy-Schwarz and the addition theorem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, DomainError, ParityError
from .funk_hecke import (
    bound_constants,
    check_exponent,
    check_smoothness,
    eigenvalues,
    l_remainder,
)
from .harmonics import (
    HarmonicCoefficients,
    dim_harmonics,
    evaluate,
    l2_norm,
    laplace_beltrami_apply,
)
from .sphere import surface_area

# |lambda_m| below this cannot be inverted without overflow risk downstream
_LAMBDA_FLOOR = 1e-280


@dataclass(frozen=True)
class DensityResult:
    coefficients: HarmonicCoefficients
    q: float
    r: int
    M_used: int
    truncation_bound: float
    uniform_bound: float

    @property
    def n(self) -> int:
        return self.coefficients.n

    def __call__(self, points):
        return evaluate(self.coefficients, points)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "q": self.q,
            "r": self.r,
            "M_used": self.M_used,
            "truncation_bound": self.truncation_bound,
            "uniform_bound": self.uniform_bound,
            "coefficients": [[m, j, v] for (m, j), v in self.coefficients.entries().items()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DensityResult":
        coeffs = HarmonicCoefficients.from_entries(
            int(data["n"]), int(data["M_used"]),
            {(int(m), int(j)): float(v) for m, j, v in data["coefficients"]}, even=True)
        return cls(coeffs, float(data["q"]), int(data["r"]), int(data["M_used"]),
                   float(data["truncation_bound"]), float(data["uniform_bound"]))


def _require_even(c: HarmonicCoefficients, what: str) -> None:
    if not c.even:
        odd = c.values[c.degrees % 2 == 1]
        if np.any(odd != 0.0):
            raise ParityError(f"{what} must be an even function; odd-degree entries are present")


def _degree_factors(n: int, max_degree: int) -> np.ndarray:
    """sqrt(N(n, m) / omega_n) per degree: the addition-theorem sup of a unit-norm degree block."""
    omega = surface_area(n)
    return np.array([math.sqrt(dim_harmonics(n, m) / omega) for m in range(max_degree + 1)])


def uniform_bound(H: HarmonicCoefficients, q: float, r: int) -> float:
    """K(q) ||H|| + L(q) ||Delta^r H||, a bound on sup |b_H|."""
    check_smoothness(H.n, q, r)
    consts = bound_constants(H.n, q, r)
    return consts.K * l2_norm(H) + consts.L * l2_norm(laplace_beltrami_apply(H, r))


def invert(H: HarmonicCoefficients, q: float, r: int, M: int) -> DensityResult:
    """Density b_H with coefficients lambda_m^{-1} (H, Y_mj) for even m <= M.

    Content of H above degree M is discarded; ``truncation_bound`` bounds the
    sup-norm of the discarded part of b_H. Degrees (M, H.max_degree] are
    bounded exactly via the addition theorem, and the unresolved remainder
    beyond H.max_degree is estimated with the L(q) tail times ||Delta^r H_{>M}||.
    It is exactly 0 when H has no content above M.
    """
    check_exponent(q)
    check_smoothness(H.n, q, r)
    if M < 0 or M % 2:
        raise DomainError(f"truncation degree M must be even and non-negative, got {M}")
    _require_even(H, "H")
    n = H.n
    top = max(M, H.max_degree)
    lam = eigenvalues(n, q, top)
    even_deg = np.arange(0, M + 1, 2)
    if np.any(np.abs(lam[even_deg]) < _LAMBDA_FLOOR):
        bad = int(even_deg[np.argmax(np.abs(lam[even_deg]) < _LAMBDA_FLOOR)])
        raise ConditioningError(f"lambda_{bad} = {lam[bad]:.3e} is too small to invert (q={q})")

    head = H.resized(M)
    inv = np.zeros(M + 1)
    inv[even_deg] = 1.0 / lam[even_deg]
    b = head.with_values(head.values * inv[head.degrees], even=True)

    truncation = 0.0
    if H.max_degree > M:
        norms = H.degree_norms()
        factors = _degree_factors(n, H.max_degree)
        dropped = [m for m in range(M + 1, H.max_degree + 1) if m % 2 == 0]
        truncation = math.fsum(norms[m] * factors[m] / abs(lam[m]) for m in dropped)
        rest = H.with_values(np.where(H.degrees > M, H.values, 0.0))
        rest_norm = l2_norm(laplace_beltrami_apply(rest, r))
        if rest_norm > 0.0:
            truncation += l_remainder(n, q, r, H.max_degree) * rest_norm
    return DensityResult(b, float(q), int(r), int(M), truncation, uniform_bound(H, q, r))


def forward(b: HarmonicCoefficients, q: float) -> HarmonicCoefficients:
    """Funk-Hecke image int |<x, xi>|^q b(xi) d xi, coefficient-wise lambda_m b_mj."""
    check_exponent(q)
    _require_even(b, "density")
    lam = eigenvalues(b.n, q, b.max_degree)
    return b.with_values(b.values * lam[b.degrees], even=True)
