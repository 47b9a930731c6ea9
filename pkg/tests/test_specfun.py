import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg
from scipy.special import eval_gegenbauer, roots_gegenbauer

from lqembed.errors import DomainError, RangeError
from lqembed.specfun import (
    gamma_ln,
    gamma_ratio,
    gegenbauer_at_one,
    gegenbauer_eval,
    legendre_eval,
    zonal_polynomial,
)


@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (0.5, 0.5723649429247001), (5.0, math.log(24.0))])
def test_gamma_ln_examples(x, expected):
    assert gamma_ln(x) == pytest.approx(expected, abs=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("inf")])
def test_gamma_ln_rejects(x):
    with pytest.raises(DomainError):
        gamma_ln(x)


def test_gamma_ln_against_mpmath():
    xs = np.geomspace(1e-3, 1e3, 200)
    for x in xs:
        ref = float(mpmath.loggamma(mpmath.mpf(float(x))))
        assert abs(gamma_ln(x) - ref) <= 1e-13 * max(1.0, abs(ref))


@pytest.mark.parametrize("a, b, expected", [(5, 4, 4.0), (1, 1, 1.0), (2.5, 0.5, 0.75)])
def test_gamma_ratio_examples(a, b, expected):
    assert gamma_ratio(a, b) == pytest.approx(expected, rel=1e-12)


def test_gamma_ratio_overflow():
    with pytest.raises(RangeError):
        gamma_ratio(400.0, 1.0)


@given(st.floats(0.1, 100.0))
def test_gamma_recurrence(x):
    assert abs(gamma_ln(x + 1) - gamma_ln(x) - math.log(x)) <= 1e-12 * max(1.0, gamma_ln(x + 1))


@given(st.floats(0.25, 20.0))
def test_duplication_identity(x):
    lhs = gamma_ln(2 * x)
    rhs = (2 * x - 1) * math.log(2) + gamma_ln(x) + gamma_ln(x + 0.5) - 0.5 * math.log(math.pi)
    assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))


@given(st.floats(1e-3, 1 - 1e-3))
def test_reflection_identity(x):
    lhs = math.exp(gamma_ln(1 - x) + gamma_ln(x))
    rhs = math.pi / math.sin(math.pi * x)
    assert lhs == pytest.approx(rhs, rel=1e-11)


@pytest.mark.parametrize("nu, m, t, expected", [(0.5, 0, 0.3, 1.0), (0.5, 1, 0.3, 0.3), (0.5, 2, 1.0, 1.0)])
def test_gegenbauer_examples(nu, m, t, expected):
    assert gegenbauer_eval(nu, m, t) == pytest.approx(expected, abs=1e-15)


def test_gegenbauer_half_is_legendre():
    t = np.linspace(-1, 1, 101)
    for m in range(51):
        ref = npleg.legval(t, [0] * m + [1])
        assert np.max(np.abs(gegenbauer_eval(0.5, m, t) - ref)) <= 1e-12
        assert np.max(np.abs(legendre_eval(m, t) - ref)) <= 1e-12


@given(st.floats(-0.45, 6.0), st.integers(0, 30), st.floats(-1.0, 1.0))
def test_gegenbauer_against_scipy(nu, m, t):
    ref = eval_gegenbauer(m, nu, t)
    scale = max(1.0, abs(eval_gegenbauer(m, nu, 1.0)))
    assert gegenbauer_eval(nu, m, t) == pytest.approx(ref, rel=1e-10, abs=1e-10 * scale)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5])
def test_gegenbauer_orthogonality(nu):
    # Gauss-Gegenbauer nodes carry the weight (1 - t^2)^(nu - 1/2) exactly
    t, w = roots_gegenbauer(40, nu)
    weight = 1.0
    vals = [gegenbauer_eval(nu, m, t) for m in range(21)]
    for m in range(21):
        for k in range(m):
            assert abs(np.sum(w * weight * vals[m] * vals[k])) <= 1e-9


def test_gegenbauer_domain():
    with pytest.raises(DomainError):
        gegenbauer_eval(-0.6, 2, 0.1)
    with pytest.raises(DomainError):
        gegenbauer_eval(0.5, 2, 1.5)


def test_gegenbauer_at_one_closed_form():
    for nu in (0.5, 1.0, 2.5):
        for m in range(10):
            assert gegenbauer_at_one(nu, m) == pytest.approx(gegenbauer_eval(nu, m, 1.0), rel=1e-13)


def test_zonal_polynomial_normalised():
    for n in (2, 3, 4, 7):
        for m in range(12):
            assert zonal_polynomial(n, m, 1.0) == pytest.approx(1.0, abs=1e-13)
    t = np.linspace(-1, 1, 9)
    assert np.allclose(zonal_polynomial(2, 5, t), np.cos(5 * np.arccos(t)), atol=1e-13)


def test_scalar_returns_float():
    assert isinstance(gegenbauer_eval(1.0, 3, 0.2), float)
