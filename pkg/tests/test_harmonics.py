import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import comb, gamma, sph_harm_y

from lqembed.errors import DomainError, ParityError, ResolutionError, UnsupportedDimensionError
from lqembed.harmonics import (
    HarmonicCoefficients,
    addition_theorem_sum,
    basis_eval,
    basis_matrix,
    constant,
    dim_harmonics,
    evaluate,
    expand,
    expand_zonal,
    l2_norm,
    laplace_beltrami_apply,
    total_dim,
    zonal_axis,
)
from lqembed.sphere import build_grid

from conftest import unit_points


@pytest.mark.parametrize("n, m, expected", [(3, 0, 1), (3, 2, 5), (4, 2, 9), (2, 0, 1), (2, 7, 2)])
def test_dim_examples(n, m, expected):
    assert dim_harmonics(n, m) == expected


@given(st.integers(3, 9), st.integers(1, 30))
def test_dim_matches_gamma_formula(n, m):
    ref = (2 * m + n - 2) * gamma(n + m - 2) / (gamma(m + 1) * gamma(n - 1))
    assert dim_harmonics(n, m) == pytest.approx(ref, rel=1e-12)


@given(st.integers(2, 7), st.integers(0, 20))
def test_dim_counts_polynomials(n, M):
    # harmonics of degree <= M span the restrictions of polynomials of degree <= M
    assert total_dim(n, M) == comb(M + n - 1, n - 1, exact=True) + comb(M + n - 2, n - 1, exact=True)


def test_basis_examples(rng):
    x = unit_points(rng, 3, 1)[0]
    assert basis_eval(3, 0, 1, x) == pytest.approx(1 / math.sqrt(4 * math.pi), abs=1e-15)
    assert basis_eval(2, 1, 1, [1.0, 0.0]) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-15)
    e3 = np.array([0.0, 0.0, 1.0])
    values = [basis_eval(3, 1, j, e3) for j in (1, 2, 3)]
    assert values[0] == pytest.approx(math.sqrt(3 / (4 * math.pi)), abs=1e-15)
    assert values[1] == pytest.approx(0.0, abs=1e-15) and values[2] == pytest.approx(0.0, abs=1e-15)


def test_sphere2_basis_against_scipy(rng):
    pts = unit_points(rng, 3, 25)
    theta = np.arccos(pts[:, 2])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    M = 12
    table = basis_matrix(3, M, pts)
    for m in range(M + 1):
        for k in range(m + 1):
            ref = sph_harm_y(m, k, theta, phi)
            if k == 0:
                got = table[m * m]
                assert np.allclose(got, ref.real, atol=1e-12)
            else:
                sign = (-1) ** k
                assert np.allclose(table[m * m + 2 * k - 1], sign * math.sqrt(2) * ref.real, atol=1e-12)
                assert np.allclose(table[m * m + 2 * k], sign * math.sqrt(2) * ref.imag, atol=1e-12)


def test_circle_basis(rng):
    th = rng.uniform(0, 2 * math.pi, 20)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    table = basis_matrix(2, 6, pts)
    assert np.allclose(table[0], 1 / math.sqrt(2 * math.pi))
    for m in range(1, 7):
        assert np.allclose(table[2 * m - 1], np.cos(m * th) / math.sqrt(math.pi), atol=1e-13)
        assert np.allclose(table[2 * m], np.sin(m * th) / math.sqrt(math.pi), atol=1e-13)


def test_basis_unsupported():
    with pytest.raises(UnsupportedDimensionError):
        basis_eval(4, 2, 3, [0, 0, 0, 1.0])
    with pytest.raises(DomainError):
        basis_eval(3, 2, 6, [0, 0, 1.0])


@pytest.mark.parametrize("n, M", [(2, 30), (3, 20)])
def test_gram_matrix_is_identity(n, M):
    g = build_grid(n, 2 * M)
    table = basis_matrix(n, M, g.nodes)
    gram = (table * g.weights) @ table.T
    assert np.max(np.abs(gram - np.eye(gram.shape[0]))) <= 1e-9


def test_addition_theorem_examples(rng):
    x = unit_points(rng, 3, 1)[0]
    assert addition_theorem_sum(3, 2, x) == pytest.approx(5 / (4 * math.pi), abs=1e-12)
    assert addition_theorem_sum(3, 0, x) == pytest.approx(1 / (4 * math.pi), abs=1e-12)
    assert addition_theorem_sum(2, 3, [0.6, 0.8]) == pytest.approx(1 / math.pi, abs=1e-12)


@given(st.integers(2, 3), st.integers(0, 40), st.integers(0, 2 ** 32 - 1))
def test_addition_theorem_property(n, m, seed):
    x = unit_points(np.random.default_rng(seed), n, 1)[0]
    omega = 2 * math.pi if n == 2 else 4 * math.pi
    assert addition_theorem_sum(n, m, x) == pytest.approx(dim_harmonics(n, m) / omega, abs=1e-9)


def test_expand_examples():
    g = build_grid(3, 16)
    one = expand(lambda p: np.ones(len(p)), g, 8)
    assert one[0, 1] == pytest.approx(math.sqrt(4 * math.pi), abs=1e-12)
    assert np.max(np.abs(one.values[1:])) <= 1e-10
    assert one.even
    y42 = expand(lambda p: basis_matrix(3, 4, p)[16 + 1], g, 8)
    assert y42[4, 2] == pytest.approx(1.0, abs=1e-10)
    rest = y42.values.copy()
    rest[16 + 1] = 0
    assert np.max(np.abs(rest)) <= 1e-10


def test_expand_x3_squared(rng):
    g = build_grid(3, 16)
    c = expand(lambda p: p[:, 2] ** 2, g, 8)
    assert set(m for m, _ in c.entries()) == {0, 2}
    # x3^2 = 1/3 + (2/3) P_2(x3)
    assert c[0, 1] == pytest.approx(math.sqrt(4 * math.pi) / 3, abs=1e-12)
    assert c[2, 1] == pytest.approx((2 / 3) * math.sqrt(4 * math.pi / 5), abs=1e-12)
    pts = unit_points(rng, 3, 50)
    assert np.max(np.abs(evaluate(c, pts) - pts[:, 2] ** 2)) <= 1e-10
    assert l2_norm(c) == pytest.approx(math.sqrt(4 * math.pi / 5), abs=1e-9)


def test_expand_resolution_and_parity():
    g = build_grid(3, 10)
    with pytest.raises(ResolutionError):
        expand(lambda p: p[:, 0], g, 6)
    with pytest.raises(ParityError):
        expand(lambda p: p[:, 0], g, 4, even=True)
    odd = expand(lambda p: p[:, 0], g, 4)
    assert not odd.even


def _random_coefficients(rng, n, M, even=False):
    c = rng.standard_normal(total_dim(n, M))
    coeffs = HarmonicCoefficients(n, M, c)
    if even:
        coeffs = coeffs.with_values(np.where(coeffs.degrees % 2 == 0, c, 0.0), even=True)
    return coeffs


@given(st.integers(2, 3), st.integers(0, 10), st.integers(0, 2 ** 32 - 1))
def test_expand_evaluate_round_trip(n, M, seed):
    rng = np.random.default_rng(seed)
    c = _random_coefficients(rng, n, M)
    g = build_grid(n, max(2 * M, 4))
    back = expand(lambda p: evaluate(c, p), g, M, even=False)
    assert np.max(np.abs(back.values - c.values)) <= 1e-10
    pts = unit_points(rng, n, 10)
    assert np.max(np.abs(evaluate(back, pts) - evaluate(c, pts))) <= 1e-8


@given(st.integers(0, 2 ** 32 - 1))
def test_even_functions_have_no_odd_content(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((3, 3))
    g = build_grid(3, 24)
    c = expand(lambda p: np.einsum("ki,ij,kj->k", p, a, p) ** 2 + 3.0, g, 12)
    assert c.even
    assert np.all(c.values[c.degrees % 2 == 1] == 0.0)


def test_zonal_expansion_any_dimension(rng):
    for n in (2, 3, 4, 5, 7):
        c = expand_zonal(lambda t: t ** 2, n, 6)
        assert all(abs(v) <= 1e-12 for (m, _), v in c.entries().items() if m > 2)
        pts = unit_points(rng, n, 20)
        t = pts @ zonal_axis(n)
        assert np.max(np.abs(evaluate(c, pts) - t ** 2)) <= 1e-12


def test_evaluate_rejects_non_zonal_high_dim():
    c = HarmonicCoefficients.from_entries(4, 2, {(2, 3): 1.0})
    with pytest.raises(UnsupportedDimensionError):
        evaluate(c, [0, 0, 0, 1.0])


@pytest.mark.parametrize("n, m, r, factor", [(3, 0, 1, 0.0), (3, 1, 1, -2.0), (3, 2, 2, 36.0), (2, 3, 1, -9.0)])
def test_laplace_beltrami_examples(n, m, r, factor):
    c = HarmonicCoefficients.from_entries(n, m, {(m, 1): 1.0})
    assert laplace_beltrami_apply(c, r)[m, 1] == factor


def test_laplace_beltrami_matches_differentiation():
    # Delta of x3^2 on S^2 is 2 - 6 x3^2 (extrinsic formula for a quadratic)
    g = build_grid(3, 12)
    c = expand(lambda p: p[:, 2] ** 2, g, 6)
    d = laplace_beltrami_apply(c, 1)
    pts = g.nodes[:30]
    assert np.allclose(evaluate(d, pts), 2 - 6 * pts[:, 2] ** 2, atol=1e-12)


@given(st.integers(2, 3), st.integers(0, 12), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_laplace_beltrami_self_adjoint(n, M, r, seed):
    rng = np.random.default_rng(seed)
    G, H = _random_coefficients(rng, n, M), _random_coefficients(rng, n, M)
    lhs = np.dot(laplace_beltrami_apply(G, r).values, H.values)
    rhs = np.dot(G.values, laplace_beltrami_apply(H, r).values)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-12)


def test_l2_norm_examples():
    assert l2_norm(constant(3)) == pytest.approx(math.sqrt(4 * math.pi), rel=1e-15)
    assert l2_norm(HarmonicCoefficients.from_entries(3, 5, {(5, 7): 1.0})) == 1.0


@given(st.integers(2, 3), st.integers(0, 10), st.integers(0, 2 ** 32 - 1))
def test_parseval(n, M, seed):
    c = _random_coefficients(np.random.default_rng(seed), n, M)
    g = build_grid(n, max(2 * M, 4))
    quad = g.integrate(evaluate(c, g.nodes) ** 2)
    assert quad == pytest.approx(l2_norm(c) ** 2, rel=1e-8)


def test_coefficient_container(tmp_path):
    c = HarmonicCoefficients.from_entries(3, 4, {(0, 1): 2.0, (4, 9): -1.5, (2, 3): 0.25})
    assert c.even
    assert c.entries() == {(0, 1): 2.0, (2, 3): 0.25, (4, 9): -1.5}
    assert c[6, 1] == 0.0
    assert np.allclose(c.degree_norms(), [2.0, 0, 0.25, 0, 1.5])
    path = tmp_path / "c.csv"
    c.to_csv(path)
    assert path.read_text().splitlines()[0] == "# n=3,max_degree=4,even=true"
    back = HarmonicCoefficients.from_csv(path)
    assert np.array_equal(back.values, c.values) and back.even
    s = c + constant(3, 1.0)
    assert s[0, 1] == pytest.approx(2.0 + math.sqrt(4 * math.pi))
    assert (2 * c)[4, 9] == -3.0
    assert c.resized(2).max_degree == 2 and c.resized(8)[4, 9] == -1.5
    with pytest.raises(ParityError):
        HarmonicCoefficients.from_entries(3, 3, {(3, 1): 1.0}, even=True)
    with pytest.raises(DomainError):
        HarmonicCoefficients(3, 2, np.zeros(5))
    with pytest.raises(DomainError):
        HarmonicCoefficients.from_entries(3, 2, {(4, 1): 1.0})
    with pytest.raises(ValueError):
        c.values[0] = 1.0
