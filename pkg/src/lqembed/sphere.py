"""Quadrature on S^{n-1}: product grids for n in {2, 3} and weighted interval
rules for zonal integrals in any dimension.

Grids come in two flavours. The default grid is a polynomial-exact product
rule about the pole e_n (n = 3) or equispaced on the circle (n = 2). A
*kernel-aligned* grid is built around a chosen pole x and resolves the kink of
|<x, xi>|^q along the great sphere orthogonal to x: the polar coordinate is
split at t = 0 and graded with t = s^2 on each half, which turns t^q dt into
2 s^{2q+1} ds and restores fast convergence of the Gauss rule.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import DomainError, UnsupportedDimensionError
from .specfun import gamma_ln

GRID_CACHE_ENV = "LQEMBED_GRID_CACHE"


def surface_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n, 2 pi^{n/2} / Gamma(n/2)."""
    if n < 2:
        raise DomainError(f"surface_area requires n >= 2, got {n}")
    return 2.0 * math.pi ** (0.5 * n) / math.exp(gamma_ln(0.5 * n))


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Nodes and surface-measure weights on S^{n-1}.

    Instances are immutable and hash by identity, so they can key caches of
    basis tables.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    resolution: int
    pole: np.ndarray | None = None

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def integrate(self, values) -> float:
        """Quadrature sum of function values given at the nodes."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def integrate_func(self, func) -> float:
        return self.integrate(func(self.nodes))


def _gauss_unit(p: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = roots_legendre(p)
    return 0.5 * (x + 1.0), 0.5 * w


def _graded_unit(p: int):
    """Rule for int_0^1 g(u) du after u = s^2, clustered at u = 0."""
    s, w = _gauss_unit(p)
    return s * s, 2.0 * s * w


def _polar_rule(resolution: int, graded: bool):
    """Two-panel rule in the polar cosine t on [-1, 0] and [0, 1]."""
    if graded:
        u, w = _graded_unit(resolution + 1)
    else:
        u, w = _gauss_unit(resolution // 2 + 1)
    t = np.concatenate([-u[::-1], u])
    wt = np.concatenate([w[::-1], w])
    return t, wt


def _frame(pole: np.ndarray) -> np.ndarray:
    """Orthonormal basis whose last column is ``pole``."""
    n = pole.shape[0]
    if np.allclose(pole, np.eye(n)[-1], atol=0.0, rtol=0.0):
        return np.eye(n)
    # drop the axis most aligned with the pole so the seed matrix is well conditioned
    k = int(np.argmax(np.abs(pole)))
    seed = np.column_stack([pole, np.eye(n)[:, [i for i in range(n) if i != k]]])
    q, _ = np.linalg.qr(seed)
    return np.column_stack([q[:, 1:], pole])


def _unit(x) -> np.ndarray:
    v = np.asarray(x, dtype=float).ravel()
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise DomainError("pole must be a non-zero vector")
    return v / norm


def _circle_grid(resolution: int, pole: np.ndarray | None):
    if pole is None:
        k = 2 * (resolution // 2 + 1)
        theta = 2.0 * math.pi * np.arange(k) / k
        weights = np.full(k, 2.0 * math.pi / k)
    else:
        alpha = math.atan2(pole[1], pole[0])
        u, w = _graded_unit(resolution + 16)
        half = 0.5 * math.pi
        # four quarter arcs, each graded toward its end at the kink theta = +-pi/2
        theta = np.concatenate([
            -half + half * u,
            half - half * u,
            half + half * u,
            3.0 * half - half * u,
        ]) + alpha
        weights = np.tile(half * w, 4)
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    return nodes, weights


def _sphere2_grid(resolution: int, pole: np.ndarray | None):
    graded = pole is not None
    t, wt = _polar_rule(resolution, graded)
    k = 2 * (resolution // 2 + 1)
    phi = 2.0 * math.pi * np.arange(k) / k
    sin_theta = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    tt, pp = np.meshgrid(t, phi, indexing="ij")
    ss, _ = np.meshgrid(sin_theta, phi, indexing="ij")
    local = np.column_stack([
        (ss * np.cos(pp)).ravel(),
        (ss * np.sin(pp)).ravel(),
        tt.ravel(),
    ])
    weights = np.repeat(wt, k) * (2.0 * math.pi / k)
    frame = np.eye(3) if pole is None else _frame(pole)
    nodes = local @ frame.T
    return nodes, weights


def build_grid(n: int, resolution: int, kernel_pole=None) -> SphereGrid:
    """Quadrature grid on S^{n-1} for n in {2, 3}.

    Parameters
    ----------
    n : ambient dimension, 2 or 3.
    resolution : polynomial degree the default grid integrates exactly.
    kernel_pole : optional vector x. When given, the grid is aligned with the
        kink of |<x, xi>|^q and graded toward it; the n = 3 version keeps
        exactness for polynomials of degree <= resolution.
    """
    if n not in (2, 3):
        raise UnsupportedDimensionError(
            f"full sphere grids exist for n in {{2, 3}} only, got n={n}; "
            "use build_interval_rule for zonal integrals"
        )
    if resolution < 4:
        raise DomainError(f"resolution must be at least 4, got {resolution}")
    pole = None if kernel_pole is None else _unit(kernel_pole)
    if pole is not None and pole.shape[0] != n:
        raise DomainError(f"kernel pole has dimension {pole.shape[0]}, expected {n}")
    if n == 2:
        nodes, weights = _circle_grid(resolution, pole)
    else:
        nodes, weights = _sphere2_grid(resolution, pole)
    return SphereGrid(n=n, nodes=nodes, weights=weights, resolution=resolution, pole=pole)


# ---------------------------------------------------------------------------
# grid cache files


def save_grid(grid: SphereGrid, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"x{i + 1}" for i in range(grid.n)] + ["w"])
        for node, w in zip(grid.nodes, grid.weights):
            writer.writerow([repr(float(v)) for v in node] + [repr(float(w))])
    return path


def load_grid(path, resolution: int) -> SphereGrid:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader])
    n = len(header) - 1
    return SphereGrid(n=n, nodes=rows[:, :n].copy(), weights=rows[:, n].copy(), resolution=resolution)


def cached_grid(n: int, resolution: int, cache_dir=None) -> SphereGrid:
    """Default grid, read from / written to a CSV cache when a directory is set.

    The directory comes from ``cache_dir`` or the LQEMBED_GRID_CACHE variable.
    """
    cache_dir = cache_dir or os.environ.get(GRID_CACHE_ENV)
    if not cache_dir:
        return build_grid(n, resolution)
    path = Path(cache_dir) / f"sphere_n{n}_r{resolution}.csv"
    if path.exists():
        return load_grid(path, resolution)
    grid = build_grid(n, resolution)
    save_grid(grid, path)
    return grid


# ---------------------------------------------------------------------------
# interval rules


@dataclass(frozen=True)
class IntervalRule:
    """Gauss rule on [-1, 1] for the weight (1 - t^2)^weight_exponent.

    With ``abs_power`` set, the factor |t|^abs_power is folded into the
    weights, so ``integrate(g)`` returns int |t|^q g(t) (1 - t^2)^a dt.
    """

    nodes: np.ndarray
    weights: np.ndarray
    weight_exponent: float
    degree: int
    abs_power: float | None = None
    split: bool = False

    def integrate(self, func) -> float:
        return float(np.dot(self.weights, func(self.nodes)))


def _half_jacobi(points: int, a: float, beta: float):
    """Nodes on (0, 1) for int_0^1 g(t) (1 - t)^a t^beta dt."""
    x, w = roots_jacobi(points, a, beta)
    t = 0.5 * (x + 1.0)
    return t, w * 2.0 ** (-a - beta - 1.0)


def build_interval_rule(n: int, degree: int, abs_power: float | None = None,
                        split: bool = False) -> IntervalRule:
    """Gauss-Gegenbauer rule for the weight (1 - t^2)^{(n-3)/2} on [-1, 1].

    The plain rule is exact to ``degree``. With ``split`` (implied by
    ``abs_power``) the interval is cut at t = 0 and each half gets its own
    Gauss-Jacobi rule, so integrands with a kink at the origin converge fast.
    """
    if n < 2:
        raise DomainError(f"dimension must be at least 2, got {n}")
    if degree < 1:
        raise DomainError(f"degree must be at least 1, got {degree}")
    a = 0.5 * (n - 3)
    points = degree // 2 + 1
    if abs_power is None and not split:
        if a == 0.0:
            x, w = roots_legendre(points)
        else:
            x, w = roots_jacobi(points, a, a)
        return IntervalRule(nodes=x, weights=w, weight_exponent=a, degree=degree)
    if abs_power is not None and abs_power <= -1.0:
        raise DomainError(f"|t|^q is not integrable for q={abs_power}")
    beta = 0.0 if abs_power is None else float(abs_power)
    t, w = _half_jacobi(points, a, beta)
    w = w * (1.0 + t) ** a
    nodes = np.concatenate([-t[::-1], t])
    weights = np.concatenate([w[::-1], w])
    return IntervalRule(nodes=nodes, weights=weights, weight_exponent=a, degree=degree,
                        abs_power=abs_power, split=True)
