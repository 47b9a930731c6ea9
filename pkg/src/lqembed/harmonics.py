"""Real orthonormal spherical harmonics, expansion and synthesis on S^{n-1},
and the Laplace-Beltrami operator acting on coefficients.

Coefficients are stored as one flat array in a canonical order: degree m
occupies the slots ``offset(n, m) .. offset(n, m) + N(n, m) - 1`` and the order
index j runs from 1 to N(n, m). Within a degree,

* n = 2: j = 1 is cos(m theta), j = 2 is sin(m theta);
* n = 3: j = 1 is the zonal harmonic about e_3, j = 2k and j = 2k + 1 carry
  cos(k phi) and sin(k phi) of azimuthal order k;
* n >= 4: only the zonal slot j = 1 (about e_n) can be evaluated.

j = 1 is always the zonal harmonic sqrt(N(n, m) / omega_n) P_m(n; <x, e>)
about ``zonal_axis(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, ParityError, ResolutionError, UnsupportedDimensionError
from .sphere import SphereGrid, build_interval_rule, surface_area
from .specfun import zonal_polynomial

_CHUNK = 4096
# basis tables up to this many entries (~64 MB) are cached per grid
_CACHE_ENTRIES = 8_000_000
ZERO_THRESHOLD = 1e-14


def dim_harmonics(n: int, m: int) -> int:
    """Dimension N(n, m) of the space of degree-m spherical harmonics on S^{n-1}."""
    if n < 2 or m < 0:
        raise DomainError(f"dim_harmonics needs n >= 2 and m >= 0, got n={n}, m={m}")
    if m == 0:
        return 1
    if n == 2:
        return 2
    # (2m + n - 2) Gamma(n + m - 2) / (Gamma(m + 1) Gamma(n - 1)) in exact integers
    return (2 * m + n - 2) * math.factorial(n + m - 3) // (math.factorial(m) * math.factorial(n - 2))


@lru_cache(maxsize=None)
def _offsets(n: int, max_degree: int) -> tuple[int, ...]:
    out = [0]
    for m in range(max_degree + 1):
        out.append(out[-1] + dim_harmonics(n, m))
    return tuple(out)


def total_dim(n: int, max_degree: int) -> int:
    return _offsets(n, max_degree)[-1]


def flat_index(n: int, m: int, j: int) -> int:
    if not 1 <= j <= dim_harmonics(n, m):
        raise DomainError(f"order index j={j} out of range 1..{dim_harmonics(n, m)} for degree {m}")
    return _offsets(n, m)[m] + j - 1


@lru_cache(maxsize=None)
def degree_array(n: int, max_degree: int) -> np.ndarray:
    """Degree m of every flat slot."""
    offs = _offsets(n, max_degree)
    deg = np.repeat(np.arange(max_degree + 1), np.diff(offs))
    deg.setflags(write=False)
    return deg


def zonal_axis(n: int) -> np.ndarray:
    axis = np.zeros(n)
    axis[0 if n == 2 else n - 1] = 1.0
    return axis


@dataclass(frozen=True, eq=False)
class HarmonicCoefficients:
    """Finite expansion sum_{m <= max_degree} sum_j c_{mj} Y_{mj} on S^{n-1}."""

    n: int
    max_degree: int
    values: np.ndarray
    even: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (total_dim(self.n, self.max_degree),):
            raise DomainError(
                f"expected {total_dim(self.n, self.max_degree)} coefficients for "
                f"n={self.n}, max_degree={self.max_degree}, got shape {values.shape}"
            )
        if self.even and np.any(values[degree_array(self.n, self.max_degree) % 2 == 1] != 0.0):
            raise ParityError("coefficients flagged even carry odd-degree entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, n: int, max_degree: int, even: bool = False) -> "HarmonicCoefficients":
        return cls(n, max_degree, np.zeros(total_dim(n, max_degree)), even)

    @classmethod
    def from_entries(cls, n: int, max_degree: int, entries: dict, even: bool | None = None):
        values = np.zeros(total_dim(n, max_degree))
        for (m, j), v in entries.items():
            if m > max_degree:
                raise DomainError(f"degree {m} exceeds max_degree {max_degree}")
            values[flat_index(n, m, j)] = v
        if even is None:
            even = all(m % 2 == 0 or v == 0.0 for (m, _), v in entries.items())
        return cls(n, max_degree, values, even)

    @property
    def degrees(self) -> np.ndarray:
        return degree_array(self.n, self.max_degree)

    def __getitem__(self, key) -> float:
        m, j = key
        if m > self.max_degree:
            return 0.0
        return float(self.values[flat_index(self.n, m, j)])

    def entries(self) -> dict:
        """Non-zero entries as {(m, j): value}."""
        out = {}
        offs = _offsets(self.n, self.max_degree)
        for m in range(self.max_degree + 1):
            block = self.values[offs[m]:offs[m + 1]]
            for j in np.flatnonzero(block):
                out[(m, int(j) + 1)] = float(block[j])
        return out

    def block(self, m: int) -> np.ndarray:
        offs = _offsets(self.n, self.max_degree)
        return self.values[offs[m]:offs[m + 1]]

    def degree_norms(self) -> np.ndarray:
        """Euclidean norm of each degree block, length max_degree + 1."""
        offs = _offsets(self.n, self.max_degree)
        sq = np.add.reduceat(self.values ** 2, np.array(offs[:-1]))
        return np.sqrt(sq)

    def resized(self, max_degree: int) -> "HarmonicCoefficients":
        """Truncate or zero-pad to a new maximum degree."""
        size = total_dim(self.n, max_degree)
        values = np.zeros(size)
        keep = min(size, self.values.shape[0])
        values[:keep] = self.values[:keep]
        return HarmonicCoefficients(self.n, max_degree, values, self.even)

    def with_values(self, values, even: bool | None = None) -> "HarmonicCoefficients":
        return HarmonicCoefficients(self.n, self.max_degree, values, self.even if even is None else even)

    def _aligned(self, other: "HarmonicCoefficients"):
        if other.n != self.n:
            raise DomainError("cannot combine expansions on different spheres")
        top = max(self.max_degree, other.max_degree)
        return self.resized(top), other.resized(top)

    def __add__(self, other: "HarmonicCoefficients") -> "HarmonicCoefficients":
        a, b = self._aligned(other)
        return HarmonicCoefficients(self.n, a.max_degree, a.values + b.values, a.even and b.even)

    def __sub__(self, other: "HarmonicCoefficients") -> "HarmonicCoefficients":
        a, b = self._aligned(other)
        return HarmonicCoefficients(self.n, a.max_degree, a.values - b.values, a.even and b.even)

    def __mul__(self, scalar: float) -> "HarmonicCoefficients":
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def to_csv(self, path) -> None:
        lines = [f"# n={self.n},max_degree={self.max_degree},even={'true' if self.even else 'false'}",
                 "m,j,value"]
        for (m, j), v in self.entries().items():
            lines.append(f"{m},{j},{v:.17g}")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "HarmonicCoefficients":
        with open(path, encoding="utf-8") as handle:
            header = handle.readline().lstrip("#").strip()
            meta = dict(item.split("=") for item in header.split(","))
            handle.readline()
            entries = {}
            for line in handle:
                if line.strip():
                    m, j, v = line.split(",")
                    entries[(int(m), int(j))] = float(v)
        return cls.from_entries(int(meta["n"]), int(meta["max_degree"]), entries,
                                even=meta["even"] == "true")


def constant(n: int, value: float = 1.0, max_degree: int = 0) -> HarmonicCoefficients:
    """Expansion of the constant function ``value``."""
    return HarmonicCoefficients.from_entries(
        n, max_degree, {(0, 1): value * math.sqrt(surface_area(n))}, even=True)


# ---------------------------------------------------------------------------
# basis evaluation


def _normalized_legendre_columns(max_degree: int, t: np.ndarray, s: np.ndarray):
    """Yield (k, P) with P[m - k] the fully normalized associated Legendre
    function of degree m and order k, for m = k..max_degree.

    P_m^0 is itself the unit-norm zonal harmonic, and sqrt(2) P_m^k cos(k phi)
    has unit L2(S^2) norm.
    """
    diag = np.full_like(t, 1.0 / math.sqrt(4.0 * math.pi))
    for k in range(max_degree + 1):
        if k > 0:
            diag = math.sqrt((2 * k + 1) / (2 * k)) * s * diag
        col = np.empty((max_degree - k + 1,) + t.shape)
        col[0] = diag
        if k + 1 <= max_degree:
            col[1] = math.sqrt(2 * k + 3) * t * diag
        for m in range(k + 2, max_degree + 1):
            a = math.sqrt((4.0 * m * m - 1.0) / (m * m - k * k))
            b = math.sqrt(((m - 1.0) ** 2 - k * k) / (4.0 * (m - 1.0) ** 2 - 1.0))
            col[m - k] = a * (t * col[m - k - 1] - b * col[m - k - 2])
        yield k, col


def _basis_sphere2(max_degree: int, points: np.ndarray) -> np.ndarray:
    t = points[:, 2]
    s = np.hypot(points[:, 0], points[:, 1])
    phi = np.arctan2(points[:, 1], points[:, 0])
    out = np.empty((total_dim(3, max_degree), points.shape[0]))
    root2 = math.sqrt(2.0)
    for k, col in _normalized_legendre_columns(max_degree, t, s):
        if k == 0:
            for m in range(max_degree + 1):
                out[m * m] = col[m]
            continue
        c = root2 * np.cos(k * phi)
        sn = root2 * np.sin(k * phi)
        for m in range(k, max_degree + 1):
            out[m * m + 2 * k - 1] = col[m - k] * c
            out[m * m + 2 * k] = col[m - k] * sn
    return out


def _basis_circle(max_degree: int, points: np.ndarray) -> np.ndarray:
    theta = np.arctan2(points[:, 1], points[:, 0])
    out = np.empty((total_dim(2, max_degree), points.shape[0]))
    out[0] = 1.0 / math.sqrt(2.0 * math.pi)
    scale = 1.0 / math.sqrt(math.pi)
    for m in range(1, max_degree + 1):
        out[2 * m - 1] = scale * np.cos(m * theta)
        out[2 * m] = scale * np.sin(m * theta)
    return out


def basis_matrix(n: int, max_degree: int, points) -> np.ndarray:
    """All basis functions of degree <= max_degree at ``points`` (shape (k, n)).

    Returns an array of shape (total_dim, k) in canonical order.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if n == 2:
        return _basis_circle(max_degree, pts)
    if n == 3:
        return _basis_sphere2(max_degree, pts)
    raise UnsupportedDimensionError(f"full harmonic bases exist for n in {{2, 3}} only, got n={n}")


def _zonal_rows(n: int, max_degree: int, points: np.ndarray) -> np.ndarray:
    """Zonal harmonics about zonal_axis(n) for every degree, shape (M + 1, k)."""
    t = np.clip(points @ zonal_axis(n), -1.0, 1.0)
    omega = surface_area(n)
    return np.array([math.sqrt(dim_harmonics(n, m) / omega) * zonal_polynomial(n, m, t)
                     for m in range(max_degree + 1)])


def basis_eval(n: int, m: int, j: int, x) -> float:
    """Value of the real orthonormal harmonic Y_{mj} at the unit vector x."""
    x = np.asarray(x, dtype=float)
    if n >= 4:
        if j != 1:
            raise UnsupportedDimensionError(f"only zonal harmonics (j=1) are available for n={n}")
        return float(_zonal_rows(n, m, x.reshape(1, n))[m, 0])
    idx = flat_index(n, m, j)
    return float(basis_matrix(n, m, x.reshape(1, n))[idx, 0])


def evaluate(c: HarmonicCoefficients, x):
    """Synthesis sum_{m,j} c_{mj} Y_{mj}(x) at one point or an array of points."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if c.n >= 4:
        zonal_slots = np.array([_offsets(c.n, c.max_degree)[m] for m in range(c.max_degree + 1)])
        rest = np.delete(c.values, zonal_slots)
        if np.any(rest != 0.0):
            raise UnsupportedDimensionError(f"only zonal expansions can be evaluated for n={c.n}")
        out = c.values[zonal_slots] @ _zonal_rows(c.n, c.max_degree, pts)
    else:
        out = np.empty(pts.shape[0])
        for start in range(0, pts.shape[0], _CHUNK):
            chunk = pts[start:start + _CHUNK]
            out[start:start + _CHUNK] = c.values @ basis_matrix(c.n, c.max_degree, chunk)
    return float(out[0]) if single else out


def addition_theorem_sum(n: int, m: int, x) -> float:
    """sum_j Y_{mj}(x)^2; equals N(n, m) / omega_n at every x."""
    x = np.asarray(x, dtype=float).reshape(1, n)
    rows = basis_matrix(n, m, x)[_offsets(n, m)[m]:, 0]
    return float(np.sum(rows ** 2))


# ---------------------------------------------------------------------------
# expansion


@lru_cache(maxsize=8)
def _grid_basis(grid: SphereGrid, max_degree: int) -> np.ndarray:
    table = basis_matrix(grid.n, max_degree, grid.nodes)
    table.setflags(write=False)
    return table


def expand(samples, grid: SphereGrid, max_degree: int, even="auto") -> HarmonicCoefficients:
    """Project a function on the sphere onto harmonics of degree <= max_degree.

    ``samples`` is either a callable taking an (k, n) array of unit vectors or
    the array of its values at the grid nodes. ``even`` may be True (odd
    degrees are dropped; raises if they are not negligible), False, or "auto"
    (set when the odd-degree content is at roundoff level).
    """
    if grid.resolution < 2 * max_degree:
        raise ResolutionError(
            f"grid resolution {grid.resolution} cannot resolve degree {max_degree}; "
            f"need resolution >= {2 * max_degree}"
        )
    values = samples(grid.nodes) if callable(samples) else np.asarray(samples, dtype=float)
    weighted = grid.weights * values
    if total_dim(grid.n, max_degree) * grid.size <= _CACHE_ENTRIES:
        coeffs = _grid_basis(grid, max_degree) @ weighted
    else:
        coeffs = np.zeros(total_dim(grid.n, max_degree))
        for start in range(0, grid.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            coeffs += basis_matrix(grid.n, max_degree, grid.nodes[sl]) @ weighted[sl]
    coeffs[np.abs(coeffs) < ZERO_THRESHOLD] = 0.0
    return _apply_parity(grid.n, max_degree, coeffs, even)


def _apply_parity(n: int, max_degree: int, coeffs: np.ndarray, even) -> HarmonicCoefficients:
    odd = degree_array(n, max_degree) % 2 == 1
    odd_norm = float(np.linalg.norm(coeffs[odd]))
    tol = 1e-12 * max(1.0, float(np.linalg.norm(coeffs)))
    if even == "auto":
        even = odd_norm <= tol
    elif even and odd_norm > tol:
        raise ParityError(f"function is not even: odd-degree content {odd_norm:.3e}")
    if even:
        coeffs[odd] = 0.0
    return HarmonicCoefficients(n, max_degree, coeffs, bool(even))


def expand_zonal(profile, n: int, max_degree: int, degree: int | None = None,
                 even="auto") -> HarmonicCoefficients:
    """Expansion of the zonal function x -> profile(<x, zonal_axis(n)>), any n >= 2.

    Uses omega_{n-1} sqrt(N / omega_n) int profile(t) P_m(n; t) (1 - t^2)^{(n-3)/2} dt
    on a rule split at t = 0.
    """
    if degree is None:
        degree = max(4 * max_degree, 64)
    rule = build_interval_rule(n, degree, split=True)
    prof = profile(rule.nodes)
    omega = surface_area(n)
    omega_lower = surface_area(n - 1) if n > 2 else 2.0
    coeffs = np.zeros(total_dim(n, max_degree))
    offs = _offsets(n, max_degree)
    for m in range(max_degree + 1):
        moment = float(np.dot(rule.weights, prof * zonal_polynomial(n, m, rule.nodes)))
        coeffs[offs[m]] = omega_lower * math.sqrt(dim_harmonics(n, m) / omega) * moment
    coeffs[np.abs(coeffs) < ZERO_THRESHOLD] = 0.0
    return _apply_parity(n, max_degree, coeffs, even)


# ---------------------------------------------------------------------------
# spectral operators


def laplace_beltrami_apply(c: HarmonicCoefficients, r: int) -> HarmonicCoefficients:
    """Apply Delta^r: degree-m entries are scaled by (-m (m + n - 2))^r."""
    if r < 0:
        raise DomainError(f"power r must be non-negative, got {r}")
    m = c.degrees.astype(float)
    factor = (-m * (m + c.n - 2)) ** r
    return c.with_values(c.values * factor)


def l2_norm(c: HarmonicCoefficients) -> float:
    """L2(S^{n-1}) norm of the represented function (Parseval)."""
    return float(np.linalg.norm(c.values))
