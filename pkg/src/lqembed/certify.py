"""Embedding certificates for normed spaces into L_q.

A norm is described by its restriction N to the unit sphere. For each q the
function H = N^q is expanded in harmonics and inverted into a density b_H with
N(x)^q = int |<x, xi>|^q b_H(xi) d xi. A non-negative density means the space
embeds isometrically into L_q. Two tests are run: the cheap sufficient bound
K(q)||H - 1|| + L(q)||Delta^r H|| < c(q), and the direct minimum of b_H over a
grid, accepted only with a margin for truncation and discretization.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, ExcludedExponentError, ParityError
from .funk_hecke import (
    EVEN_GUARD,
    bound_constants,
    c_constant,
    check_exponent,
    check_smoothness,
    distance_to_even,
    eigenvalues,
)
from .harmonics import (
    HarmonicCoefficients,
    constant,
    dim_harmonics,
    evaluate,
    expand,
    l2_norm,
    laplace_beltrami_apply,
)
from .inversion import DensityResult, invert
from .sphere import SphereGrid, build_grid, surface_area

KINDS = ("euclidean", "perturbation", "lq_power", "lp_ball")
CONVEXITY_SLACK = 1e-12
# margins scale: positivity needs min b > truncation + 10 x quadrature estimate
QUADRATURE_SAFETY = 10.0
# grid refinement used for the quadrature convergence estimate
_REFINE_STEP = 8


def random_unit_points(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class NormSpec:
    """A norm on R^n given through its values on the unit sphere.

    kind = "euclidean":    N = 1.
    kind = "perturbation": N = 1 + lam * f with f an even harmonic expansion.
    kind = "lq_power":     N = (1 + lam * sum x_i^{2k})^{1/(2k)}.
    kind = "lp_ball":      N = ||x||_p.
    """

    n: int
    kind: str = "euclidean"
    lam: float = 0.0
    f: HarmonicCoefficients | None = None
    k: int | None = None
    p: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"dimension must be at least 2, got {self.n}")
        if self.kind not in KINDS:
            raise DomainError(f"unknown norm kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "perturbation":
            if self.f is None or self.f.n != self.n:
                raise DomainError("perturbation needs coefficients f in the same dimension")
            odd = self.f.values[self.f.degrees % 2 == 1]
            if np.any(odd != 0.0):
                raise ParityError("perturbation f must be even")
        if self.kind == "lq_power":
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise DomainError(f"lq_power needs an integer k >= 1, got {self.k}")
            if self.lam < 0:
                raise DomainError(f"lq_power needs lam >= 0, got {self.lam}")
        if self.kind == "lp_ball" and (self.p is None or not self.p >= 1):
            raise DomainError(f"lp_ball needs p >= 1, got {self.p}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def euclidean(cls, n: int) -> "NormSpec":
        return cls(n)

    @classmethod
    def perturbation(cls, f: HarmonicCoefficients, lam: float) -> "NormSpec":
        return cls(f.n, "perturbation", lam=float(lam), f=f)

    @classmethod
    def lq_power(cls, n: int, k: int, lam: float) -> "NormSpec":
        return cls(n, "lq_power", lam=float(lam), k=int(k))

    @classmethod
    def lp_ball(cls, n: int, p: float) -> "NormSpec":
        return cls(n, "lp_ball", p=float(p))

    # -- evaluation ---------------------------------------------------------

    def values(self, points) -> np.ndarray:
        """N at unit vectors (rows of ``points``)."""
        x = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "euclidean":
            return np.ones(x.shape[0])
        if self.kind == "perturbation":
            return 1.0 + self.lam * np.atleast_1d(evaluate(self.f, x))
        if self.kind == "lq_power":
            s = np.sum(x ** (2 * self.k), axis=1)
            return (1.0 + self.lam * s) ** (1.0 / (2 * self.k))
        return np.sum(np.abs(x) ** self.p, axis=1) ** (1.0 / self.p)

    def extended(self, x) -> np.ndarray:
        """The 1-homogeneous extension |x| N(x / |x|), zero at the origin."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        radius = np.linalg.norm(x, axis=1)
        out = np.zeros(x.shape[0])
        nz = radius > 0
        out[nz] = radius[nz] * self.values(x[nz] / radius[nz, None])
        return out

    def power(self, q: float):
        """Callable x -> N(x)^q on unit vectors."""
        return lambda pts: self.values(pts) ** q

    def with_lambda(self, lam: float) -> "NormSpec":
        return NormSpec(self.n, self.kind, float(lam), self.f, self.k, self.p)

    def to_dict(self) -> dict:
        out = {"n": self.n, "kind": self.kind}
        if self.kind in ("perturbation", "lq_power"):
            out["lambda"] = self.lam
        if self.kind == "perturbation":
            out["f"] = [[m, j, v] for (m, j), v in self.f.entries().items()]
            out["f_max_degree"] = self.f.max_degree
        if self.kind == "lq_power":
            out["k"] = self.k
        if self.kind == "lp_ball":
            out["p"] = self.p
        return out


@dataclass(frozen=True)
class QSet:
    """Finite ascending sample of exponents away from the even integers."""

    samples: tuple[float, ...]
    guard: float

    def __post_init__(self):
        if not self.samples:
            raise DomainError("QSet needs at least one exponent")
        if any(not q > 0 for q in self.samples):
            raise DomainError(f"exponents must be positive, got {self.samples}")
        if not self.guard > 0:
            raise ExcludedExponentError(f"QSet guard must be positive, got {self.guard}")

    @classmethod
    def from_values(cls, values, min_guard: float = EVEN_GUARD) -> "QSet":
        samples = tuple(sorted(float(v) for v in values))
        for q in samples:
            check_exponent(q, min_guard)
        guard = min(distance_to_even(q) for q in samples) if samples else 0.0
        return cls(samples, guard)

    @classmethod
    def from_range(cls, lo: float, hi: float, count: int, min_guard: float = EVEN_GUARD) -> "QSet":
        if count < 1 or not lo <= hi:
            raise DomainError(f"bad exponent range {lo}:{hi}:{count}")
        return cls.from_values(np.linspace(lo, hi, count).tolist(), min_guard)

    @property
    def max(self) -> float:
        return self.samples[-1]


class Verdict(str, Enum):
    CERTIFIED_LEMMA2 = "certified_lemma2"
    CERTIFIED_POSITIVE_DENSITY = "certified_positive_density"
    REFUTED_NEGATIVE_DENSITY = "refuted_negative_density"
    INCONCLUSIVE = "inconclusive"

    @property
    def certified(self) -> bool:
        return self in (Verdict.CERTIFIED_LEMMA2, Verdict.CERTIFIED_POSITIVE_DENSITY)


@dataclass(frozen=True)
class EmbeddingCertificate:
    q: float
    r: int
    M: int
    lemma2_lhs: float
    c_q: float
    min_density: float
    truncation_bound: float
    quadrature_margin: float
    reconstruction_error: float
    verdict: Verdict
    norm_spec: dict
    seed: int
    resolution: int

    @property
    def certified(self) -> bool:
        return self.verdict.certified

    @property
    def margin(self) -> float:
        """Total error allowance on min_density."""
        return self.truncation_bound + self.quadrature_margin

    def to_dict(self) -> dict:
        return {
            "norm_spec": self.norm_spec,
            "n": self.norm_spec["n"],
            "q": self.q,
            "r": self.r,
            "M": self.M,
            "resolution": self.resolution,
            "lambda": self.norm_spec.get("lambda", 0.0),
            "lemma2_lhs": self.lemma2_lhs,
            "c_q": self.c_q,
            "min_density": self.min_density,
            "truncation_bound": self.truncation_bound,
            "quadrature_margin": self.quadrature_margin,
            "reconstruction_error": self.reconstruction_error,
            "verdict": self.verdict.value,
            "seed": self.seed,
        }


def _decide(lemma2_lhs: float, c_q: float, min_density: float, margin: float) -> Verdict:
    if lemma2_lhs < c_q:
        return Verdict.CERTIFIED_LEMMA2
    if min_density > margin:
        return Verdict.CERTIFIED_POSITIVE_DENSITY
    if min_density < -margin:
        return Verdict.REFUTED_NEGATIVE_DENSITY
    return Verdict.INCONCLUSIVE


def _density_sup_change(H: HarmonicCoefficients, H_fine: HarmonicCoefficients, q: float, M: int) -> float:
    """Bound on sup |b - b'| for densities from two expansions of the same H (degrees <= M)."""
    lam = eigenvalues(H.n, q, M)
    omega = surface_area(H.n)
    diff = (H.resized(M) - H_fine.resized(M)).degree_norms()
    return math.fsum(diff[m] * math.sqrt(dim_harmonics(H.n, m) / omega) / abs(lam[m])
                     for m in range(0, M + 1, 2))


def _expand_power(norm: NormSpec, q: float, grid: SphereGrid) -> HarmonicCoefficients:
    degree = grid.resolution // 2
    if norm.kind == "euclidean":
        # H = 1 exactly; sampling it would only add roundoff that Delta^r amplifies
        return constant(norm.n, 1.0, degree)
    if norm.kind == "perturbation" and not np.any(norm.f.values[norm.f.degrees > 0] != 0.0):
        level = 1.0 + norm.lam * norm.f[0, 1] / math.sqrt(surface_area(norm.n))
        return constant(norm.n, level ** q, degree)
    return expand(norm.power(q), grid, degree, even=True)


def certify_lemma2(norm: NormSpec, q: float, r: int, grid: SphereGrid, M: int,
                   points: int = 16, seed: int = 0) -> EmbeddingCertificate:
    """Certify (or refute) that the space with unit sphere N embeds into L_q.

    H = N^q is expanded on ``grid`` to degree resolution // 2 and inverted to
    degree M. The quadrature margin compares against a grid refined by 8
    degrees; ``points`` random points check the reconstruction.
    """
    check_exponent(q)
    check_smoothness(norm.n, q, r)
    if grid.n != norm.n:
        raise DomainError(f"grid dimension {grid.n} does not match norm dimension {norm.n}")
    M_H = grid.resolution // 2
    if M > M_H:
        raise DomainError(f"M={M} exceeds the degree {M_H} resolved by a resolution-{grid.resolution} grid")

    H = _expand_power(norm, q, grid)
    density = invert(H, q, r, M)
    consts = bound_constants(norm.n, q, r)
    lemma2_lhs = (consts.K * l2_norm(H - constant(norm.n, 1.0, H.max_degree))
                  + consts.L * l2_norm(laplace_beltrami_apply(H, r)))
    c_q = c_constant(norm.n, q)
    min_density = float(np.min(density(grid.nodes)))

    fine = build_grid(norm.n, grid.resolution + _REFINE_STEP)
    H_fine = _expand_power(norm, q, fine)
    quad = QUADRATURE_SAFETY * _density_sup_change(H, H_fine, q, M)
    verdict = _decide(lemma2_lhs, c_q, min_density, density.truncation_bound + quad)
    recon = levy_verify(norm, density, grid, points, seed) if points > 0 else float("nan")
    return EmbeddingCertificate(
        q=float(q), r=int(r), M=int(M), lemma2_lhs=float(lemma2_lhs), c_q=c_q,
        min_density=min_density, truncation_bound=float(density.truncation_bound),
        quadrature_margin=float(quad), reconstruction_error=float(recon), verdict=verdict,
        norm_spec=norm.to_dict(), seed=int(seed), resolution=grid.resolution,
    )


def density_for(norm: NormSpec, q: float, r: int, grid: SphereGrid, M: int) -> DensityResult:
    """The inverted density b_H for H = N^q, as used by certify_lemma2."""
    return invert(_expand_power(norm, q, grid), q, r, M)


def levy_verify(norm: NormSpec, density: DensityResult, grid: SphereGrid, points: int,
                seed: int = 0, q: float | None = None) -> float:
    """max over random unit x of |N(x)^q - int |<x, xi>|^q b(xi) d xi|.

    q defaults to the exponent the density was built for. Each integral uses
    a grid of the same resolution aligned with the kink of the kernel at
    <x, xi> = 0.
    """
    rng = np.random.default_rng(seed)
    xs = random_unit_points(norm.n, points, rng)
    q = density.q if q is None else check_exponent(q)
    target = norm.values(xs) ** q
    worst = 0.0
    for x, t in zip(xs, target):
        local = build_grid(norm.n, grid.resolution, kernel_pole=x)
        kernel = np.abs(local.nodes @ x) ** q
        value = local.integrate(kernel * density(local.nodes))
        worst = max(worst, abs(t - value))
    return float(worst)


def even_integer_example(n: int, k: int, lam: float, points=200, seed: int = 0,
                         grid: SphereGrid | None = None) -> float:
    """Residual of the atomic Levy representation of 1 + lam * sum x_i^{2k}.

    The measure is c(2k) d xi plus unit masses lam at each basis vector; the
    atoms contribute lam * sum |x_i|^{2k} exactly. Returns the max residual at
    ``points`` random unit vectors, or at the rows of ``points`` if an array.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    if lam < 0:
        raise DomainError(f"lam must be non-negative, got {lam}")
    q = 2 * int(k)
    if grid is None:
        grid = build_grid(n, max(q + 2, 8))
    c = c_constant(n, q)
    if np.ndim(points) == 0:
        xs = random_unit_points(n, int(points), np.random.default_rng(seed))
    else:
        xs = np.atleast_2d(np.asarray(points, dtype=float))
    atoms = lam * np.sum(xs ** q, axis=1)
    lhs = 1.0 + atoms
    smooth = c * np.abs(xs @ grid.nodes.T) ** q @ grid.weights
    return float(np.max(np.abs(lhs - (smooth + atoms))))


def hilbertian_check(norm, grid: SphereGrid) -> float:
    """Relative weighted least-squares residual of N^2 against quadratic forms x^T A x.

    ``norm`` is a NormSpec or any callable returning N at rows of unit vectors.
    """
    x = grid.nodes
    n = grid.n
    values = norm.values if isinstance(norm, NormSpec) else norm
    cols = [x[:, i] * x[:, j] for i in range(n) for j in range(i, n)]
    design = np.stack(cols, axis=1)
    target = np.asarray(values(x), dtype=float) ** 2
    sw = np.sqrt(grid.weights)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], target * sw, rcond=None)
    resid = np.linalg.norm(sw * (design @ coef - target))
    return float(resid / np.linalg.norm(sw * target))


@dataclass(frozen=True)
class ConvexityResult:
    passed: bool
    worst_margin: float
    min_value: float
    trials: int

    def to_dict(self) -> dict:
        return {"passed": self.passed, "worst_margin": self.worst_margin,
                "min_value": self.min_value, "trials": self.trials}


def convexity_check(norm: NormSpec, trials: int = 100_000, seed: int = 0) -> ConvexityResult:
    """Sampled triangle inequality for the 1-homogeneous extension of N.

    Half the pairs are independent Gaussians; the other half are near-parallel
    pairs a +- eps d, which probe local curvature where violations start.
    worst_margin is max of N(u+v) - N(u) - N(v); the test passes when it stays
    below 1e-12 and N > 0 at every sampled direction.
    """
    rng = np.random.default_rng(seed)
    n = norm.n
    half = trials // 2
    u1 = rng.standard_normal((half, n))
    v1 = rng.standard_normal((half, n))
    a = rng.standard_normal((trials - half, n))
    d = rng.standard_normal((trials - half, n))
    eps = np.exp(rng.uniform(math.log(1e-3), math.log(0.3), trials - half))[:, None]
    scale = np.linalg.norm(a, axis=1, keepdims=True)
    u2 = a + eps * scale * d / np.linalg.norm(d, axis=1, keepdims=True)
    v2 = a - eps * scale * d / np.linalg.norm(d, axis=1, keepdims=True)
    u = np.vstack([u1, u2])
    v = np.vstack([v1, v2])
    nu, nv, nuv = norm.extended(u), norm.extended(v), norm.extended(u + v)
    margins = nuv - nu - nv
    worst = float(np.max(margins)) if trials else 0.0
    dirs = np.vstack([u, v])
    min_value = float(np.min(norm.values(dirs / np.linalg.norm(dirs, axis=1, keepdims=True))))
    passed = worst <= CONVEXITY_SLACK and min_value > 0.0
    return ConvexityResult(bool(passed), worst, min_value, int(trials))


# ---------------------------------------------------------------------------
# lambda search


@dataclass
class SearchResult:
    lam_star: float
    feasible: bool
    hilbertian: bool
    certificates: list = field(default_factory=list)
    convexity: ConvexityResult | None = None
    hilbertian_residual: float = float("nan")
    evaluations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lambda_star": self.lam_star,
            "feasible": self.feasible,
            "hilbertian": self.hilbertian,
            "hilbertian_residual": self.hilbertian_residual,
            "convexity": None if self.convexity is None else self.convexity.to_dict(),
            "certificates": [c.to_dict() for c in self.certificates],
            "evaluations": self.evaluations,
        }


def certify_all(norm: NormSpec, qset: QSet, r: int, grid: SphereGrid, M: int,
                points: int = 16, seed: int = 0, workers: int | None = None) -> list:
    """Certificates for every q in ``qset``, computed concurrently; order follows qset."""
    def one(q):
        return certify_lemma2(norm, q, r, grid, M, points=points, seed=seed)

    if workers == 1 or len(qset.samples) == 1:
        return [one(q) for q in qset.samples]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, qset.samples))


def search_lambda(f: HarmonicCoefficients, qset: QSet, r: int, grid: SphereGrid, M: int,
                  lam_hi: float = 1.0, lam_min: float = 1e-8, rtol: float = 1e-4,
                  seed: int = 0, verify_points: int = 16, convexity_trials: int = 100_000,
                  workers: int | None = None) -> SearchResult:
    """Largest lam in (0, lam_hi] for which N = 1 + lam f is a norm certified for all q.

    lam is halved from lam_hi until feasible, then bisected to relative width
    ``rtol``. Feasible means convexity_check passes and every q certifies.
    """
    check_smoothness(f.n, qset.max, r)
    base = NormSpec.perturbation(f, 0.0)
    log: list = []

    if not np.any(f.values[f.degrees > 0] != 0.0):
        # constant f: N is a multiple of the euclidean norm
        norm = base.with_lambda(lam_hi)
        certs = certify_all(norm, qset, r, grid, M, verify_points, seed, workers)
        return SearchResult(lam_hi, all(c.certified for c in certs), True, certs,
                            convexity_check(norm, convexity_trials, seed),
                            hilbertian_check(norm, grid), log)

    def feasible(lam: float) -> bool:
        norm = base.with_lambda(lam)
        conv = convexity_check(norm, convexity_trials, seed)
        ok = conv.passed
        verdicts = []
        if ok:
            certs = certify_all(norm, qset, r, grid, M, 0, seed, workers)
            verdicts = [c.verdict.value for c in certs]
            ok = all(c.certified for c in certs)
        log.append({"lambda": lam, "convex": conv.passed, "verdicts": verdicts, "feasible": ok})
        return ok

    lo, hi = None, None
    lam = lam_hi
    while lam >= lam_min:
        if feasible(lam):
            lo = lam
            break
        hi = lam
        lam *= 0.5
    if lo is None:
        return SearchResult(0.0, False, False, evaluations=log)
    if hi is not None:
        while (hi - lo) > rtol * lo:
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid

    norm = base.with_lambda(lo)
    certs = certify_all(norm, qset, r, grid, M, verify_points, seed, workers)
    return SearchResult(
        lam_star=lo, feasible=all(c.certified for c in certs), hilbertian=False,
        certificates=certs, convexity=convexity_check(norm, convexity_trials, seed),
        hilbertian_residual=hilbertian_check(norm, grid), evaluations=log,
    )


def refine_qset(norm: NormSpec, qset: QSet, r: int, grid: SphereGrid, M: int,
                rel: float = 0.1, max_rounds: int = 4, seed: int = 0,
                min_guard: float = EVEN_GUARD) -> QSet:
    """Insert midpoints between adjacent exponents whose certificate margins
    c(q) - lemma2_lhs differ by more than ``rel`` (relative)."""
    samples = list(qset.samples)
    for _ in range(max_rounds):
        certs = {q: certify_lemma2(norm, q, r, grid, M, points=0, seed=seed) for q in samples}
        slack = {q: c.c_q - c.lemma2_lhs for q, c in certs.items()}
        added = []
        for a, b in zip(samples, samples[1:]):
            scale = max(abs(slack[a]), abs(slack[b]), 1e-300)
            mid = 0.5 * (a + b)
            if abs(slack[a] - slack[b]) > rel * scale and distance_to_even(mid) > min_guard:
                added.append(mid)
        if not added:
            break
        samples = sorted(samples + added)
    return QSet.from_values(samples, min_guard)
