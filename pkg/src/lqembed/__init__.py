"""Levy-representation densities on the sphere and certificates for isometric
embeddings of finite-dimensional normed spaces into L_q."""

__version__ = "0.1.0"

from .certify import (  # noqa: E402
    EmbeddingCertificate,
    NormSpec,
    QSet,
    SearchResult,
    Verdict,
    certify_lemma2,
    convexity_check,
    even_integer_example,
    hilbertian_check,
    levy_verify,
    search_lambda,
)
from .funk_hecke import bound_constants, c_constant, lambda_closed, lambda_oracle  # noqa: E402
from .harmonics import HarmonicCoefficients, evaluate, expand  # noqa: E402
from .inversion import DensityResult, forward, invert, uniform_bound  # noqa: E402
from .sphere import SphereGrid, build_grid, build_interval_rule  # noqa: E402

__all__ = [
    "DensityResult", "EmbeddingCertificate", "HarmonicCoefficients", "NormSpec", "QSet",
    "SearchResult", "SphereGrid", "Verdict", "bound_constants", "build_grid",
    "build_interval_rule", "c_constant", "certify_lemma2", "convexity_check", "evaluate",
    "even_integer_example", "expand", "forward", "hilbertian_check", "invert", "lambda_closed",
    "lambda_oracle", "levy_verify", "search_lambda", "uniform_bound",
]
