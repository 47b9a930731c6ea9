"""Command-line front end.

    lqembed lambda-table --n 3 --q 1 --M 10 --out table.csv
    lqembed certify --f lp-ball:4 --q 1
    lqembed search --f zonal-Y4 --q 0.5 --q 1 --q 3 --q 5
    lqembed verify --even-integer 2 --lambda 0.1

Settings come from built-in defaults, then an optional JSON --config file,
then flags. The merged settings are echoed into every report, and feeding
that echo back through --config reproduces the report exactly.

Exit codes: 0 certified or verified, 1 usage or configuration error,
2 refuted or verification failed, 3 inconclusive or infeasible.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__
from .certify import (
    NormSpec,
    QSet,
    Verdict,
    certify_all,
    convexity_check,
    density_for,
    even_integer_example,
    hilbertian_check,
    levy_verify,
    search_lambda,
)
from .errors import DomainError, LqEmbedError
from .funk_hecke import auto_order, lambda_table_rows, write_table_csv
from .harmonics import HarmonicCoefficients
from .inversion import DensityResult
from .report import dumps
from .sphere import cached_grid

EXIT_OK, EXIT_USAGE, EXIT_REFUTED, EXIT_INCONCLUSIVE = 0, 1, 2, 3

DEFAULTS = {
    "n": 3,
    "q": None,
    "Q_range": None,
    "f": "euclidean",
    "lambda": 0.0,
    "lambda_hi": 1.0,
    "search": False,
    "M": 20,
    "resolution": 56,
    "r": "auto",
    "seed": 0,
    "points": 16,
    "convexity_trials": 100_000,
    "workers": None,
    "tol": 1e-6,
    "even_integer": None,
    "density": None,
    "save_density": None,
    "out": None,
    "format": "json",
}


class ConfigError(LqEmbedError, ValueError):
    """Invalid or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# configuration


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lqembed", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"lqembed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", help="JSON file with settings; flags override it")
    common.add_argument("--n", type=int, default=S, help="ambient dimension (default 3)")
    common.add_argument("--q", type=float, action="append", default=S, help="exponent; repeatable")
    common.add_argument("--Q-range", dest="Q_range", default=S, metavar="LO:HI:COUNT",
                        help="evenly spaced exponents")
    common.add_argument("--f", default=S,
                        help="norm or perturbation: euclidean, zonal-Y4, lp-ball:P, lq-power:K, "
                             "zonal:C0,C1,... (coefficients of the zonal harmonics by degree)")
    common.add_argument("--lambda", dest="lambda", type=float, default=S, help="perturbation size")
    common.add_argument("--lambda-hi", dest="lambda_hi", type=float, default=S,
                        help="upper end of the lambda search")
    common.add_argument("--search", action="store_const", const=True, default=S,
                        help="with certify: search lambda instead of using --lambda")
    common.add_argument("--M", type=int, default=S, help="truncation degree of the density (even)")
    common.add_argument("--resolution", type=int, default=S, help="sphere grid resolution")
    common.add_argument("--r", default=S, help="smoothness order or 'auto'")
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--points", type=int, default=S, help="random verification points")
    common.add_argument("--convexity-trials", dest="convexity_trials", type=int, default=S)
    common.add_argument("--workers", type=int, default=S, help="threads across exponents")
    common.add_argument("--tol", type=float, default=S, help="verification tolerance")
    common.add_argument("--even-integer", dest="even_integer", type=int, default=S, metavar="K",
                        help="with verify: check the atomic representation for q = 2K")
    common.add_argument("--density", default=S, help="with verify: density JSON file to test")
    common.add_argument("--save-density", dest="save_density", default=S, metavar="DIR",
                        help="with certify: write each density as JSON into DIR")
    common.add_argument("--out", default=S, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=S)
    for name, text in (("lambda-table", "closed-form vs oracle eigenvalue table (CSV)"),
                       ("certify", "certify one norm for each exponent"),
                       ("search", "largest perturbation certified for all exponents"),
                       ("verify", "check a Levy representation numerically")):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def build_config(argv) -> dict:
    args = vars(_parser().parse_args(argv))
    config = dict(DEFAULTS)
    path = args.pop("config", None)
    if path:
        try:
            loaded = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        loaded = loaded.get("config", loaded)
        unknown = set(loaded) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        config.update({k: v for k, v in loaded.items() if k != "command"})
    command = args.pop("command")
    config.update(args)
    config["command"] = command
    return config


def _qset(config) -> QSet:
    values = list(config["q"] or [])
    if config["Q_range"]:
        try:
            lo, hi, count = config["Q_range"].split(":")
            values += list(QSet.from_range(float(lo), float(hi), int(count)).samples)
        except ValueError as exc:
            raise ConfigError(f"bad --Q-range {config['Q_range']!r}: {exc}") from exc
    if not values:
        raise ConfigError("no exponents given; use --q or --Q-range")
    return QSet.from_values(values)


def _order(config, q_max: float) -> int:
    r = config["r"]
    if r in (None, "auto"):
        return auto_order(config["n"], q_max)
    try:
        return int(r)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"--r must be an integer or 'auto', got {r!r}") from exc


def _zonal(n: int, coeffs: list[float]) -> HarmonicCoefficients:
    entries = {(m, 1): c for m, c in enumerate(coeffs) if c != 0.0}
    if any(m % 2 for m, _ in entries):
        raise ConfigError("zonal perturbations must be even: odd-degree coefficients must be 0")
    return HarmonicCoefficients.from_entries(n, max(len(coeffs) - 1, 0), entries, even=True)


def perturbation_of(config) -> HarmonicCoefficients | None:
    """The f of N = 1 + lam f, or None for presets that are not perturbations."""
    spec, n = config["f"], config["n"]
    if spec == "euclidean":
        return HarmonicCoefficients.zeros(n, 0, even=True)
    if spec == "zonal-Y4":
        return _zonal(n, [0, 0, 0, 0, 1.0])
    if spec.startswith("zonal:"):
        try:
            return _zonal(n, [float(c) for c in spec[6:].split(",")])
        except ValueError as exc:
            raise ConfigError(f"bad zonal coefficients {spec!r}") from exc
    return None


def norm_of(config) -> NormSpec:
    spec, n, lam = config["f"], config["n"], float(config["lambda"])
    try:
        if spec == "euclidean":
            return NormSpec.euclidean(n)
        if spec.startswith("lp-ball:"):
            return NormSpec.lp_ball(n, float(spec.split(":", 1)[1]))
        if spec.startswith("lq-power:"):
            return NormSpec.lq_power(n, int(spec.split(":", 1)[1]), lam)
    except ValueError as exc:
        raise ConfigError(f"bad --f {spec!r}: {exc}") from exc
    f = perturbation_of(config)
    if f is None:
        raise ConfigError(f"unknown --f {spec!r}")
    return NormSpec.perturbation(f, lam)


def _grid(config):
    return cached_grid(config["n"], int(config["resolution"]))


# ---------------------------------------------------------------------------
# commands


def _exit_for(verdicts) -> int:
    if any(v is Verdict.REFUTED_NEGATIVE_DENSITY for v in verdicts):
        return EXIT_REFUTED
    if any(v is Verdict.INCONCLUSIVE for v in verdicts):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_lambda_table(config):
    rows = []
    for q in _qset(config).samples:
        rows += lambda_table_rows(config["n"], q, int(config["M"]))
    buf = io.StringIO()
    write_table_csv(buf, rows)
    return buf.getvalue(), EXIT_OK


def cmd_certify(config):
    if config["search"]:
        return cmd_search(config)
    qset = _qset(config)
    r = _order(config, qset.max)
    norm = norm_of(config)
    grid = _grid(config)
    certs = certify_all(norm, qset, r, grid, int(config["M"]), int(config["points"]),
                        int(config["seed"]), config["workers"])
    if config["save_density"]:
        folder = Path(config["save_density"])
        folder.mkdir(parents=True, exist_ok=True)
        for q in qset.samples:
            dens = density_for(norm, q, r, grid, int(config["M"]))
            (folder / f"density_q{q:g}.json").write_text(dumps(dens.to_dict()), encoding="utf-8")
    code = _exit_for([c.verdict for c in certs])
    return {"certificates": [c.to_dict() for c in certs]}, code


def cmd_search(config):
    f = perturbation_of(config)
    if f is None:
        raise ConfigError(f"search needs a perturbation f (euclidean, zonal-Y4, zonal:...), got {config['f']!r}")
    qset = _qset(config)
    r = _order(config, qset.max)
    result = search_lambda(f, qset, r, _grid(config), int(config["M"]),
                           lam_hi=float(config["lambda_hi"]), seed=int(config["seed"]),
                           verify_points=int(config["points"]),
                           convexity_trials=int(config["convexity_trials"]),
                           workers=config["workers"])
    payload = result.to_dict()
    if result.hilbertian:
        payload["note"] = "f is constant: the norm is euclidean up to scale (Hilbertian, degenerate input)"
    code = EXIT_OK if result.feasible else EXIT_INCONCLUSIVE
    return payload, code


def cmd_verify(config):
    n, seed, points = config["n"], int(config["seed"]), int(config["points"])
    tol = float(config["tol"])
    if config["even_integer"] is not None:
        k, lam = int(config["even_integer"]), float(config["lambda"])
        residual = even_integer_example(n, k, lam, points=points, seed=seed)
        conv = convexity_check(NormSpec.lq_power(n, k, lam), int(config["convexity_trials"]), seed)
        ok = residual <= tol and conv.passed
        payload = {"even_integer": {"k": k, "lambda": lam, "residual": residual},
                   "convexity": conv.to_dict(), "passed": ok}
        return payload, EXIT_OK if ok else EXIT_REFUTED
    qset = _qset(config)
    norm = norm_of(config)
    grid = _grid(config)
    r = _order(config, qset.max)
    results = []
    if config["density"]:
        try:
            dens = DensityResult.from_dict(json.loads(Path(config["density"]).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"cannot read density {config['density']}: {exc}") from exc
        if dens.n != n:
            raise ConfigError(f"density is for n={dens.n}, config has n={n}")
        for q in qset.samples:
            res = levy_verify(norm, dens, grid, points, seed, q=q)
            results.append({"q": q, "density_q": dens.q, "residual": res, "passed": res <= tol})
    else:
        for q in qset.samples:
            dens = density_for(norm, q, r, grid, int(config["M"]))
            res = levy_verify(norm, dens, grid, points, seed)
            results.append({"q": q, "density_q": q, "residual": res, "passed": res <= tol})
    payload = {"norm_spec": norm.to_dict(), "verifications": results,
               "hilbertian_residual": hilbertian_check(norm, grid) if n in (2, 3) else None}
    return payload, EXIT_OK if all(x["passed"] for x in results) else EXIT_REFUTED


COMMANDS = {"lambda-table": cmd_lambda_table, "certify": cmd_certify,
            "search": cmd_search, "verify": cmd_verify}


def _csv_rows(payload) -> str:
    rows = payload.get("certificates") or payload.get("verifications") or []
    if not rows:
        rows = [{k: v for k, v in payload.items() if not isinstance(v, (dict, list))}]
    flat = [{k: v for k, v in row.items() if not isinstance(v, (dict, list))} for row in rows]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(flat[0]), lineterminator="\n")
    writer.writeheader()
    for row in flat:
        writer.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def run(config) -> tuple[str, int]:
    """Execute a merged config; returns (report text, exit code)."""
    result, code = COMMANDS[config["command"]](config)
    if isinstance(result, str):
        return result, code
    result["exit_code"] = code
    if config["format"] == "csv":
        return _csv_rows(result), code
    result["config"] = config
    result["version"] = __version__
    return dumps(result), code


def main(argv=None) -> int:
    try:
        config = build_config(sys.argv[1:] if argv is None else argv)
        text, code = run(config)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    except (LqEmbedError, DomainError, ValueError, OSError) as exc:
        print(f"lqembed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = config["out"]
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
