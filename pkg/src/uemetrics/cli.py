"""Command-line interface: construct, certify, blowup and oracle-check.

Parameters come from an optional TOML config (top-level keys plus one table
per command) and are overridden by flags. Exit codes: 0 all certified or
passed, 2 invalid or infeasible input, 3 inconclusive, 4 refuted or failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .analysis import (bilipschitz_constant, certify_derivative_chain,
                       certify_scal_positive, exhaustion_pieces, sobolev_certificate)
from .blowup import (GreenSolverError, blowup_metric, completeness_check,
                     conformal_identity, default_grid, ode_residual, solve_green,
                     verify_green_bounds)
from .cases import CASE_BUILDERS, build_cases
from .certificates import (CERTIFIED, CERTIFIED_ON_GRID, INCONCLUSIVE, REFUTED,
                           REFUTED_ON_GRID, _plain)
from .construction import (ConstructionError, InfeasibleError, LambdaError,
                           assemble_conical_cap, build_pullback_singularity,
                           build_rn_counterexample, euclidean_cone, round_sphere)
from .interval import Interval
from .spheres import (Berger3, LatitudeTwist, Pullback, RigidRotation, Round,
                      ScaledRound, SphereMetricError)
from .warped import WarpedGeometryError, scal_point, scal_warped

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_REFUTED = 0, 2, 3, 4

KINDS = ("conical-cap", "rn", "cone", "sphere-pullback")
CLAIMS = ("scal", "chain", "bilipschitz", "sobolev")

DEFAULT_SPHERE = {"conical-cap": "round:1", "rn": "round-scaled", "cone": "round:1",
                  "sphere-pullback": "round@twist:1"}

DEFAULTS = {
    "construct": {"kind": "conical-cap", "n": 8, "sphere": None, "R": "auto", "eps": "auto",
                  "lambda": "auto", "template": "quintic", "samples": 201, "out": "results"},
    "certify": {"kind": "conical-cap", "n": 8, "sphere": None, "R": "auto", "eps": "auto",
                "lambda": "auto", "template": "quintic", "claims": ["scal"], "target": "auto",
                "depth": 20, "p": [6.0, 7.0, 7.9, 9.0], "reference": "auto", "samples": 4096,
                "seed": 0, "grid": 400, "out": "results"},
    "blowup": {"model": "rn", "n": 8, "sphere": None, "sigma": "auto",
               "eps": [1e-3, 1e-2, 1e-1, 1.0], "normalization": "dirac", "points": 400,
               "decades": 4.0, "identity_tol": 1e-5, "flat_tol": 1e-8, "out": "results"},
    "oracle-check": {"case": "all", "points": 40, "seed": 0, "tol": 1e-5, "out": "results"},
}


class InvalidInput(ValueError):
    pass


# -- parameter plumbing ---------------------------------------------------------------

def _norm_keys(d: dict) -> dict:
    return {str(k).replace("-", "_"): v for k, v in d.items()}


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def merge_params(command: str, config: dict, flags: dict) -> dict:
    """Defaults < top-level config keys < [command] table < flags."""
    params = _norm_keys(DEFAULTS[command])
    top = {k: v for k, v in config.items() if not isinstance(v, dict)}
    params.update({k: v for k, v in _norm_keys(top).items() if k in params})
    params.update(_norm_keys(config.get(command, {})))
    params.update({k: v for k, v in flags.items() if v is not None})
    return params


def _float_list(value) -> list:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    if isinstance(value, (int, float)):
        value = [value]
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"expected a list of numbers, got {value!r}") from exc


def _auto_or_positive(name, value):
    if value is None or value == "auto":
        return "auto"
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{name} must be a number or 'auto'") from exc
    if not (v > 0.0 and math.isfinite(v)):
        raise InvalidInput(f"{name} must be positive")
    return v


def _dimension(value) -> int:
    try:
        n = int(value)
    except (TypeError, ValueError) as exc:
        raise InvalidInput("n must be an integer") from exc
    if n != float(value) or n < 3:
        raise InvalidInput("n must be an integer >= 3")
    return n


def parse_sphere(spec: str, dim: int):
    """Sphere metric from a tag: ``round[:r]``, ``scaled:c``, ``round-scaled``,
    ``berger:a,b``, each optionally followed by ``@twist:theta`` or
    ``@rotate:i,j,angle`` (pullback by the diffeomorphism, applied in order).
    """
    base, *mods = [s.strip() for s in str(spec).split("@")]
    name, _, arg = base.partition(":")
    try:
        vals = [float(a) for a in arg.split(",") if a.strip()]
    except ValueError as exc:
        raise InvalidInput(f"bad sphere parameters in {spec!r}") from exc
    try:
        if name == "round":
            h = Round(dim, vals[0] if vals else 1.0)
        elif name == "scaled":
            if len(vals) != 1:
                raise InvalidInput("scaled needs one parameter c")
            h = ScaledRound(dim, vals[0])
        elif name == "round-scaled":
            # scal = 1: c h_round with c = dim (dim - 1)
            h = ScaledRound(dim, float(dim * (dim - 1)))
        elif name == "berger":
            if len(vals) != 2:
                raise InvalidInput("berger needs two parameters a,b")
            if dim != 3:
                raise InvalidInput("berger metrics need n = 4 (sphere dimension 3)")
            h = Berger3(vals[0], vals[1])
        else:
            raise InvalidInput(f"unknown sphere family {name!r}")
        for mod in mods:
            mname, _, marg = mod.partition(":")
            mv = [float(a) for a in marg.split(",") if a.strip()]
            if mname == "twist" and len(mv) == 1:
                h = Pullback(LatitudeTwist(dim, mv[0]), h)
            elif mname == "rotate" and len(mv) == 3:
                h = Pullback(RigidRotation.plane(dim, int(mv[0]), int(mv[1]), mv[2]), h)
            else:
                raise InvalidInput(f"bad diffeomorphism suffix {mod!r}")
    except (SphereMetricError, IndexError) as exc:
        raise InvalidInput(f"invalid sphere {spec!r}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise InvalidInput(f"invalid sphere {spec!r}: {exc}") from exc
    return h


def build_metric(params: dict):
    kind = params["kind"]
    if kind not in KINDS:
        raise InvalidInput(f"kind must be one of {', '.join(KINDS)}")
    n = _dimension(params["n"])
    h = parse_sphere(params.get("sphere") or DEFAULT_SPHERE[kind], n - 1)
    if kind == "conical-cap":
        R = _auto_or_positive("R", params.get("R"))
        eps = _auto_or_positive("eps", params.get("eps"))
        lam = _auto_or_positive("lambda", params.get("lambda"))
        return assemble_conical_cap(n, h, R, eps, lam, params.get("template", "quintic"))
    if kind == "rn":
        return build_rn_counterexample(n, h)
    if kind == "cone":
        return euclidean_cone(n, h)
    if not isinstance(h, Pullback) or not isinstance(h.base, Round) or h.base.radius != 1.0:
        raise InvalidInput("sphere-pullback needs a unit round sphere with a diffeomorphism "
                           "suffix, e.g. round@twist:1")
    return build_pullback_singularity("sphere", h.diffeo)


def _threads() -> int:
    raw = os.environ.get("UEMETRICS_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        k = int(raw)
    except ValueError:
        raise InvalidInput("UEMETRICS_THREADS must be a positive integer") from None
    if k < 1:
        raise InvalidInput("UEMETRICS_THREADS must be a positive integer")
    return k


# -- output helpers -------------------------------------------------------------------

def _out_dir(params) -> Path:
    out = Path(params["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.15e}" if isinstance(v, float) else v for v in row])


def _status_exit(statuses) -> int:
    statuses = list(statuses)
    if any(s in (REFUTED, REFUTED_ON_GRID) for s in statuses):
        return EXIT_REFUTED
    if any(s == INCONCLUSIVE for s in statuses):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# -- commands -------------------------------------------------------------------------

def cmd_construct(params: dict) -> int:
    g = build_metric(params)
    samples = int(params["samples"])
    if samples < 2:
        raise InvalidInput("samples must be >= 2")
    out = _out_dir(params)
    lo = g.domain.lo + (2.0**-20 if g.singular_left else 0.0)
    hi = g.domain.hi - (2.0**-20 if g.singular_right else 0.0)
    edges = np.linspace(lo, hi, samples)
    rows = []
    for a, b in zip(edges[:-1], edges[1:]):
        cell = Interval(float(a), float(b))
        encl = [g.f.enclose(cell, k) for k in range(3)]
        rows.append([float(a), float(b)] + [v for e in encl for v in (e.lo, e.hi)])
    write_csv(out / "profile.csv", ["t_lo", "t_hi", "f_lo", "f_hi", "df_lo", "df_hi",
                                     "d2f_lo", "d2f_hi"], rows)
    meta = {"kind": params["kind"], "n": g.n, "metric": g.describe(), "params": g.info,
            "tool_version": __version__}
    write_json(out / "metric.json", meta)
    print(f"constructed {params['kind']} n={g.n} on [{g.domain.lo:g}, {g.domain.hi:g}]")
    for key in ("C", "L_min", "R", "eps", "lambda", "lambda_min"):
        if key in g.info:
            print(f"  {key} = {g.info[key]:.10g}")
    print(f"wrote {out / 'profile.csv'} and {out / 'metric.json'}")
    return EXIT_OK


def _scal_target(g, target):
    if target in (None, "auto"):
        return 0.5 * g.info["C"] if "C" in g.info else 0.0
    if target == "half-C":
        if "C" not in g.info:
            raise InvalidInput("target half-C needs a conical cap")
        return 0.5 * g.info["C"]
    try:
        return float(target)
    except (TypeError, ValueError):
        raise InvalidInput("target must be a number, 'auto' or 'half-C'") from None


def _scal_table(g, depth, cells, target):
    pieces = exhaustion_pieces(g, g.domain, depth)
    lo, hi = pieces[-1].lo, pieces[-1].hi
    # geometric spacing towards a singular left end, uniform otherwise
    if g.singular_left:
        edges = g.domain.lo + np.geomspace(lo - g.domain.lo, hi - g.domain.lo, cells + 1)
    else:
        edges = np.linspace(lo, hi, cells + 1)
    edges[0], edges[-1] = lo, hi
    rows = []
    for a, b in zip(edges[:-1], edges[1:]):
        e = scal_warped(g, Interval(float(a), float(b)))
        rows.append([0.5 * (a + b), e.lo, e.hi, target])
    return rows


def cmd_certify(params: dict) -> int:
    claims = params["claims"]
    claims = [claims] if isinstance(claims, str) else list(claims)
    bad = [c for c in claims if c not in CLAIMS]
    if bad or not claims:
        raise InvalidInput(f"claims must be among {', '.join(CLAIMS)}")
    g = build_metric(params)
    depth = int(params["depth"])
    if depth < 1:
        raise InvalidInput("depth must be >= 1")
    target = _scal_target(g, params["target"])
    ps = _float_list(params["p"])
    if any(p <= 0.0 for p in ps):
        raise InvalidInput("Sobolev exponents must be positive")
    if "chain" in claims and "C" not in g.info:
        raise InvalidInput("the derivative chain applies to conical caps only")
    reference = params["reference"]
    if reference not in ("auto", "euclidean", "round-sphere"):
        raise InvalidInput("reference must be auto, euclidean or round-sphere")
    if reference == "auto":
        reference = "round-sphere" if params["kind"] == "sphere-pullback" else "euclidean"
    samples, seed = int(params["samples"]), int(params["seed"])
    out = _out_dir(params)

    def run(claim):
        if claim == "scal":
            return [certify_scal_positive(g, target=target, depth=depth)]
        if claim == "chain":
            return certify_derivative_chain(g)
        if claim == "bilipschitz":
            g0 = round_sphere(g.n) if reference == "round-sphere" else None
            return [bilipschitz_constant(g, g0, samples=samples, seed=seed)]
        return [sobolev_certificate(g, p) for p in ps]

    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(run, claims))
    certs = [c for group in results for c in group]
    write_json(out / "certificates.json", [c.to_dict() for c in certs])
    if "scal" in claims:
        write_csv(out / "scal.csv", ["t", "scal_lo", "scal_hi", "half_C"],
                  _scal_table(g, depth, int(params["grid"]), target))
    for c in certs:
        print(f"{c.status:18s} {c.claim:28s} achieved [{c.achieved.lo:.6g}, {c.achieved.hi:.6g}]"
              f" ({c.method})")
    print(f"{len(certs)} certificate(s) in {time.perf_counter() - t0:.2f} s; wrote {out}")
    return _status_exit(c.status for c in certs)


def _blowup_model(params):
    model = params["model"]
    n = _dimension(params["n"])
    if model == "cone":
        h = parse_sphere(params.get("sphere") or "round:1", n - 1)
        return euclidean_cone(n, h)
    if model == "rn":
        h = parse_sphere(params.get("sphere") or "round-scaled", n - 1)
        return build_rn_counterexample(n, h)
    raise InvalidInput("model must be cone or rn")


def cmd_blowup(params: dict) -> int:
    g = _blowup_model(params)
    eps_list = _float_list(params["eps"])
    if not eps_list or any(e < 0.0 for e in eps_list):
        raise InvalidInput("eps values must be >= 0")
    sigma = params["sigma"]
    if sigma != "auto":
        try:
            sigma = float(sigma)
        except (TypeError, ValueError):
            raise InvalidInput("sigma must be a number or 'auto'") from None
    points, decades = int(params["points"]), float(params["decades"])
    if points < 8 or not decades > 0.0:
        raise InvalidInput("need points >= 8 and decades > 0")
    grid = default_grid(g, points, decades)
    G = solve_green(g, None if sigma == "auto" else sigma, grid, params["normalization"])
    out = _out_dir(params)
    n = g.n
    write_csv(out / "green.csv", ["r", "G", "dG", "d2G", "r^(n-2)G"],
              [[float(r), float(v), float(d), float(s), float(v * r ** (n - 2))]
               for r, v, d, s in zip(G.grid, G.values, G.derivs, G.second)])

    checks = {}
    bound = verify_green_bounds(G)
    checks["green_exponent"] = bound.status == CERTIFIED_ON_GRID
    resid = ode_residual(G, g)
    report = {"certificate": bound.to_dict(), "c": bound.params["c"], "p_fit": G.p_fit,
              "expected_exponent": 2.0 - n, "kappa": G.kappa, "ode_residual": resid,
              "sigma": float(G.sigma(grid[0])), "expansion_c": G.expansion_c}
    scal_min = float(np.min(scal_point(g, grid + g.origin)))
    flat = scal_min == 0.0 and float(G.sigma(grid[0])) == 0.0
    if flat:
        exact = grid ** (2.0 - n)
        dev = float(np.max(np.abs(G.values / G.kappa - exact) / exact))
        report["flat_max_rel_error"] = dev
        checks["flat_exact"] = dev <= float(params["flat_tol"])
    write_json(out / "green_bound.json", report)

    comp_rows, id_rows = [], []
    max_id = 0.0
    positive = True
    for eps in eps_list:
        ge = blowup_metric(g, G, eps)
        comp = completeness_check(ge) if eps > 0.0 else None
        r, lhs, rhs, rel = conformal_identity(g, G, eps)
        max_id = max(max_id, float(np.max(rel)))
        pos = bool(np.all(lhs > 0.0))
        if scal_min > 0.0:
            positive &= pos
        id_rows += [[eps, float(a), float(b), float(c), float(d)] for a, b, c, d in zip(r, lhs, rhs, rel)]
        comp_rows.append({"eps": eps, "positive_on_grid": pos, "max_identity_residual": float(np.max(rel)),
                          "completeness": None if comp is None else {
                              "slope": comp.slope, "law": comp.law, "verdict": comp.verdict,
                              "length_at_smallest_radius": float(comp.lengths[-1])}})
        if comp is not None:
            checks[f"completeness_eps={eps:g}"] = comp.passed
        line = f"eps={eps:<8g} identity residual {np.max(rel):.2e}  scal>0 on grid: {pos}"
        if comp is not None:
            line += f"  completeness {comp.verdict} slope {comp.slope:.4f}"
        print(line)
    checks["identity"] = max_id <= float(params["identity_tol"])
    if scal_min > 0.0:
        checks["positivity"] = positive
    write_csv(out / "identity.csv", ["eps", "r", "scal_eps", "identity", "rel_residual"], id_rows)
    write_json(out / "completeness.json", {"model": params["model"], "n": n, "sweep": comp_rows,
                                            "checks": checks})
    print(f"G: p_fit = {G.p_fit:.6f} (expected {2 - n}), c = {bound.params['c']:.6g}, "
          f"ODE residual {resid:.2e}")
    if flat:
        print(f"flat model: max |G/kappa - r^(2-n)| / r^(2-n) = {report['flat_max_rel_error']:.2e}")
    for name, ok in checks.items():
        print(f"  {'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if all(checks.values()) else EXIT_REFUTED


def cmd_oracle_check(params: dict) -> int:
    case = params["case"]
    if case != "all" and case not in CASE_BUILDERS:
        raise InvalidInput(f"case must be all or one of {', '.join(CASE_BUILDERS)}")
    points, seed, tol = int(params["points"]), int(params["seed"]), float(params["tol"])
    if points < 1 or not tol > 0.0:
        raise InvalidInput("need points >= 1 and tol > 0")
    out = _out_dir(params)
    rows, reports = [], []
    for c in build_cases(case):
        rep = c.run(points, seed, tol)
        reports.append(rep)
        rows.append([rep.name, rep.points, rep.max_rel, rep.max_abs, tol, rep.verdict])
        print(f"{rep.verdict}  {rep.name:20s} points={rep.points:4d}  max_rel={rep.max_rel:.2e}")
    write_csv(out / "oracle_report.csv", ["case", "points", "max_rel", "max_abs", "tol", "verdict"], rows)
    write_json(out / "oracle_report.json",
               [{"case": r.name, "points": r.points, "max_rel": r.max_rel, "max_abs": r.max_abs,
                 "tol": tol, "verdict": r.verdict} for r in reports])
    return EXIT_OK if all(r.passed for r in reports) else EXIT_REFUTED


COMMANDS = {"construct": cmd_construct, "certify": cmd_certify, "blowup": cmd_blowup,
            "oracle-check": cmd_oracle_check}


# -- argument parsing -----------------------------------------------------------------

def _add_metric_args(p):
    p.add_argument("--kind", choices=KINDS, help="metric family")
    p.add_argument("--n", type=int, help="total dimension")
    p.add_argument("--sphere", help="boundary sphere metric, e.g. round:1, scaled:2, "
                                    "round-scaled, berger:1,2, round@twist:1")
    p.add_argument("--R", help="cap length or 'auto'")
    p.add_argument("--eps", help="collar width or 'auto'")
    p.add_argument("--lambda", dest="lambda", help="cone slope parameter or 'auto'")
    p.add_argument("--template", choices=("quintic", "smooth"), help="transition profile")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uemetrics",
                                     description="Construct and certify uniformly Euclidean singular metrics")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML config file; flags override it")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("construct", help="build a metric and write its profile tables")
    common(p)
    _add_metric_args(p)
    p.add_argument("--samples", type=int, help="profile table cells")

    p = sub.add_parser("certify", help="certify claims about a constructed metric")
    common(p)
    _add_metric_args(p)
    p.add_argument("--claim", dest="claims", action="append", choices=CLAIMS,
                   help="claim to certify (repeatable)")
    p.add_argument("--target", help="scal lower bound: number, 'auto' or 'half-C'")
    p.add_argument("--depth", type=int, help="exhaustion depth (margin 2^-depth)")
    p.add_argument("--p", help="comma-separated Sobolev exponents")
    p.add_argument("--reference", choices=("auto", "euclidean", "round-sphere"),
                   help="background metric for the bilipschitz claim")
    p.add_argument("--samples", type=int, help="sphere samples for eigenvalue bounds")
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", type=int, help="cells in the scal table")

    p = sub.add_parser("blowup", help="Green function and conformal blow-up on a radial model")
    common(p)
    p.add_argument("--model", choices=("cone", "rn"))
    p.add_argument("--n", type=int)
    p.add_argument("--sphere")
    p.add_argument("--sigma", help="constant sigma or 'auto' (half of min(1, scal))")
    p.add_argument("--eps", help="comma-separated conformal parameters")
    p.add_argument("--normalization", choices=("dirac", "unit"))
    p.add_argument("--points", type=int, help="radial grid points")
    p.add_argument("--decades", type=float, help="decades of radii below the model radius")
    p.add_argument("--identity-tol", dest="identity_tol", type=float)

    p = sub.add_parser("oracle-check", help="closed-form vs finite-difference curvature")
    common(p)
    p.add_argument("--case", choices=("all",) + tuple(CASE_BUILDERS))
    p.add_argument("--points", type=int, help="points per case")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        config = load_config(args.config) if args.config else {}
        params = merge_params(args.command, config, flags)
        return COMMANDS[args.command](params)
    except InfeasibleError as exc:
        hints = ", ".join(f"{k} >= {v:.6g}" for k, v in exc.hints.items())
        print(f"infeasible: {exc}; minimal feasible: L >= {exc.min_length:.6g}"
              + (f", {hints}" if hints else ""), file=sys.stderr)
        return EXIT_INVALID
    except LambdaError as exc:
        print(f"infeasible: {exc}; minimal feasible: lambda >= {exc.lambda_min:.6g}", file=sys.stderr)
        return EXIT_INVALID
    except GreenSolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_REFUTED
    except (InvalidInput, ConstructionError, WarpedGeometryError, SphereMetricError, ValueError,
            OSError, tomllib.TOMLDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
