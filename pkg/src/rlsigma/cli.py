"""Command-line interface: validate, sigma-report, limit-probe, verify.

All structured output is JSON written with sorted keys, so identical
inputs give byte-identical reports.  Probe samples go to CSV files with
the columns ``eps,value``.

Exit codes: 0 success, 1 usage or parse error, 2 normal-form violation,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import limits as L
from .errors import ExprError, ConfigError, NormalFormError, PreconditionError, RLSigmaError
from .fields import CoordinateField, ScreenField, frame_fields
from .metric import BUILTIN_NAMES, AdaptedMetric, resolve_model
from .sigma import d_rho, flatness, rho_form, screen_frame, weingarten
from .verify import SUITES, run_suite

SCHEMA_VERSION = "rlsigma.report/1"
EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2, 3


def _clean(obj):
    """Convert numpy values and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def _envelope(command: str, M: AdaptedMetric | None, payload) -> dict:
    model = None
    if M is not None:
        model = {"name": M.name, "digest": M.digest, "dimension": M.m}
    return {"schema": SCHEMA_VERSION, "tool": {"name": "rlsigma", "version": __version__},
            "command": command, "model": model, "payload": payload}


def _emit(report: dict, output: str | None) -> None:
    text = dumps(report)
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("RLSIGMA_THREADS", "1")))
    except ValueError:
        return 1


def _parse_point(text: str | None, M: AdaptedMetric) -> np.ndarray:
    """Hypersurface point from ``x2,..,xm``; default is the origin clipped into the box."""
    p = np.zeros(M.m)
    if text is None:
        for k, (lo, hi) in enumerate(M.sigma_box, start=1):
            p[k] = min(max(0.0, lo), hi)
        return p
    vals = [float(v) for v in text.split(",")]
    if len(vals) != M.m - 1:
        raise ConfigError(f"--point needs {M.m - 1} values x2..x{M.m}, got {len(vals)}")
    p[1:] = vals
    if not M.contains(p):
        raise ConfigError(f"point {tuple(p)} lies outside the model box")
    return p


def resolve_field_name(M: AdaptedMetric, name: str):
    """Field from a name: N, R, V (=V2), W, V<k>, d<k>, or a field from the config."""
    ff = frame_fields(M)
    if name in ff:
        return ff[name]
    if name == "V":
        return ScreenField(2)
    if name == "W":
        return ScreenField(3 if M.m > 3 else 2)
    m = re.fullmatch(r"d(\d+)", name)
    if m and 1 <= int(m.group(1)) <= M.m:
        return CoordinateField(int(m.group(1)))
    if name in M.vector_fields:
        return M.vector_fields[name]
    raise ConfigError(f"unknown field name {name!r}")


def run_quantity(M: AdaptedMetric, quantity: str, p, eps, two_sided: bool) -> L.LimitReport:
    kind, _, rest = quantity.partition(":")
    if kind == "cov":
        names = rest.split(",")
        if len(names) != 4:
            raise ConfigError("cov: needs four field names")
        rep = L.covariant_limit(M, p, *(resolve_field_name(M, n) for n in names), eps=eps,
                                two_sided=two_sided)
    elif kind == "sec":
        names = rest.split(",")
        if len(names) != 2:
            raise ConfigError("sec: needs two field names")
        rep = L.sectional_limit(M, p, *(resolve_field_name(M, n) for n in names), eps=eps,
                                two_sided=two_sided)
    elif kind == "ric":
        tag, _, fields = rest.partition(":")
        kw = {}
        if fields:
            parts = fields.split(",")
            kw = {k: resolve_field_name(M, n) for k, n in zip(("V", "W"), parts)}
        if tag not in L.RICCI_TAGS:
            raise ConfigError(f"unknown Ricci tag {tag!r}")
        rep = L.ricci_limit(M, p, tag, eps=eps, two_sided=two_sided, **kw)
    else:
        raise ConfigError(f"quantity must start with cov:, sec: or ric:, got {quantity!r}")
    rep.quantity = quantity
    return rep


def _csv_name(quantity: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", quantity).strip("_") + ".csv"


def write_csv(path: Path, probe: L.Probe) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps", "value"])
        for e, v in zip(probe.eps, probe.values):
            w.writerow([repr(e), repr(v)])
        for e, v in zip(probe.eps, probe.lorentz_values or []):
            w.writerow([repr(-e), repr(v)])


# commands -----------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        M = resolve_model(args.model)
    except NormalFormError as exc:
        _emit(_envelope("validate", None, {"valid": False, "kind": "normal_form",
                                           "error": str(exc)}), args.output)
        print(f"normal-form violation: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ExprError, ConfigError, OSError, ValueError) as exc:
        info = {"valid": False, "kind": "parse", "error": str(exc)}
        if getattr(exc, "offset", None) is not None:
            info["offset"] = exc.offset
        _emit(_envelope("validate", None, info), args.output)
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fl = flatness(M)
    _emit(_envelope("validate", M, {"valid": True, "ii_flat": fl.ii_flat, "h_flat": fl.h_flat}),
          args.output)
    return EXIT_OK


def sigma_report(M: AdaptedMetric, p, grid: int = 5) -> dict:
    fr = screen_frame(M, p)
    HS, IIS, eigH, eigII = weingarten(M, p)
    fl = flatness(M, grid)
    m = M.m
    rho = {f"d{k}": rho_form(M, p, np.eye(m)[k - 1]) for k in range(2, m + 1)}
    drho = {}
    for i in range(2, m):
        for j in range(i + 1, m):
            drho[f"V{i},V{j}"] = d_rho(M, p, ScreenField(i), ScreenField(j))
    drho_coords = {f"d{i},d{j}": d_rho(M, p, CoordinateField(i), CoordinateField(j))
                   for i in range(2, m + 1) for j in range(i + 1, m + 1)}
    return {
        "point": p,
        "frame": {"N": fr.N, "R": fr.R, "screen": list(fr.screen_basis),
                  "screen_unnormalized": list(fr.raw_screen)},
        "H_tangent": fr.H_matrix,
        "II_frame": fr.II_matrix,
        "H_screen": HS,
        "II_screen": IIS,
        "principal_curvatures": {"H": eigH, "II": eigII},
        "rho": rho,
        "d_rho_screen": drho,
        "d_rho_coordinates": drho_coords,
        "flatness": {"ii_flat": fl.ii_flat, "ii_max": fl.ii_max, "h_flat": fl.h_flat,
                     "h_max": fl.h_max, "iii_flat": fl.iii_flat, "grid": grid},
    }


def cmd_sigma_report(args) -> int:
    M = resolve_model(args.model)
    p = _parse_point(args.point, M)
    _emit(_envelope("sigma-report", M, sigma_report(M, p, args.grid)), args.output)
    return EXIT_OK


def eps_schedule(lo: float, hi: float, n: int = 7) -> tuple:
    if not 0 < lo < hi:
        raise ConfigError("need 0 < eps-lo < eps-hi")
    return tuple(float(x) for x in np.geomspace(hi, lo, n))


def cmd_limit_probe(args) -> int:
    M = resolve_model(args.model)
    p = _parse_point(args.point, M)
    eps = eps_schedule(args.eps_lo, args.eps_hi, args.samples)
    if eps[0] > M.box[0][1] or (args.two_sided and -eps[0] < M.box[0][0]):
        raise ConfigError("eps schedule leaves the x1 range of the model box")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        reports = list(pool.map(lambda q: run_quantity(M, q, p, eps, args.two_sided),
                                args.quantity))
    csv_paths = []
    if args.csv_dir:
        out = Path(args.csv_dir)
        out.mkdir(parents=True, exist_ok=True)
        for rep in reports:
            path = out / _csv_name(rep.quantity)
            write_csv(path, rep.probe)
            csv_paths.append(str(path))
    payload = {"point": p, "eps": eps, "two_sided": args.two_sided,
               "reports": [r.to_dict() for r in reports], "csv": csv_paths}
    _emit(_envelope("limit-probe", M, payload), args.output)
    return EXIT_OK


def _expand_models(refs):
    out = []
    for ref in refs:
        if ref == "builtin:all":
            out.extend(f"builtin:{n}" for n in BUILTIN_NAMES)
        else:
            out.append(ref)
    return out


def cmd_verify(args) -> int:
    results = []
    ok = True
    for ref in _expand_models(args.model):
        M = resolve_model(ref)
        checks = run_suite(M, args.suite, args.seed)
        passed = all(c.passed for c in checks)
        ok = ok and passed
        results.append({"model": {"name": M.name, "digest": M.digest, "dimension": M.m},
                        "passed": passed, "checks": [c.to_dict() for c in checks]})
        if not args.quiet:
            for c in checks:
                flag = "PASS" if c.passed else "FAIL"
                print(f"{flag} {M.name} {c.name} defect={c.defect:.3e} tol={c.tolerance:.0e}",
                      file=sys.stderr)
    payload = {"suite": args.suite, "seed": args.seed, "passed": ok, "models": results}
    _emit(_envelope("verify", None, payload), args.output)
    return EXIT_OK if ok else EXIT_VERIFY


# argument parsing ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rlsigma", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"rlsigma {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, multi=False):
        if multi:
            sp.add_argument("model", nargs="+",
                            help="builtin:<name>, builtin:all, or a JSON config path")
        else:
            sp.add_argument("model", help="builtin:<name> or a JSON config path")
        sp.add_argument("-o", "--output", help="write the JSON report here instead of stdout")

    sp = sub.add_parser("validate", help="load and check a metric config")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("sigma-report", help="frame, H, II, rho and flatness at a point")
    common(sp)
    sp.add_argument("--point", help="hypersurface coordinates x2,..,xm")
    sp.add_argument("--grid", type=int, default=5, help="flatness grid points per axis")
    sp.set_defaults(func=cmd_sigma_report)

    sp = sub.add_parser("limit-probe", help="classify curvature quantities approaching x1 = 0")
    common(sp)
    sp.add_argument("--quantity", action="append", required=True,
                    help="cov:A,B,C,D | sec:A,B | ric:TAG[:V,W]; repeatable")
    sp.add_argument("--point", help="hypersurface coordinates x2,..,xm")
    sp.add_argument("--eps-lo", type=float, default=1e-4)
    sp.add_argument("--eps-hi", type=float, default=1e-1)
    sp.add_argument("--samples", type=int, default=7)
    sp.add_argument("--two-sided", action="store_true", help="also sample the Lorentz side")
    sp.add_argument("--csv-dir", help="directory for per-quantity eps,value CSV files")
    sp.set_defaults(func=cmd_limit_probe)

    sp = sub.add_parser("verify", help="run the named theorem checks")
    common(sp, multi=True)
    sp.add_argument("--suite", choices=SUITES + ("all",), default="all")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-q", "--quiet", action="store_true", help="no per-check lines on stderr")
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    np.seterr(all="ignore")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except NormalFormError as exc:
        print(f"normal-form violation: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (RLSigmaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
