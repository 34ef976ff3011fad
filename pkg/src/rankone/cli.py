"""Command-line entry point: ``rankone <subcommand> [options]``.

Tabular results go out as CSV (first line ``# rankone.<table>/<version>``) or
JSON; structured results are JSON.  Files are written atomically.  Errors
are reported as one JSON object on stderr and a nonzero exit status.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .cplx import parse_complex, parse_exact
from .errors import DomainError, RankOneError

CSV_VERSION = 1
CSV_HEADERS = {
    "cfun": ("tau", "c_re", "c_im", "density"),
    "spherical": ("t", "value_re", "value_im"),
    "transform": ("tau", "value_re", "value_im"),
    "fundamental": ("t", "u_re", "u_im"),
}
MODULE_OF = {
    "cfun": "harish_chandra", "spherical": "spherical", "transform": "spherical", "fundamental": "sobolev",
    "eisenstein": "eisenstein2d", "regularize": "regularization", "finite-verify": "finite_model",
    "report": "acceptance",
}
# every error names a precondition; these cover the error kinds that do not carry one
DEFAULT_PRECONDITION = {
    "pole": "argument away from poles",
    "convergence": "series/quadrature converges to tolerance",
    "boundary": "no exponent with real part exactly 1/2",
    "model": "valid finite model",
    "domain": "valid input",
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    output: Optional[str] = None
    fmt: str = "csv"
    seed: int = 0


class CliError(RankOneError):
    code = "usage"

    def __init__(self, message, precondition, **details):
        super().__init__(message, precondition=precondition, **details)


# ------------------------------------------------------------------ parsing

def parse_range(text: str) -> np.ndarray:
    """``a:b:count`` -> count points from a to b inclusive."""
    parts = str(text).split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise DomainError(f"range {text!r} is not of the form a:b:count", "range grammar a:b:count",
                          text=str(text)) from None
    if k < 1 or (k > 1 and not b > a):
        raise DomainError(f"range {text!r} needs count >= 1 and b > a", "range a<b, count>=1", text=str(text))
    return np.linspace(a, b, k)


COMPLEX_PARAMS = ("s", "a", "b")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, "valid command-line arguments")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rankone", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt="csv"):
        sp.add_argument("--output", "-o", help="output file (default: stdout)")
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default=fmt)
        sp.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("cfun", help="Harish-Chandra c-function on the critical line")
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--tau-range", default="0.1:100:200")
    c.add_argument("--formula", choices=("paper", "helgason"), default="paper")
    common(c)

    s = sub.add_parser("spherical", help="zonal spherical function psi_s(t)")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--s", required=True)
    s.add_argument("--t-range", default="0:5:51")
    common(s)

    t = sub.add_parser("transform", help="spherical transform of exp(-(t/w)^2)(1 + alpha t^2)")
    t.add_argument("--n", type=int, default=2)
    t.add_argument("--width", type=float, default=1.0)
    t.add_argument("--alpha", type=float, default=0.0)
    t.add_argument("--tau-max", type=float, default=24.0)
    t.add_argument("--nodes", type=int, default=240)
    t.add_argument("--radial-t-max", type=float, default=9.0)
    t.add_argument("--radial-nodes", type=int, default=320)
    common(t)

    f = sub.add_parser("fundamental", help="radial fundamental solution of (L - lambda)^N")
    f.add_argument("--n", type=int, default=2)
    f.add_argument("--N", type=int, default=2)
    f.add_argument("--lam", default="-5")
    f.add_argument("--laplacian", choices=("positive", "geometric"), default="positive")
    f.add_argument("--t-range", default="0.05:5:100")
    f.add_argument("--tau-max", type=float, default=200.0)
    f.add_argument("--nodes", type=int, default=800)
    common(f)

    e = sub.add_parser("eisenstein", help="Eisenstein series for SL2(Z)")
    e.add_argument("--s", required=True)
    e.add_argument("--z", action="append", help="point(s) in the upper half-plane")
    e.add_argument("--method", choices=("auto", "lattice_sum", "fourier_continuation"), default="auto")
    e.add_argument("--trunc", type=int, default=200)
    e.add_argument("--constant-term", action="store_true", help="also fit the constant term")
    common(e, "json")

    r = sub.add_parser("regularize", help="regularize E_a E_b")
    r.add_argument("--a", required=True)
    r.add_argument("--b", required=True)
    r.add_argument("--verify", action="store_true", help="also run the L^2 surrogate check")
    common(r, "json")

    v = sub.add_parser("finite-verify", help="run every finite-model check")
    v.add_argument("--model", required=True, help="model JSON file or bundled model name")
    v.add_argument("--N", type=int, default=2)
    v.add_argument("--lam", default=None, help="shift lambda (default: below the spectrum)")
    v.add_argument("--pairs", type=int, default=20)
    v.add_argument("--exact", dest="exact", action="store_true", default=None, help="force rational mode")
    v.add_argument("--float", dest="exact", action="store_false", help="force floating-point mode")
    common(v, "json")

    a = sub.add_parser("report", help="run the acceptance suite into one JSON summary")
    a.add_argument("--criteria", default=None, help="comma-separated criterion numbers; empty for none")
    common(a, "json")
    return p


# ------------------------------------------------------------------ output

def _atomic_write(path: Optional[str], text: str):
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".rankone-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _table(name: str, rows, fmt: str) -> str:
    header = CSV_HEADERS[name]
    if fmt == "json":
        return _json({"table": f"rankone.{name}", "version": CSV_VERSION,
                      "columns": list(header), "rows": [[float(x) for x in r] for r in rows]})
    buf = io.StringIO()
    buf.write(f"# rankone.{name}/{CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    return buf.getvalue()


def _default(o):
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _json(obj) -> str:
    return json.dumps(obj, default=_default, sort_keys=True, indent=2) + "\n"


def _cx(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


# ------------------------------------------------------------------ commands

def cmd_cfun(cfg: RunConfig) -> str:
    from .harish_chandra import SpectralParameter, c_function

    n = cfg.params["n"]
    rows = []
    for tau in parse_range(cfg.params["tau_range"]):
        c = c_function(SpectralParameter.on_critical_line(float(tau), n), cfg.params["formula"])
        rows.append((tau, c.real, c.imag, 1.0 / abs(c) ** 2))
    return _table("cfun", rows, cfg.fmt)


def cmd_spherical(cfg: RunConfig) -> str:
    from .harish_chandra import SpectralParameter
    from .spherical import psi

    t = parse_range(cfg.params["t_range"])
    if np.any(t < 0):
        raise DomainError("radii must be nonnegative", "t>=0")
    vals = psi(SpectralParameter(cfg.params["s"], cfg.params["n"]), t)
    return _table("spherical", [(ti, v.real, v.imag) for ti, v in zip(t, vals)], cfg.fmt)


def cmd_transform(cfg: RunConfig) -> str:
    from .spherical import QuadratureSpec, RadialFunction, spherical_transform

    p = cfg.params
    if not p["width"] > 0:
        raise DomainError("width must be positive", "width>0")
    q = QuadratureSpec(tau_max=p["tau_max"], nodes=p["nodes"], segments=max(1, p["nodes"] // 20),
                       radial_t_max=p["radial_t_max"], radial_nodes=p["radial_nodes"])
    w, a = p["width"], p["alpha"]
    f = RadialFunction.from_callable(lambda t: np.exp(-(np.asarray(t) / w) ** 2) * (1 + a * np.asarray(t) ** 2),
                                     p["n"], np.linspace(0.0, q.radial_t_max, 9))
    F = spherical_transform(f, q)
    return _table("transform", [(tau, v.real, v.imag) for tau, v in zip(F.tau, F.values)], cfg.fmt)


def cmd_fundamental(cfg: RunConfig) -> str:
    from .sobolev import FundamentalSolutionSpec, fundamental_solution
    from .spherical import QuadratureSpec

    p = cfg.params
    q = QuadratureSpec(tau_max=p["tau_max"], nodes=p["nodes"], segments=max(1, p["nodes"] // 20))
    spec = FundamentalSolutionSpec(p["N"], p["lam"], p["n"], q, p["laplacian"])
    t = parse_range(p["t_range"])
    u = fundamental_solution(spec, t)
    return _table("fundamental", [(ti, complex(v).real, complex(v).imag) for ti, v in zip(t, u)], cfg.fmt)


def cmd_eisenstein(cfg: RunConfig) -> str:
    from . import eisenstein2d as e2

    p = cfg.params
    E = e2.EisensteinSeries(p["s"], p["method"], p["trunc"])
    points = p["z"] or [1j]
    out = {"s": _cx(p["s"]), "method": E.method,
           "values": [{"z": _cx(z), "value": _cx(E(z))} for z in points]}
    if p["constant_term"]:
        ct = e2.constant_term(p["s"], e2.DEFAULT_HEIGHTS)
        out["constant_term"] = {"leading": _cx(ct.leading), "c_s": _cx(ct.c_s), "residual": ct.residual,
                                "heights": ct.heights, "scattering": _cx(e2.scattering_coefficient(p["s"]))}
    return _json(out)


def cmd_regularize(cfg: RunConfig) -> str:
    from .eisenstein2d import scattering_coefficient
    from .regularization import regularize, verify_l2_surrogate

    a, b = cfg.params["a"], cfg.params["b"]
    expr = regularize(a, b, {a: scattering_coefficient(a), b: scattering_coefficient(b)})
    out = expr.to_dict()
    if cfg.params.get("verify"):
        rep = verify_l2_surrogate(expr)
        out["surrogate"] = {"sigma_hat": rep.sigma_hat, "classification": rep.classification,
                            "passed": rep.passed, "expected_sigma": rep.expected_sigma}
    return _json(out)


def cmd_finite_verify(cfg: RunConfig) -> str:
    from .finite_model import load_model, run_suite

    p = cfg.params
    model = load_model(p["model"], p.get("exact"))
    lam = None
    if p.get("lam") is not None:
        lam = parse_exact(p["lam"]) if model.exact else parse_complex(p["lam"])
    report = run_suite(model, N=p["N"], lam=lam, seed=cfg.seed, pairs=p["pairs"])
    return _json(report)


def report_bundle(numbers) -> dict:
    from .acceptance import run_all

    results = run_all(numbers)
    return {"criteria": [r.to_dict() for r in results],
            "passed": all(r.passed and r.within_budget for r in results),
            "count": len(results)}


def cmd_report(cfg: RunConfig) -> tuple:
    spec = cfg.params.get("criteria")
    if spec is None:
        numbers = None
    else:
        try:
            numbers = [int(x) for x in str(spec).split(",") if x.strip()]
        except ValueError:
            raise DomainError(f"criteria {spec!r} must be comma-separated integers",
                              "criteria list of integers") from None
        bad = [k for k in numbers if not 1 <= k <= 9]
        if bad:
            raise DomainError(f"unknown criteria {bad}", "criteria in 1..9", criteria=bad)
    summary = report_bundle(numbers)
    for c in summary["criteria"]:
        status = "PASS" if c["passed"] and c["within_budget"] else "FAIL"
        print(f"{status} criterion {c['number']} ({c['name']}): {c['seconds']:.1f}s", file=sys.stderr)
    return _json(summary), 0 if summary["passed"] else 1


COMMANDS = {
    "cfun": cmd_cfun, "spherical": cmd_spherical, "transform": cmd_transform, "fundamental": cmd_fundamental,
    "eisenstein": cmd_eisenstein, "regularize": cmd_regularize, "finite-verify": cmd_finite_verify,
    "report": cmd_report,
}


def _convert(cfg: RunConfig):
    """Parse complex-valued options; done after argparse so errors keep their precondition."""
    p = cfg.params
    for key in COMPLEX_PARAMS:
        if isinstance(p.get(key), str):
            p[key] = parse_complex(p[key])
    if cfg.command == "fundamental":
        p["lam"] = parse_complex(p["lam"])
    if cfg.command == "eisenstein" and p.get("z"):
        p["z"] = [parse_complex(z) for z in p["z"]]


def dispatch(cfg: RunConfig) -> int:
    if cfg.command not in COMMANDS:
        raise CliError(f"unknown subcommand {cfg.command!r}", "known subcommand", command=cfg.command)
    result = COMMANDS[cfg.command](cfg)
    text, status = result if isinstance(result, tuple) else (result, 0)
    _atomic_write(cfg.output, text)
    return status


def _error_payload(exc: Exception, command: Optional[str]) -> dict:
    module = MODULE_OF.get(command or "", "cli")
    if isinstance(exc, RankOneError):
        body = exc.to_dict()
        body["code"] = f"{module}.{exc.code}"
        body.setdefault("precondition", DEFAULT_PRECONDITION.get(exc.code, "valid input"))
    else:
        body = {"code": f"{module}.internal", "message": f"{type(exc).__name__}: {exc}",
                "precondition": "operation completes"}
    return {"error": body}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 2
    except RankOneError as exc:
        sys.stderr.write(json.dumps(_error_payload(exc, None), default=_default) + "\n")
        return 2
    params = {k: v for k, v in vars(ns).items() if k not in ("command", "output", "fmt", "seed")}
    cfg = RunConfig(ns.command, params, ns.output, ns.fmt, ns.seed)
    try:
        _convert(cfg)
        return dispatch(cfg)
    except Exception as exc:  # every failure leaves as structured JSON
        sys.stderr.write(json.dumps(_error_payload(exc, cfg.command), default=_default) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
