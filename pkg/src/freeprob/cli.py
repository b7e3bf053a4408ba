"""``freeprob`` command line: checks, cumulants, densities and transforms.

Exit status: 0 pass (or plain success), 1 fail with witness, 2 inconclusive,
3 usage or input error.  Reports are JSON (``schema: 1``) embedding the
effective configuration, or CSV tables meant for plotting elsewhere.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import FreeProbError
from .reports import FAIL, INCONCLUSIVE, PASS, SCHEMA_VERSION, combine_verdicts, dumps, fmt_float

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
_EXIT = {PASS: EXIT_PASS, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}
TOL_RANGE = (1e-14, 1e-2)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything a command needs; ``to_dict`` is embedded in every report."""

    command: str
    catalog: str | None = None
    params: dict = field(default_factory=dict)
    input_path: str | None = None
    grid: tuple | None = None
    tol: float | None = None
    out: str | None = None
    fmt: str = "json"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.catalog is None) == (self.input_path is None):
            raise UsageError("give exactly one of --catalog or --input")
        if self.tol is not None and not TOL_RANGE[0] <= self.tol <= TOL_RANGE[1]:
            raise UsageError(f"--tol must lie in [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}]")
        if self.fmt not in ("json", "csv"):
            raise UsageError("--format must be json or csv")

    def to_dict(self) -> dict:
        return {"command": self.command, "catalog": self.catalog, "params": dict(self.params),
                "input": self.input_path, "grid": list(self.grid) if self.grid else None,
                "tol": self.tol, "format": self.fmt, **self.extra}


# ---------------------------------------------------------------------------
# argument handling

_NUMBERISH = re.compile(r"^-[0-9.]")


def premerge_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--opt -1`` into ``--opt=-1`` so argparse does not read ``-1`` as a flag."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NUMBERISH.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def parse_complex(text: str) -> complex:
    """Accept ``2i``, ``-1i``, ``i``, ``1.1-0.1i``, ``3`` (``j`` works too)."""
    s = text.strip().replace(" ", "").replace("I", "i").replace("J", "j").replace("i", "j")
    s = re.sub(r"(^|[+-])j", r"\g<1>1j", s)
    try:
        return complex(s)
    except ValueError:
        raise UsageError(f"cannot read {text!r} as a complex number") from None


def parse_value(text: str):
    """Parameter values: integers and fractions stay exact, everything else is float."""
    t = text.strip()
    try:
        if re.fullmatch(r"[+-]?\d+", t):
            return int(t)
        if re.fullmatch(r"[+-]?\d+/\d+", t):
            return Fraction(t)
        return float(t)
    except ValueError:
        raise UsageError(f"cannot read parameter value {text!r}") from None


def parse_extra_params(tokens: list[str]) -> dict:
    """``--name value`` or ``--name=value`` pairs left over after the fixed flags."""
    params = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        if "=" in tok:
            key, val = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens) or tokens[i + 1].startswith("--"):
                raise UsageError(f"parameter {tok} needs a value")
            key, val = tok[2:], tokens[i + 1]
            i += 2
        params[key.replace("-", "_")] = parse_value(val)
    return params


def parse_grid(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError("--grid expects rmin,rmax,per_decade,angles")
    try:
        rmin, rmax = float(parts[0]), float(parts[1])
        per_decade, angles = int(parts[2]), int(parts[3])
    except ValueError:
        raise UsageError(f"cannot read --grid {text!r}") from None
    if not (0 < rmin < rmax and 1 <= per_decade <= 1000 and 1 <= angles <= 4096):
        raise UsageError("--grid values out of range")
    return rmin, rmax, per_decade, angles


def parse_points(text: str, real: bool) -> list:
    """``a:b:step`` ranges (real only) or comma separated values."""
    if ":" in text:
        if not real:
            raise UsageError("ranges a:b:step are only for real points")
        try:
            a, b, h = (float(s) for s in text.split(":"))
        except ValueError:
            raise UsageError(f"cannot read range {text!r}") from None
        if h <= 0 or b < a:
            raise UsageError("range needs a <= b and step > 0")
        n = int(math.floor((b - a) / h + 1e-9)) + 1
        return [round(a + k * h, 12) for k in range(n)]
    vals = [s for s in text.split(",") if s.strip()]
    if real:
        try:
            return [float(v) for v in vals]
        except ValueError:
            raise UsageError(f"cannot read points {text!r}") from None
    return [parse_complex(v) for v in vals]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freeprob", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--catalog", help="catalog measure name; parameters follow as --<name> VALUE")
        sp.add_argument("--input", help="measure file: JSON document or key=value record")
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.add_argument("--format", default="json", choices=("json", "csv"))

    c = sub.add_parser("check", help="run FID / FSD checks", allow_abbrev=False)
    common(c)
    c.add_argument("--fsd", action="store_true", help="check free selfdecomposability (default)")
    c.add_argument("--fid", action="store_true", help="check free infinite divisibility")
    c.add_argument("--routes", default="grid",
                   help="comma list of grid, hankel, levy, awk (default grid)")
    c.add_argument("--order", type=int, default=8, help="largest Hankel order for the hankel route")
    c.add_argument("--grid", help="rmin,rmax,per_decade,angles")
    c.add_argument("--tol", type=float, help="slack for the sign test (default 1e-8)")

    k = sub.add_parser("cumulants", help="moments, free cumulants and Hankel verdicts", allow_abbrev=False)
    common(k)
    k.add_argument("--order", type=int, default=8)

    d = sub.add_parser("density", help="tabulate a density", allow_abbrev=False)
    common(d)
    d.add_argument("--points", required=True, help="a:b:step or comma separated values")

    t = sub.add_parser("transform", help="evaluate a transform at points", allow_abbrev=False)
    common(t)
    t.add_argument("--op", required=True,
                   choices=("cauchy", "cauchy_derivative", "F", "finv", "cumulant", "cprime", "voiculescu"))
    t.add_argument("--point", action="append", default=[], help="complex point, e.g. 2i or 1-0.5i")
    t.add_argument("--points", help="comma separated complex points")
    t.add_argument("--method", help="force an evaluation method")
    t.add_argument("--tol", type=float, help="Newton tolerance")
    return p


def parse_args(argv: list[str]) -> tuple[argparse.Namespace, RunConfig]:
    parser = build_parser()
    ns, rest = parser.parse_known_args(premerge_negative_values(argv))
    params = parse_extra_params(rest)
    if ns.input and params:
        raise UsageError("parameters can only be given together with --catalog")
    extra = {}
    if ns.command == "check":
        props = [name for name, on in (("fid", ns.fid), ("fsd", ns.fsd)) if on] or ["fsd"]
        routes = [r.strip() for r in ns.routes.split(",") if r.strip()]
        bad = set(routes) - {"grid", "hankel", "levy", "awk"}
        if bad:
            raise UsageError(f"unknown routes {sorted(bad)}")
        if not 1 <= ns.order <= 40:
            raise UsageError("--order must lie in [1, 40]")
        extra = {"properties": props, "routes": routes, "order": ns.order}
    elif ns.command == "cumulants":
        if not 1 <= ns.order <= 40:
            raise UsageError("--order must lie in [1, 40]")
        extra = {"order": ns.order}
    elif ns.command == "density":
        extra = {"points": parse_points(ns.points, real=True)}
    elif ns.command == "transform":
        pts = [parse_complex(s) for s in ns.point]
        if ns.points:
            pts += parse_points(ns.points, real=False)
        if not pts:
            raise UsageError("transform needs --point or --points")
        extra = {"op": ns.op, "points": pts, "method": ns.method}
    cfg = RunConfig(
        command=ns.command, catalog=ns.catalog, params=params, input_path=ns.input,
        grid=parse_grid(ns.grid) if getattr(ns, "grid", None) else None,
        tol=getattr(ns, "tol", None), out=ns.out, fmt=ns.format, extra=extra,
    )
    return ns, cfg


# ---------------------------------------------------------------------------
# commands


def load_measure(cfg: RunConfig):
    from .measures import catalog_lookup, measure_from_dict, parse_config

    if cfg.catalog is not None:
        return catalog_lookup(cfg.catalog, cfg.params)
    try:
        with open(cfg.input_path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {cfg.input_path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        name, params = parse_config(text)
        return catalog_lookup(name, {k: parse_value(v) for k, v in params.items()})
    if not isinstance(doc, dict):
        raise UsageError("measure JSON must be an object")
    return measure_from_dict(doc)


def _envelope(cfg: RunConfig, m, body: dict) -> dict:
    return {"schema": SCHEMA_VERSION, "config": cfg.to_dict(), "measure": m.to_dict(), **body}


def _grid(cfg: RunConfig, half: str):
    from .checkers import HalfPlaneGrid

    if cfg.grid is None:
        return HalfPlaneGrid(half=half)
    rmin, rmax, per_decade, angles = cfg.grid
    return HalfPlaneGrid(half=half, r_min=rmin, r_max=rmax, per_decade=per_decade, n_angles=angles)


def cmd_check(cfg: RunConfig):
    from . import checkers
    from .cumulants import fid_cumulant_criterion, fsd_cumulant_criterion
    from .levy import fsd_monotonicity_check
    from .reports import CheckReport

    m = load_measure(cfg)
    slack = cfg.tol if cfg.tol is not None else checkers.DEFAULT_SLACK
    reports, evaluations = [], []
    for prop in cfg.extra["properties"]:
        for route in cfg.extra["routes"]:
            if route == "grid":
                fn = checkers.fid_grid_check_with_values if prop == "fid" else checkers.fsd_grid_check_with_values
                rep, ev = fn(m, _grid(cfg, "upper" if prop == "fid" else "lower"), slack)
                reports.append(rep)
                evaluations.append((rep.check, ev))
            elif route == "hankel":
                if not m.has_moments:
                    raise UsageError(f"{m.name} has no moments; the hankel route needs them")
                crit = fid_cumulant_criterion if prop == "fid" else fsd_cumulant_criterion
                mom = m.moments(2 * cfg.extra["order"])
                compact = m.compact_support is not None
                reps = [crit(mom, n, compact) for n in range(1, cfg.extra["order"] + 1)]
                reports.append(next((r for r in reps if r.failed), reps[-1]))
            elif route == "levy":
                if m.triplet is None:
                    raise UsageError(f"{m.name} has no Levy triplet")
                if prop == "fsd":
                    reports.append(fsd_monotonicity_check(m.triplet.nu))
                else:
                    reports.append(CheckReport("fid_triplet", PASS,
                                               "an explicit free Levy-Khintchine triplet is known",
                                               margin=0.0))
            elif route == "awk":
                from .awk import awk_fsd_verify

                if m.name != "awk":
                    raise UsageError("the awk route applies to --catalog awk only")
                if prop == "fsd":
                    reports.append(awk_fsd_verify(float(m.params.get("c", 0)), slack=slack))
    verdict = combine_verdicts([r.verdict for r in reports])
    if cfg.fmt == "csv":
        return _EXIT[verdict], _check_csv(evaluations)
    body = {"verdict": verdict, "checks": [r.to_dict() for r in reports]}
    return _EXIT[verdict], dumps(_envelope(cfg, m, body))


def _check_csv(evaluations) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "point_re", "point_im", "value_re", "value_im", "failed"])
    for name, ev in evaluations:
        for z, v, failed in ev.rows():
            w.writerow([name, fmt_float(z.real), fmt_float(z.imag),
                        "" if failed else fmt_float(v.real), "" if failed else fmt_float(v.imag),
                        int(failed)])
    return buf.getvalue()


def cmd_cumulants(cfg: RunConfig):
    from .cumulants import fid_cumulant_criterion, free_cumulants_from_moments, fsd_cumulant_criterion

    m = load_measure(cfg)
    if not m.has_moments:
        raise UsageError(f"{m.name} has no moment representation")
    n = cfg.extra["order"]
    mom = m.moments(2 * n)
    kap = free_cumulants_from_moments(mom.truncate(n))
    compact = m.compact_support is not None
    fsd = [fsd_cumulant_criterion(mom, k, compact) for k in range(1, n // 2 + 1)]
    fid = [fid_cumulant_criterion(mom, k, compact) for k in range(1, n // 2 + 1)]
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "moment", "kappa", "n_kappa"])
        for k in range(1, n + 1):
            w.writerow([k, str(mom.entries[k]), str(kap.kappa(k)), str(k * kap.kappa(k))])
        return EXIT_PASS, buf.getvalue()
    body = {
        "moments": [str(x) for x in mom.entries[: n + 1]],
        "free_cumulants": [str(x) for x in kap.entries],
        "weighted_cumulants": [str(x) for x in kap.weighted()],
        "hankel": {
            "fsd": [{"order": k + 1, "verdict": r.verdict, "margin": r.margin,
                     "witness": r.witness} for k, r in enumerate(fsd)],
            "fid": [{"order": k + 1, "verdict": r.verdict, "margin": r.margin,
                     "witness": r.witness} for k, r in enumerate(fid)],
        },
    }
    return EXIT_PASS, dumps(_envelope(cfg, m, body))


def _density_rows(cfg: RunConfig, m):
    from .awk import awk_density
    from .errors import InversionUnstableError
    from .transforms import cauchy_evaluator, stieltjes_inversion

    rows = []
    g = None
    for t in cfg.extra["points"]:
        if m.name == "awk" and m.params.get("c", 0) != -1:
            val = awk_density(float(m.params.get("c", 0)), t)
            rows.append((t, val, 0.0 if float(m.params.get("c", 0)) >= 0 else float("nan"),
                         "closed-form" if float(m.params.get("c", 0)) >= 0 else "stieltjes"))
        elif m.density is not None and m.density.evaluator is not None:
            rows.append((t, float(m.density(t)), 0.0, "density"))
        else:
            g = g or cauchy_evaluator(m)
            try:
                est = stieltjes_inversion(g, t)
                rows.append((t, est.value, est.est_error, "stieltjes"))
            except InversionUnstableError:
                rows.append((t, float("nan"), float("inf"), "stieltjes"))
    return rows


def cmd_density(cfg: RunConfig):
    m = load_measure(cfg)
    if not m.supports_cauchy:
        raise UsageError(f"{m.name} has no representation from which a density can be computed")
    rows = _density_rows(cfg, m)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "value", "est_error", "method"])
        for t, v, e, meth in rows:
            w.writerow([fmt_float(t), fmt_float(v), fmt_float(e), meth])
        return EXIT_PASS, buf.getvalue()
    body = {"rows": [{"t": t, "value": v, "est_error": e, "method": meth} for t, v, e, meth in rows]}
    return EXIT_PASS, dumps(_envelope(cfg, m, body))


def _transform_rows(cfg: RunConfig, m):
    from . import transforms as tr

    opts = tr.DEFAULT_OPTIONS
    if cfg.tol is not None:
        from dataclasses import replace

        opts = replace(opts, newton_tol=cfg.tol)
    op, method = cfg.extra["op"], cfg.extra["method"]
    rows = []
    for z in cfg.extra["points"]:
        if op == "cauchy":
            v = tr.cauchy_eval(m, z, opts, method)
        elif op == "cauchy_derivative":
            v = tr.cauchy_derivative_eval(m, z, opts, method)
        elif op == "F":
            v = tr.reciprocal_cauchy_eval(m, z, opts, method)
        elif op == "finv":
            om = tr.invert_reciprocal_cauchy(m, z, opts)
            v = tr.TransformValue(om, opts.newton_tol * (1 + abs(om)), tr.NEWTON)
        elif op == "cumulant":
            v = tr.free_cumulant_transform_eval(m, z, opts)
        elif op == "cprime":
            v = tr.free_cumulant_transform_derivative_eval(m, z, opts)
        else:
            v = tr.voiculescu_eval(m, z, opts)
        rows.append((complex(z), complex(v.value), float(v.est_error), v.method))
    return rows


def cmd_transform(cfg: RunConfig):
    m = load_measure(cfg)
    rows = _transform_rows(cfg, m)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["point_re", "point_im", "value_re", "value_im", "est_error", "method"])
        for z, v, e, meth in rows:
            w.writerow([fmt_float(z.real), fmt_float(z.imag), fmt_float(v.real), fmt_float(v.imag),
                        fmt_float(e), meth])
        return EXIT_PASS, buf.getvalue()
    body = {"rows": [{"point": z, "value": v, "est_error": e, "method": meth}
                     for z, v, e, meth in rows]}
    return EXIT_PASS, dumps(_envelope(cfg, m, body))


COMMANDS = {"check": cmd_check, "cumulants": cmd_cumulants, "density": cmd_density,
            "transform": cmd_transform}


def run(argv: list[str]) -> tuple[int, str]:
    """Execute a command; returns ``(exit status, output text)``."""
    _, cfg = parse_args(argv)
    return COMMANDS[cfg.command](cfg)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        _, cfg = parse_args(argv)
        status, text = COMMANDS[cfg.command](cfg)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_USAGE if exc.code not in (0, None) else 0
    except (UsageError, FreeProbError, ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else exc
        print(f"freeprob: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


__all__ = ["RunConfig", "main", "run", "parse_complex", "premerge_negative_values",
           "parse_points", "parse_grid", "EXIT_PASS", "EXIT_FAIL", "EXIT_INCONCLUSIVE", "EXIT_USAGE"]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
