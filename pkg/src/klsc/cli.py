"""Command-line front end.

Exit status: 0 on success, 2 on validation failures (bad input, pair not
admissible, failed example checks), 1 on internal errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .errors import KlscError, ValidationError
from .io import dumps, write_atomic

MIN_GRID = 16


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int = 2
    annulus: tuple = (0.0, math.inf)
    expressions: dict = field(default_factory=dict)
    C: str = "0"
    basepoint: str = "canonical"
    scale: float = 1.0
    offset: float = 0.0
    grid: int = 100
    normalization: str = "kahler"
    output: str | None = None
    metric_output: str | None = None
    out_dir: str | None = None
    which: str = "all"
    quad_tol: float | None = None
    order: int | None = None
    as_json: bool = False

    def validate(self):
        if self.grid < MIN_GRID:
            raise ValidationError(f"grid size must be at least {MIN_GRID}")
        if self.quad_tol is not None and not self.quad_tol > 0:
            raise ValidationError("tolerances must be positive")
        if self.n < 2:
            raise ValidationError("complex dimension n must be at least 2")


def _annulus_arg(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _basepoint(text: str):
    t = text.strip().lower()
    if t == "canonical":
        return None
    if t in ("inf", "infinity"):
        return math.inf
    return float(t)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="klsc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"klsc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_domain=True):
        sp.add_argument("--json", dest="as_json", action="store_true", help="machine-readable report on stdout")
        sp.add_argument("--quad-tol", type=float, default=None, help="relative quadrature tolerance")
        if need_domain:
            sp.add_argument("--n", type=int, default=2, help="complex dimension")
            sp.add_argument("--annulus", nargs=2, type=_annulus_arg, default=[0.0, math.inf],
                            metavar=("ALPHA", "BETA"), help="bounds on |x|^2; BETA may be inf")
            sp.add_argument("--grid", type=int, default=100, help="number of sweep points")

    sp = sub.add_parser("curvature", help="S and S_C sweep of a metric given by E and F")
    common(sp)
    sp.add_argument("--E", required=True)
    sp.add_argument("--F", required=True)
    sp.add_argument("--normalization", choices=["kahler", "line-element"], default="kahler")
    sp.add_argument("--output", "-o", help="CSV file (default: stdout)")

    sp = sub.add_parser("klsc-from-potential", help="conformal Klsc metric from a Kähler potential")
    common(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--dphi", help="derivative phi'(z) of the potential")
    g.add_argument("--phi", help="the potential phi(z)")
    sp.add_argument("--basepoint", default="canonical")
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("--offset", type=float, default=0.0)
    sp.add_argument("--output", "-o", help="defect sweep CSV (default: none)")
    sp.add_argument("--metric-output", help="metric JSON file (default: stdout)")

    for name, helptext in (("klsc-from-pair", "Klsc metric from an admissible pair (F, C)"),
                           ("admissible", "admissibility verdict for a pair (F, C)"),
                           ("regularity", "regularity report at the origin for a pair (F, C)")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--F", required=True)
        sp.add_argument("--C", default="0")
        sp.add_argument("--basepoint", default="canonical")
        if name == "klsc-from-pair":
            sp.add_argument("--output", "-o", help="defect sweep CSV (default: none)")
            sp.add_argument("--metric-output", help="metric JSON file (default: stdout)")
        if name == "regularity":
            sp.add_argument("--order", type=int, default=None, help="series truncation order in z")

    sp = sub.add_parser("examples", help="run the worked examples with pass/fail checks")
    common(sp, need_domain=False)
    sp.add_argument("--which", default="all")
    sp.add_argument("--out-dir", help="write one CSV per defect sweep and report.json here")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    exprs = {k: getattr(ns, k) for k in ("E", "F", "dphi", "phi") if getattr(ns, k, None) is not None}
    return RunConfig(
        command=ns.command,
        n=getattr(ns, "n", 2),
        annulus=tuple(getattr(ns, "annulus", (0.0, math.inf))),
        expressions=exprs,
        C=str(getattr(ns, "C", "0")),
        basepoint=getattr(ns, "basepoint", "canonical"),
        scale=getattr(ns, "scale", 1.0),
        offset=getattr(ns, "offset", 0.0),
        grid=getattr(ns, "grid", 100),
        normalization=getattr(ns, "normalization", "kahler"),
        output=getattr(ns, "output", None),
        metric_output=getattr(ns, "metric_output", None),
        out_dir=getattr(ns, "out_dir", None),
        which=getattr(ns, "which", "all"),
        quad_tol=ns.quad_tol,
        order=getattr(ns, "order", None),
        as_json=ns.as_json,
    )


def _emit(text: str, path: str | None, out) -> None:
    if path:
        write_atomic(path, text)
    else:
        out.write(text)


def _domain(cfg: RunConfig):
    from .radial_expr import Annulus

    return Annulus(*cfg.annulus)


def _pair(cfg: RunConfig):
    from .construction import AdmissiblePair

    try:
        C = Fraction(cfg.C)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"constant C must be a number, got {cfg.C!r}") from None
    return AdmissiblePair.from_strings(cfg.n, cfg.expressions["F"], C, _domain(cfg), _basepoint(cfg.basepoint))


def _sweep_csv(metric, pieces, grid):
    from .curvature import curvature_sweep, sweep_to_csv

    samples = []
    for piece in pieces:
        samples.extend(curvature_sweep(metric.restrict(piece), piece.grid(grid)))
    return sweep_to_csv(samples), samples


def run(cfg: RunConfig, out=None) -> int:
    """Execute one command; returns the exit status."""
    out = out or sys.stdout
    cfg.validate()
    if cfg.quad_tol is not None:
        os.environ["KLSC_QUAD_TOL"] = repr(cfg.quad_tol)

    if cfg.command == "curvature":
        from .curvature import curvature_sweep, sweep_to_csv
        from .geometry import HermitianMetricRadial

        dom = _domain(cfg)
        m = HermitianMetricRadial.from_strings(cfg.n, dom, cfg.expressions["E"], cfg.expressions["F"])
        samples = curvature_sweep(m, dom.grid(cfg.grid), cfg.normalization)
        if cfg.as_json:
            _emit(dumps({"metric": m.to_json(), "normalization": cfg.normalization,
                         "samples": [{"z": s.z, "S": s.S, "S_C": s.S_C, "defect": s.defect} for s in samples]}),
                  cfg.output, out)
        else:
            _emit(sweep_to_csv(samples), cfg.output, out)
        return 0

    if cfg.command == "klsc-from-potential":
        from .construction import klsc_from_potential
        from .geometry import KahlerPotentialDeriv

        dom = _domain(cfg)
        if "phi" in cfg.expressions:
            pot = KahlerPotentialDeriv.from_potential(cfg.n, dom, cfg.expressions["phi"])
        else:
            pot = KahlerPotentialDeriv.from_string(cfg.n, dom, cfg.expressions["dphi"])
        con = klsc_from_potential(pot, _basepoint(cfg.basepoint), cfg.scale, cfg.offset)
        csv_text, samples = _sweep_csv(con.metric, con.pieces or (dom,), cfg.grid)
        report = {
            "metric": con.metric.to_json(),
            "conformalFactorSquared": str(con.conformalFactorSquared),
            "gamma": con.gamma,
            "pieces": [p.to_json() for p in con.pieces],
            "maxRelativeDefect": max(s.relative_defect for s in samples),
        }
        if cfg.output:
            write_atomic(cfg.output, csv_text)
        _emit(dumps(report), cfg.metric_output, out)
        return 0

    if cfg.command in ("klsc-from-pair", "admissible"):
        from .construction import build_klsc_metric

        pair = _pair(cfg)
        verdict = pair.verdict
        if cfg.command == "admissible":
            report = {"pair": pair.to_json(), **verdict.to_json()}
            out.write(dumps(report) if cfg.as_json else
                      ("admissible\n" if verdict.admissible else
                       f"not admissible: violation at z = {verdict.violation!r}\n"))
            return 0 if verdict.admissible else 2
        con = build_klsc_metric(pair)
        csv_text, samples = _sweep_csv(con.metric, (pair.domain,), cfg.grid)
        report = {
            "pair": pair.to_json(),
            "metric": con.metric.to_json(),
            "E(1)": float(con.metric.E(1.0)) if pair.domain.contains(1.0) else None,
            "maxRelativeDefect": max(s.relative_defect for s in samples),
            "margin": verdict.margin,
        }
        if cfg.output:
            write_atomic(cfg.output, csv_text)
        _emit(dumps(report), cfg.metric_output, out)
        return 0

    if cfg.command == "regularity":
        from .asymptotics import regularity_class

        rep = regularity_class(_pair(cfg), cfg.order)
        if cfg.as_json:
            out.write(rep.dumps() + "\n")
        else:
            out.write(f"k = {rep.k}, class {rep.smoothnessClass}, log obstruction {rep.logObstruction}, "
                      f"quotient order {rep.quotientOrder}\n")
        return 0

    if cfg.command == "examples":
        from .examples_suite import examples_suite

        results = examples_suite(cfg.which)
        if cfg.out_dir:
            from .curvature import sweep_to_csv

            os.makedirs(cfg.out_dir, exist_ok=True)
            for r in results:
                for i, (label, samples) in enumerate(r.sweeps.items()):
                    write_atomic(os.path.join(cfg.out_dir, f"{r.name}-sweep{i}.csv"), sweep_to_csv(samples))
            write_atomic(os.path.join(cfg.out_dir, "report.json"), dumps([r.to_json() for r in results]))
        if cfg.as_json:
            out.write(dumps([r.to_json() for r in results]))
        else:
            for r in results:
                for k, v in r.data.items():
                    if not isinstance(v, dict):
                        out.write(f"{r.name}: {k} = {v!r}\n")
                out.write("\n".join(r.lines()) + "\n")
        return 0 if all(r.passed for r in results) else 2

    raise ValueError(f"unknown command {cfg.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return run(config_from_args(ns))
    except KlscError as exc:
        print(f"klsc: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # internal failure
        print(f"klsc: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
