"""Command-line front end.

Exit codes: 0 success, 1 usage or I/O error, 2 infinite RLD value,
3 verification suite failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .bounds import crb_channel_multi, crb_state_multi, heisenberg_verdict
from .families import ChannelFamilyPoint, validate_weight
from .gadc import SWEEP_COLUMNS, gadc_sweep
from .linalg import RANK_TOL
from .modelspec import ModelSpec, SpecError, parse_model_spec
from .rld import rld_finiteness_channel, rld_finiteness_state, rld_value_channel, rld_value_state
from .sdp import build_channel_primal, build_state_primal, cross_check
from .sld import helstrom_value, optimize_probe
from .suites import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_INFINITE, EXIT_SUITE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    return "%.17g" % x


def worker_count() -> int:
    cap = os.environ.get("QFI_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"QFI_THREADS must be an integer, got {cap!r}") from None
    return n


def parse_weight(text: str | None, n_params: int, scale: float = 1.0) -> np.ndarray:
    """Inline ``"1,1;1,3"`` (rows split by ';'), a matrix file, or identity/D when omitted."""
    if text is None:
        w = np.eye(n_params) / n_params
    elif Path(text).is_file():
        m = fileio.read_matrix(text)
        if np.max(np.abs(m.imag), initial=0.0) > 0:
            raise UsageError("weight matrix must be real")
        w = m.real
    else:
        try:
            w = np.array([[float(v) for v in row.split(",")] for row in text.split(";")])
        except ValueError:
            raise UsageError(f"cannot parse weight {text!r}; expected e.g. '1,1;1,3'") from None
        if w.ndim != 2:
            raise UsageError("weight rows must have equal length")
    if scale <= 0 or not math.isfinite(scale):
        raise UsageError("--weight-scale must be a positive number")
    w = validate_weight(scale * w)
    if w.shape != (n_params, n_params):
        raise UsageError(f"weight is {w.shape[0]}x{w.shape[1]} but the model has {n_params} parameters")
    return w


def parse_grid(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            n = int(count)
            if n < 0:
                raise ValueError
            return [float(v) for v in np.linspace(float(start), float(stop), n)]
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}; use start:stop:count or a comma list") from None


def _load_model(args) -> tuple[ModelSpec, object]:
    spec = parse_model_spec(args.model)
    if args.h is not None:
        if spec.kind != "builtin":
            raise UsageError("--h needs a builtin model")
        spec = spec.with_h(args.h)
    return spec, spec.build()


def _emit(report: dict, fmt_name: str, out) -> None:
    if fmt_name == "json":
        out.write(json.dumps(report, indent=2) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(report)
    w.writerow(fmt(v) if isinstance(v, float) else str(v) for v in report.values())


def cmd_value(args) -> int:
    spec, fam = _load_model(args)
    w = parse_weight(args.weight, fam.n_params, args.weight_scale)
    is_channel = isinstance(fam, ChannelFamilyPoint)
    if is_channel:
        finite = rld_finiteness_channel(fam, w, args.rank_tol)
        value = rld_value_channel(fam, w, args.rank_tol)
        crb = crb_channel_multi(args.n_uses, fam, w)
        verdict = heisenberg_verdict(fam, w, args.rank_tol).value
    else:
        finite = rld_finiteness_state(fam, w, args.rank_tol)
        value = rld_value_state(fam, w, args.rank_tol)
        crb = crb_state_multi(args.n_uses, fam, w)
        verdict = "Finite" if finite else "Infinite"
    report = {
        "model": spec.render(),
        "family": "channel" if is_channel else "state",
        "n_params": fam.n_params,
        "deriv_mode": spec.deriv_mode,
        "rld_value": value,
        "finite": finite,
        "verdict": verdict,
        "n_uses": crb.n,
        "weight_scale": crb.weight_scale,
        "crb_bound": crb.bound,
    }
    if args.sld:
        if is_channel:
            p_star, h = optimize_probe(fam, w=w, rank_tol=args.rank_tol)
            report["p_star"] = p_star
        else:
            h = helstrom_value(fam, w, args.rank_tol)
        report["sld_value"] = 1.0 / h if h > 0 else math.inf
    if args.sdp:
        r = cross_check(fam, w, rank_tol=args.rank_tol)
        report.update(
            sdp_verdict=r.verdict,
            sdp_primal=r.primal,
            sdp_dual=r.dual,
            sdp_primal_gap=r.primal_gap,
            sdp_deviation=r.deviation,
        )
    if args.dump_sdp:
        prob = (build_channel_primal if is_channel else build_state_primal)(fam, w)
        Path(args.dump_sdp).write_text(prob.to_json())
    if args.format == "svg":
        raise UsageError("svg output is only available for sweeps")
    _emit(report, args.format, sys.stdout)
    return EXIT_OK if finite else EXIT_INFINITE


def cmd_sweep(args) -> int:
    spec = parse_model_spec(args.model)
    if spec.name != "gadc":
        raise UsageError("sweeps are available for the builtin gadc model")
    if args.sweep not in spec.params:
        raise UsageError(f"sweep axis must be one of {', '.join(spec.params)}, got {args.sweep!r}")
    grid = parse_grid(args.grid)
    w = parse_weight(args.weight, 2, args.weight_scale)
    fixed = spec.params
    points = [
        (v, fixed["N"]) if args.sweep == "gamma" else (fixed["gamma"], v) for v in grid
    ]
    rows = gadc_sweep(points, w, args.probe_grid, worker_count())
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(SWEEP_COLUMNS)
    for r in rows:
        wr.writerow(fmt(getattr(r, c)) if c != "status" else r.status for c in SWEEP_COLUMNS)
    text = buf.getvalue()
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)
    plot_path = args.plot
    if args.format == "svg" and plot_path is None:
        if not args.out:
            raise UsageError("--format svg needs --out or --plot")
        plot_path = str(Path(args.out).with_suffix(".svg"))
    if plot_path:
        from .plotting import plot_sweep

        try:
            plot_sweep(rows, plot_path, args.sweep, f"{spec.render()} sweep")
        except OSError as exc:
            raise OSError(f"cannot write {plot_path}: {exc.strerror or exc}") from exc
    bad = sum(not r.ok for r in rows)
    if bad:
        print(f"warning: {bad} grid point(s) flagged", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    if args.format == "svg":
        raise UsageError("svg output is only available for sweeps")
    rep = run_suite(args.suite, args.seed, args.count, worker_count())
    if rep.warning:
        print(f"warning: {rep.warning}", file=sys.stderr)
    summary = {
        "suite": rep.name,
        "seed": rep.seed,
        "count": rep.count,
        "passed": rep.passed,
        f"{rep.summary_kind}_{rep.metric_name}": rep.summary,
        "failures": sum(not r.passed for r in rep.results),
    }
    if args.out:
        try:
            Path(args.out).write_text("\n".join(rep.to_csv_lines()) + "\n")
        except OSError as exc:
            raise OSError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    _emit(summary, args.format, sys.stdout)
    return EXIT_OK if rep.passed else EXIT_SUITE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rldfisher", description="RLD Fisher information values and bounds")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--model", required=True, help="kind:name:key=val,... model spec")
        sp.add_argument("--weight", help="inline 'a,b;c,d' or matrix file (default I/D)")
        sp.add_argument("--weight-scale", type=float, default=1.0, help="prefactor for --weight")
        sp.add_argument("--rank-tol", type=float, default=RANK_TOL)
        sp.add_argument("--h", type=float, default=None, help="finite-difference step")

    v = sub.add_parser("value", help="RLD value, verdict and Cramer-Rao bound")
    common(v)
    v.add_argument("--n-uses", type=int, default=1)
    v.add_argument("--sld", action="store_true", help="also report the SLD value")
    v.add_argument("--sdp", action="store_true", help="cross-check with the SDPs")
    v.add_argument("--dump-sdp", metavar="PATH", help="write the primal SDP as JSON")
    v.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    v.set_defaults(func=cmd_value)

    s = sub.add_parser("sweep", help="GADC sweep of RLD and SLD values")
    common(s)
    s.add_argument("--sweep", default="gamma", help="parameter to sweep (gamma or N)")
    s.add_argument("--grid", default="0.05:0.95:19", help="start:stop:count or comma list")
    s.add_argument("--out", help="CSV output path (stdout when omitted)")
    s.add_argument("--plot", help="figure path (.svg, .png or .pdf)")
    s.add_argument("--probe-grid", type=int, default=201)
    s.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("verify", help="run a randomized property suite")
    r.add_argument("--suite", required=True, choices=tuple(SUITES))
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--count", type=int, default=100)
    r.add_argument("--out", help="per-instance CSV report")
    r.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    r.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n_uses", 1) < 1:
        parser.error("--n-uses must be a positive integer")
    try:
        return args.func(args)
    except (UsageError, SpecError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"rldfisher: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
