"""Command-line front end: ``design``, ``evaluate``, ``analyze`` and ``convert``.

Progress goes to stderr; stdout carries machine-readable summaries only.
Every command writes the resolved configuration into its output directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    dmin_bound,
    dmin_exact,
    edge_distributions,
    exit_cnd,
    exit_vnd,
    sigma_channel,
    structure_report,
)
from .analysis.dmin import DEFAULT_K_LIMIT
from .channels import ChannelSpec
from .codes import AlistError, format_alist, format_dense, parse_alist, parse_dense, profile
from .decoder import DecoderConfig
from .evaluation import StoppingRule, reports_to_csv, sweep
from .genalg import GaConfig, run

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3
WORKERS_ENV = "GENLDPC_WORKERS"
TEMPLATES = ("none", "ira", "tbira", "ptbira")

log = logging.getLogger("genldpc")


class ConfigError(Exception):
    pass


def _load_json(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _write_config(out: Path, resolved: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(resolved, indent=2, sort_keys=True) + "\n")


def _read_matrix(path: str):
    text = Path(path).read_text()
    return parse_alist(text) if not path.endswith((".txt", ".dense")) else parse_dense(text)


# -- design -------------------------------------------------------------------------

def resolve_design(args) -> GaConfig:
    d = _load_json(args.config)
    d.setdefault("workers", _default_workers())
    if args.seed is not None:
        d["seed"] = args.seed
    if args.workers is not None:
        d["workers"] = args.workers
    if args.template is not None:
        d["template"] = args.template
    channel = dict(d.get("channel", {}))
    if args.channel is not None:
        channel["kind"] = args.channel
    if args.ebno is not None:
        channel["ebno_db"] = args.ebno
    if channel:
        d["channel"] = channel
    if args.max_iter is not None:
        d["decoder"] = {**d.get("decoder", {}), "max_iterations": args.max_iter}
    try:
        return GaConfig.from_dict(d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_design(args) -> int:
    cfg = resolve_design(args)
    out = Path(args.out)
    resolved = cfg.to_dict()
    resolved.pop("workers")  # artifacts do not depend on it
    _write_config(out, resolved)
    result = run(cfg, out, resume=args.resume)
    summary = {"best_bler": result.best.fitness, "epochs": len(result.log),
               "num_edges": result.best.matrix.num_edges, "best_alist": str(out / "best.alist")}
    print(json.dumps(summary))
    return EXIT_OK


# -- evaluate -----------------------------------------------------------------------

def cmd_evaluate(args) -> int:
    d = _load_json(args.config)
    try:
        H = _read_matrix(args.alist)
    except AlistError as exc:
        print(f"error: {args.alist}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    channel = d.get("channel", {}).get("kind", "awgn") if args.channel is None else args.channel
    grid = args.ebno if args.ebno is not None else d.get("ebno", [])
    try:
        dec = DecoderConfig.from_dict({**d.get("decoder", {}),
                                       **({"max_iterations": args.max_iter} if args.max_iter is not None else {})})
        budget = {**d.get("budget", {})}
        if args.min_errors is not None:
            budget["min_block_errors"] = args.min_errors
        if args.max_frames is not None:
            budget["max_frames"] = args.max_frames
        rule = StoppingRule.from_dict(budget)
        specs = [ChannelSpec(channel, float(e)) for e in grid]
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    seed = args.seed if args.seed is not None else int(d.get("seed", 0))
    out = Path(args.out)
    _write_config(out, {"alist": str(args.alist), "channel": channel, "ebno": [float(e) for e in grid],
                        "decoder": dec.to_dict(), "budget": rule.to_dict(), "seed": seed})
    reports = []
    for r in sweep(H, specs, dec, rule, seed):
        log.info("Eb/N0 %.2f dB: BLER %.3g (%d/%d), N_it,avg %.3f", r.ebno_db, r.bler, r.block_errors,
                  r.frames_sent, r.n_it_avg)
        reports.append(r)
    text = reports_to_csv(reports, out / "evaluate.csv")
    sys.stdout.write(text)
    return EXIT_OK


# -- analyze ------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    try:
        H = _read_matrix(args.alist)
    except AlistError as exc:
        print(f"error: {args.alist}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    _write_config(out, {"alist": str(args.alist), "which": args.which, "effort": args.effort,
                        "ebno": args.ebno, "short_cycle_bound": args.short_cycle})
    if args.which == "dmin":
        k = profile(H).k
        res = dmin_exact(H) if k <= DEFAULT_K_LIMIT else dmin_bound(H, args.effort)
        text = res.to_json()
        (out / "dmin.json").write_text(text + "\n")
        print(text)
    elif args.which == "exit":
        lam, rho = edge_distributions(H)
        grid = np.linspace(0.0, 1.0, 101)
        rate = profile(H).design_rate
        vnd = exit_vnd(lam, sigma_channel(args.ebno, rate), grid)
        cnd = exit_cnd(rho, grid)
        (out / "exit_vnd.csv").write_text(vnd.to_csv())
        (out / "exit_cnd.csv").write_text(cnd.to_csv())
        print(json.dumps({"vnd": str(out / "exit_vnd.csv"), "cnd": str(out / "exit_cnd.csv"),
                          "lambda": lam, "rho": rho}))
    else:
        rep = structure_report(H, args.short_cycle)
        (out / "structure.csv").write_text(rep.to_csv())
        print(json.dumps(rep.as_dict()))
    return EXIT_OK


# -- convert ------------------------------------------------------------------------

def cmd_convert(args) -> int:
    src, dst = args.input, args.output
    try:
        H = _read_matrix(src)
    except AlistError as exc:
        print(f"error: {src}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = format_alist(H) if dst.endswith(".alist") else format_dense(H)
    Path(dst).write_text(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genldpc", description=__doc__.splitlines()[0])
    p.add_argument("-q", "--quiet", action="store_true", help="suppress progress output")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default):
        sp.add_argument("--config", help="JSON configuration (flags override it)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--channel", choices=("awgn", "rayleigh"))
        sp.add_argument("--max-iter", type=int, dest="max_iter")

    d = sub.add_parser("design", help="run the genetic code design")
    common(d, "design-out")
    d.add_argument("--ebno", type=float, help="design Eb/N0 in dB")
    d.add_argument("--template", choices=TEMPLATES)
    d.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    d.add_argument("--resume", action="store_true", help="continue from state.json in --out")
    d.set_defaults(func=cmd_design)

    e = sub.add_parser("evaluate", help="BLER/BER sweep of an alist code")
    e.add_argument("alist")
    common(e, "evaluate-out")
    e.add_argument("--ebno", type=float, nargs="+", help="Eb/N0 grid in dB")
    e.add_argument("--min-errors", type=int, dest="min_errors")
    e.add_argument("--max-frames", type=int, dest="max_frames")
    e.set_defaults(func=cmd_evaluate)

    a = sub.add_parser("analyze", help="minimum distance, EXIT curves or structure report")
    a.add_argument("alist")
    a.add_argument("--which", choices=("dmin", "exit", "structure"), required=True)
    a.add_argument("--out", default="analyze-out")
    a.add_argument("--effort", type=int, default=2_000_000, help="node budget for the d_min search")
    a.add_argument("--ebno", type=float, default=2.0, help="channel Eb/N0 for the VND curve")
    a.add_argument("--short-cycle", type=int, default=4, dest="short_cycle", help="cycle length counted as short")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("convert", help="alist <-> dense text (by output extension)")
    c.add_argument("input")
    c.add_argument("output")
    c.set_defaults(func=cmd_convert)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if args.command != "design" else EXIT_IO
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
