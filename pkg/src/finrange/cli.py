"""Command-line experiment runner.

    finrange approximate --config exp.cfg [--out rows.csv]
    finrange verify      --config exp.cfg [--out report.txt]
    finrange optimize    --config exp.cfg [--out menus.csv] [--seed 7]

Exit codes: 0 success, 2 configuration error, 3 the configured mechanism fails
verification, 1 any other library error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from finrange.approx import convergence_run
from finrange.config import ConfigError, ExperimentConfig, dump_config, parse_config
from finrange.errors import FinrangeError
from finrange.measure import expected_revenue
from finrange.mechanism import verify_ir, verify_monotone, verify_sp
from finrange.optimize import TIE_TOL, optimize_menu

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_VERIFY = 3


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, newline="")
    else:
        sys.stdout.write(text)


def _require_mechanism(cfg: ExperimentConfig):
    F = cfg.build_mechanism()
    if F is None:
        raise ConfigError("mechanism", "this command needs a mechanism")
    return F


def _verify_all(cfg: ExperimentConfig, F):
    return {
        "strategy-proofness": verify_sp(F, None, cfg.grid_size, cfg.sp_tol),
        "individual rationality": verify_ir(F, None, cfg.grid_size, cfg.sp_tol),
        "monotonicity": verify_monotone(F, None, cfg.grid_size),
    }


def run_approximate(cfg: ExperimentConfig, out: str | None) -> int:
    F = _require_mechanism(cfg)
    reports = _verify_all(cfg, F)
    failed = [name for name, r in reports.items() if not r.ok]
    if failed:
        for name in failed:
            print(reports[name].describe(name), file=sys.stderr)
        return EXIT_VERIFY
    rows = convergence_run(F, cfg.build_measure(), cfg.n, check=False)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "e_simple", "e_finite", "e_full", "gap", "menu_size"])
    for r in rows:
        writer.writerow([r.n, _fmt(r.e_simple), _fmt(r.e_finite), _fmt(r.e_full), _fmt(r.gap), r.menu_size])
    _emit(buf.getvalue(), out)
    return EXIT_OK


def run_verify(cfg: ExperimentConfig, out: str | None) -> int:
    F = _require_mechanism(cfg)
    reports = _verify_all(cfg, F)
    text = "\n".join(r.describe(name) for name, r in reports.items()) + "\n"
    _emit(text, out)
    return EXIT_OK if all(r.ok for r in reports.values()) else EXIT_VERIFY


def run_optimize(cfg: ExperimentConfig, out: str | None, seed: int) -> int:
    measure = cfg.build_measure()
    F = cfg.build_mechanism()
    k = cfg.m_max
    header = (
        ["m", "revenue"]
        + [f"threshold_{i}" for i in range(1, k + 1)]
        + [f"allocation_{i}" for i in range(1, k + 1)]
        + [f"payment_{i}" for i in range(1, k + 1)]
        + ["comparison"]
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    best = float("-inf")
    for m in range(1, k + 1):
        design, revenue = optimize_menu(m, measure, cfg.restarts, cfg.step_tol, seed)
        best = max(best, revenue)
        pad = [""] * (k - m)
        writer.writerow(
            [m, _fmt(revenue)]
            + [_fmt(x) for x in design.thresholds] + pad
            + [_fmt(x) for x in design.allocations] + pad
            + [_fmt(x) for x in design.payments] + pad
            + [""]
        )
    if F is not None:
        e_full = expected_revenue(F, measure, cfg.quad_tol)
        if best > e_full + TIE_TOL:
            flag = "exceeded"
        elif best >= e_full - TIE_TOL:
            flag = "tie"
        else:
            flag = "below"
        writer.writerow(["F", _fmt(e_full)] + [""] * (3 * k) + [flag])
    _emit(buf.getvalue(), out)
    return EXIT_OK


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finrange", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("approximate", "revenue of finite-range approximations for n in the config"),
        ("verify", "check strategy-proofness, individual rationality and monotonicity"),
        ("optimize", "optimise finite menus of size 1..m_max"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to a key = value config file")
        p.add_argument("--out", help="output path (default: config 'out' key, else stdout)")
        p.add_argument("--seed", type=_seed, default=0, help="optimiser seed")
        p.add_argument("--dump-config", action="store_true", help="print the parsed config and exit")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text())
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return EXIT_OK
    out = args.out or cfg.out or None
    try:
        if args.command == "approximate":
            return run_approximate(cfg, out)
        if args.command == "verify":
            return run_verify(cfg, out)
        return run_optimize(cfg, out, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FinrangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
