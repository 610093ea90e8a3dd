"""Command-line entry point: ``run``, ``table`` and ``snapshot``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .errors import ConfigurationError, SolverError
from .harness import load_config, run, snapshot_values, solve
from .tables import format_table, reproduce_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parabolic-admm",
                                description="Sparse parabolic optimal control by inexact ADMM.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="solve one configuration and write artifacts")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--out", type=Path, help="override out_dir from the config")

    t = sub.add_parser("table", help="reproduce a benchmark table")
    t.add_argument("--id", required=True, type=int, choices=(1, 2, 3, 4))
    t.add_argument("--cap", default="2^-6", help="finest mesh to run: 2^-6, 2^-7 or 2^-8")
    t.add_argument("--out", type=Path, help="directory for table<id>.csv")

    s = sub.add_parser("snapshot", help="solve and dump one field at one time level")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--t", required=True, type=float)
    s.add_argument("--field", required=True, choices=("u", "z", "y"))
    s.add_argument("--out", type=Path, help="file to write; stdout when omitted")
    return p


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg.out_dir = args.out
    report = run(cfg)
    print(f"{report.method}: {report.status} after {report.iterations} iterations "
          f"(Obj={report.last.Obj:.6g}, SRD={report.last.SRD:.6g})")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _cmd_table(args) -> int:
    rows = reproduce_table(args.id, args.cap, args.out)
    print(format_table(rows))
    return EXIT_OK


def _cmd_snapshot(args) -> int:
    cfg = load_config(args.config)
    report, problem = solve(cfg)
    level, full = snapshot_values(problem, report, args.field, args.t)
    g = problem.grid
    lines = [f"# field={args.field}", f"# m={g.m}", f"# n_t={g.n_t}", f"# level={level}",
             f"# t={args.t:.17g}"]
    lines += [" ".join(format(v, ".17g") for v in row) for row in full]
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def main(argv: Optional[List[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "table": _cmd_table, "snapshot": _cmd_snapshot}
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
