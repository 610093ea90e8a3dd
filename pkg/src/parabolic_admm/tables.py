"""Reproduce the published benchmark tables side by side with computed values."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from .admm import AdmmParams, SolveReport, algebraic, geometric, run_admm_exact, run_inadmm, run_pgd
from .errors import ConfigurationError, SolverError
from .problems import discretize, make_problem

log = logging.getLogger(__name__)

# relative tolerances used for the verdict column
OBJ_RTOL = 0.02
ERR_RTOL = 0.12
ITER_ATOL = 3
PGD_ITER_RTOL = 0.4


@dataclass(frozen=True)
class RowSpec:
    method: str  # InADMM | ADMMCG | PGD
    theta: Optional[str]  # "k3", "2", "1.4", "1.3" or None
    m: int
    problem: str
    gamma_s: Optional[float] = None
    betas: Tuple[float, float] = (2.0, 3.0)
    # published values; None where the table has no entry
    iterations: Optional[int] = None
    err_u: Optional[float] = None
    time_s: Optional[float] = None
    cg: Optional[Tuple[float, int]] = None
    obj: Optional[float] = None
    srd: Optional[float] = None
    failed: bool = False  # published as "-"

    @property
    def h_label(self) -> str:
        return f"2^-{int(round(math.log2(self.m)))}"

    @property
    def theta_label(self) -> str:
        return {None: "", "k3": "theta0/k^3", "2": "theta0/2^k", "1.4": "theta0/1.4^k",
                "1.3": "theta0/1.3^k"}[self.theta]


@dataclass
class TableRow:
    method: str
    theta: str
    h: str
    tau: str
    gamma_s: Optional[float]
    betas: Tuple[float, float]
    iterations: Optional[int] = None
    err_u: Optional[float] = None
    wall_s: Optional[float] = None
    cg_ave: Optional[float] = None
    cg_max: Optional[int] = None
    obj: Optional[float] = None
    srd: Optional[float] = None
    status: str = ""
    verdict: str = ""
    published: Optional[RowSpec] = None
    notes: List[str] = field(default_factory=list)


def _rows_table1() -> List[RowSpec]:
    P = "example1"
    rows = [
        RowSpec("InADMM", "k3", 64, P, iterations=19, err_u=4.71e-3, time_s=7.44, cg=(5.68, 8), obj=3.36e-2, srd=7.94e-4),
        RowSpec("InADMM", "k3", 128, P, iterations=19, err_u=1.19e-3, time_s=82.95, cg=(5.79, 8), obj=3.40e-2, srd=8.01e-4),
        RowSpec("InADMM", "k3", 256, P, iterations=20, err_u=2.99e-4, time_s=1011.66, cg=(5.10, 8), obj=3.41e-2, srd=8.04e-4),
        RowSpec("InADMM", "2", 64, P, iterations=20, err_u=4.71e-3, time_s=10.11, cg=(8.55, 15), obj=3.36e-2, srd=7.94e-4),
        RowSpec("InADMM", "2", 128, P, iterations=20, err_u=1.20e-3, time_s=120.65, cg=(8.65, 15), obj=3.40e-2, srd=8.02e-4),
        RowSpec("InADMM", "2", 256, P, iterations=21, err_u=2.96e-4, time_s=1642.39, cg=(9.14, 16), obj=3.41e-2, srd=8.04e-4),
        RowSpec("ADMMCG", None, 64, P, iterations=15, err_u=4.69e-3, time_s=25.84, cg=(31.13, 52), obj=3.36e-2, srd=7.94e-4),
        RowSpec("ADMMCG", None, 128, P, iterations=15, err_u=1.18e-3, time_s=261.27, cg=(29.13, 51), obj=3.40e-2, srd=8.02e-4),
        RowSpec("ADMMCG", None, 256, P, iterations=15, err_u=2.88e-4, time_s=2977.55, cg=(27.87, 48), obj=3.41e-2, srd=8.03e-4),
        RowSpec("PGD", None, 64, P, iterations=288, err_u=5.77e-3, time_s=86.57, obj=3.36e-2, srd=7.95e-4),
        RowSpec("PGD", None, 128, P, iterations=700, err_u=1.24e-3, time_s=1907.75, obj=3.40e-2, srd=8.02e-4),
        RowSpec("PGD", None, 256, P, failed=True),
        # computed only: coarse companion row for the mesh-convergence ratio
        RowSpec("InADMM", "2", 32, P),
    ]
    return rows


def _rows_table2() -> List[RowSpec]:
    P, b = "example2", (8.0, 8.0)
    return [
        RowSpec("InADMM", "k3", 64, P, betas=b, iterations=34, time_s=6.83, cg=(4.56, 8), obj=1.19e3, srd=0.816),
        RowSpec("InADMM", "k3", 128, P, betas=b, iterations=34, time_s=60.43, cg=(3.94, 6), obj=1.21e3, srd=0.822),
        RowSpec("InADMM", "k3", 256, P, betas=b, iterations=35, time_s=945.93, cg=(3.66, 5), obj=1.22e3, srd=0.825),
        RowSpec("InADMM", "1.4", 64, P, betas=b, iterations=38, time_s=4.89, cg=(2.68, 4), obj=1.19e3, srd=0.816),
        RowSpec("InADMM", "1.4", 128, P, betas=b, iterations=39, time_s=51.26, cg=(2.69, 5), obj=1.21e3, srd=0.822),
        RowSpec("InADMM", "1.4", 256, P, betas=b, iterations=39, time_s=751.21, cg=(2.64, 5), obj=1.22e3, srd=0.825),
        RowSpec("ADMMCG", None, 64, P, betas=b, iterations=35, time_s=38.65, cg=(31.46, 79), obj=1.19e3, srd=0.816),
        RowSpec("ADMMCG", None, 128, P, betas=b, iterations=35, time_s=356.724, cg=(22.63, 38), obj=1.21e3, srd=0.822),
        RowSpec("ADMMCG", None, 256, P, betas=b, iterations=35, time_s=4370.60, cg=(21.03, 30), obj=1.22e3, srd=0.825),
        RowSpec("PGD", None, 64, P, betas=b, iterations=405, time_s=128.63, obj=1.19e3, srd=0.818),
        RowSpec("PGD", None, 128, P, betas=b, iterations=488, time_s=1476.04, obj=1.21e3, srd=0.824),
        RowSpec("PGD", None, 256, P, betas=b, failed=True),
    ]


def _rows_table3() -> List[RowSpec]:
    P = "example3"
    out = []
    ref = {0.1: (3.43e-2, 1.02e-3), 0.5: (4.22e-2, 1.88e-3), 5.0: (2.59e-1, 7.74e-3), 10.0: (5.06e-1, 1.10e-2)}
    data = {
        ("InADMM", "k3"): [(18, 7.74, (5.50, 9)), (25, 13.64, (5.72, 8)), (65, 26.88, (5.89, 7)), (111, 46.86, (5.53, 7))],
        ("InADMM", "2"): [(21, 17.06, (9.29, 19)), (23, 21.51, (10.83, 21)), (66, 61.54, (11.02, 17)), (111, 83.86, (8.45, 16))],
        ("ADMMCG", None): [(20, 42.47, (26.00, 46)), (22, 49.96, (28.23, 46)), (61, 85.43, (16.36, 19)), (108, 137.72, (14.84, 29))],
    }
    for (method, theta), vals in data.items():
        for gs, (it, t, cg) in zip((0.1, 0.5, 5.0, 10.0), vals):
            betas = (2.0, 3.0) if gs < 1 else (10.0, 10.0)
            out.append(RowSpec(method, theta, 64, P, gamma_s=gs, betas=betas, iterations=it,
                               time_s=t, cg=cg, obj=ref[gs][0], srd=ref[gs][1]))
    return out


def _rows_table4() -> List[RowSpec]:
    P = "example4"
    out = []
    ref = {1.0: (1.19e3, 0.816), 10.0: (1.19e3, 0.816), 50.0: (1.20e3, 0.819), 500.0: (1.25e3, 0.836)}
    data = {
        ("InADMM", "k3"): [(34, 7.02, (4.62, 8)), (33, 6.76, (4.70, 8)), (37, 6.15, (3.84, 6)), (46, 6.72, (3.28, 4))],
        ("InADMM", "1.3"): [(44, 4.65, (2.16, 4)), (46, 5.26, (2.17, 4)), (49, 5.27, (2.18, 4)), (57, 6.69, (2.44, 5))],
        ("ADMMCG", None): [(33, 26.82, (20.00, 46)), (32, 25.73, (20.13, 46)), (30, 23.09, (19.13, 41)), (35, 25.39, (17.97, 31))],
    }
    for (method, theta), vals in data.items():
        for gs, (it, t, cg) in zip((1.0, 10.0, 50.0, 500.0), vals):
            betas = (8.0, 8.0) if gs < 20 else (10.0, 10.0)
            out.append(RowSpec(method, theta, 64, P, gamma_s=gs, betas=betas, iterations=it,
                               time_s=t, cg=cg, obj=ref[gs][0], srd=ref[gs][1]))
    return out


TABLES = {1: _rows_table1, 2: _rows_table2, 3: _rows_table3, 4: _rows_table4}
SRD_RTOL = {1: 0.10, 2: 0.02, 3: 0.10, 4: 0.02}


def parse_cap(cap) -> int:
    """``"2^-6"``, ``"2**-6"``, ``-6``, ``6`` or ``64`` -> cells per side."""
    if isinstance(cap, (int, float)):
        v = int(cap)
    else:
        s = str(cap).strip().replace("**", "^")
        if s.startswith("2^"):
            v = int(s[2:])
        else:
            try:
                v = int(s)
            except ValueError as exc:
                raise ConfigurationError(f"cannot parse mesh cap {cap!r}") from exc
    v = abs(v)
    m = 2**v if v < 16 else v
    if m not in (8, 16, 32, 64, 128, 256):
        raise ConfigurationError(f"mesh cap must be 2^-3 .. 2^-8, got {cap!r}")
    return m


def params_for(row: RowSpec, **overrides) -> AdmmParams:
    theta = {
        "k3": algebraic(3.0),
        "2": geometric(0.5),
        "1.4": geometric(1 / 1.4),
        "1.3": geometric(1 / 1.3),
        None: geometric(0.5),
    }[row.theta]
    return AdmmParams(beta0=row.betas[0], beta1=row.betas[1], theta=theta, **overrides)


def solve_row(row: RowSpec, problem=None, **param_overrides) -> Tuple[SolveReport, object]:
    if problem is None:
        problem = discretize(make_problem(row.problem, row.gamma_s), row.m, row.m)
    params = params_for(row, **param_overrides)
    if row.method == "InADMM":
        return run_inadmm(problem, params), problem
    if row.method == "ADMMCG":
        return run_admm_exact(problem, params), problem
    return run_pgd(problem, params), problem


def _judge(row: RowSpec, out: TableRow, table_id: int) -> str:
    if row.failed:
        return "pass" if out.status != "converged" else "fail"
    if row.iterations is None:
        return "n/a"
    if out.status != "converged":
        return "fail"
    checks = []
    if row.method == "PGD":
        checks.append(abs(out.iterations - row.iterations) <= PGD_ITER_RTOL * row.iterations)
    else:
        checks.append(abs(out.iterations - row.iterations) <= ITER_ATOL)
    if row.obj is not None:
        checks.append(abs(out.obj / row.obj - 1) <= OBJ_RTOL)
    if row.srd is not None:
        checks.append(abs(out.srd / row.srd - 1) <= SRD_RTOL[table_id])
    if row.err_u is not None and out.err_u is not None:
        checks.append(abs(out.err_u / row.err_u - 1) <= ERR_RTOL)
    return "pass" if all(checks) else "fail"


def planned_rows(table_id: int, cap="2^-6") -> Tuple[List[RowSpec], List[RowSpec]]:
    """Split a table's rows into ``(to_run, skipped)`` for the given mesh cap."""
    if table_id not in TABLES:
        raise ConfigurationError(f"unknown table {table_id}; choose from 1..4")
    m_cap = parse_cap(cap)
    specs = TABLES[table_id]()
    return [s for s in specs if s.m <= m_cap], [s for s in specs if s.m > m_cap]


def reproduce_table(table_id: int, cap="2^-6", out_dir: Optional[Path] = None,
                    rows: Optional[List[RowSpec]] = None) -> List[TableRow]:
    """Run every row of table ``table_id`` whose mesh is no finer than ``cap``.

    Rows beyond the cap are returned with status ``skipped``. A failing row is
    recorded with its error and does not stop the table.
    """
    if table_id not in TABLES:
        raise ConfigurationError(f"unknown table {table_id}; choose from 1..4")
    m_cap = parse_cap(cap)
    specs = TABLES[table_id]() if rows is None else rows
    results = []
    problems = {}
    for spec in specs:
        out = TableRow(spec.method, spec.theta_label, spec.h_label, spec.h_label,
                       spec.gamma_s, spec.betas, published=spec)
        if spec.m > m_cap:
            out.status = "skipped"
            out.verdict = "skipped"
            results.append(out)
            continue
        key = (spec.problem, spec.gamma_s, spec.m)
        t0 = time.perf_counter()
        try:
            if key not in problems:
                problems[key] = discretize(make_problem(spec.problem, spec.gamma_s), spec.m, spec.m)
            report, problem = solve_row(spec, problems[key])
        except (SolverError, ArithmeticError, ValueError) as exc:
            out.status = "error"
            out.verdict = "fail"
            out.notes.append(str(exc))
            log.warning("table %d row %s %s %s failed: %s", table_id, spec.method,
                        spec.theta_label, spec.h_label, exc)
            results.append(out)
            continue
        last = report.last
        out.iterations = report.iterations
        out.err_u = last.err_u
        out.wall_s = time.perf_counter() - t0
        if report.method != "PGD":
            out.cg_ave, out.cg_max = report.cg_ave, report.cg_max
        out.obj = last.Obj
        out.srd = last.SRD
        out.status = report.status
        out.verdict = _judge(spec, out, table_id)
        log.info("table %d: %s %s %s gamma_s=%s -> %d its, %s", table_id, spec.method,
                 spec.theta_label, spec.h_label, spec.gamma_s, out.iterations, out.verdict)
        results.append(out)
    if out_dir is not None:
        write_table_csv(results, Path(out_dir) / f"table{table_id}.csv")
    return results


TABLE_CSV_HEADER = [
    "method", "theta", "h", "tau", "gamma_s", "beta0", "beta1", "status",
    "iterations", "published_iterations", "err_u", "published_err_u", "published_time_s",
    "cg_ave", "cg_max", "published_cg_ave", "published_cg_max", "Obj", "published_Obj", "SRD", "published_SRD",
    "verdict",
]


def _f(x):
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def write_table_csv(rows: List[TableRow], path: Path) -> None:
    """Side-by-side CSV. Measured wall time is left out so reruns are byte-identical."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE_CSV_HEADER)
        for r in rows:
            p = r.published
            w.writerow([
                r.method, r.theta, r.h, r.tau, _f(r.gamma_s), _f(r.betas[0]), _f(r.betas[1]), r.status,
                _f(r.iterations), _f(p.iterations), _f(r.err_u), _f(p.err_u), _f(p.time_s),
                _f(r.cg_ave), _f(r.cg_max), _f(p.cg[0] if p.cg else None), _f(p.cg[1] if p.cg else None),
                _f(r.obj), _f(p.obj), _f(r.srd), _f(p.srd), r.verdict,
            ])


def format_table(rows: List[TableRow]) -> str:
    """Plain-text side-by-side rendering (computed | published)."""
    def g(x, fmt="{:.3g}"):
        return "-" if x is None else fmt.format(x)

    lines = [f"{'method':7} {'theta':13} {'h':5} {'gs':>5} {'iters':>9} {'err_u':>19} "
             f"{'CG ave/max':>17} {'Obj':>19} {'SRD':>19} verdict"]
    for r in rows:
        p = r.published
        cg = "-" if r.cg_ave is None else f"{r.cg_ave:.2f}/{r.cg_max}"
        pcg = "-" if not p.cg else f"{p.cg[0]:.2f}/{p.cg[1]}"
        lines.append(
            f"{r.method:7} {r.theta:13} {r.h:5} {g(r.gamma_s):>5} "
            f"{g(r.iterations, '{}'):>4}|{g(p.iterations, '{}'):<4} "
            f"{g(r.err_u):>9}|{g(p.err_u):<9} {cg:>8}|{pcg:<8} "
            f"{g(r.obj):>9}|{g(p.obj):<9} {g(r.srd):>9}|{g(p.srd):<9} {r.verdict or r.status}"
        )
    return "\n".join(lines)
