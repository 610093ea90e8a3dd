"""Run configuration, metrics, and on-disk artifacts.

A config file is flat ``key = value`` text; ``#`` starts a comment. Recognized
keys are listed in :data:`CONFIG_KEYS`.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .admm import (
    AdmmParams,
    SOLVERS,
    SolveReport,
    ThetaSchedule,
)
from .errors import ConfigurationError
from .grid import ENTIRE, GridSpec
from .problems import DiscreteProblem, discretize, make_problem
from .prox import BoxBounds

log = logging.getLogger(__name__)

CSV_HEADER = ["k", "beta", "theta", "cg_iters", "PR", "DR", "SRD", "Obj", "err_u", "wall_ms"]

CONFIG_KEYS = {
    "problem", "gamma_s", "gamma_d", "m", "nt", "solver", "beta0", "beta1", "eta_base",
    "theta.kind", "theta.q", "theta.alpha", "theta.theta0", "theta.value",
    "tol", "max_outer", "exact_threshold", "out_dir", "snapshots", "snapshot_fields",
    "subdomain", "bounds.a", "bounds.b", "nu", "a0", "lumped", "verify", "seed",
}


@dataclass
class RunConfig:
    problem: str = "example1"
    gamma_s: Optional[float] = None
    m: int = 64
    n_t: int = 64
    solver: str = "inadmm"
    params: AdmmParams = field(default_factory=AdmmParams)
    out_dir: Optional[Path] = None
    snapshots: Tuple[float, ...] = ()
    snapshot_fields: Tuple[str, ...] = ("u", "z", "y")
    overrides: Dict[str, object] = field(default_factory=dict)
    lumped: bool = False
    seed: int = 0  # reserved; the solvers are deterministic

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigurationError(f"unknown solver {self.solver!r}; choose from {sorted(SOLVERS)}")
        for f in self.snapshot_fields:
            if f not in ("u", "z", "y"):
                raise ConfigurationError(f"unknown snapshot field {f!r}")

    def problem_spec(self):
        spec = make_problem(self.problem, self.gamma_s)
        changes = {}
        ov = self.overrides
        if "bounds.a" in ov or "bounds.b" in ov:
            changes["bounds"] = BoxBounds(float(ov.get("bounds.a", spec.bounds.a)),
                                          float(ov.get("bounds.b", spec.bounds.b)))
        for key in ("gamma_d", "nu", "a0", "subdomain"):
            if key in ov:
                changes[key] = ov[key]
        if changes:
            spec = spec.with_overrides(**changes)
        # fail on a bad mesh/subdomain before any solve
        GridSpec(self.m, self.n_t, spec.T, spec.subdomain)
        return spec


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {value!r}")


def _parse_subdomain(value: str):
    v = value.strip()
    if v == ENTIRE:
        return ENTIRE
    parts = [p for p in v.replace(";", ",").split(",") if p.strip()]
    if len(parts) != 4:
        raise ConfigurationError(f"subdomain must be 'entire' or x_lo,x_hi,y_lo,y_hi; got {value!r}")
    return tuple(float(p) for p in parts)


def parse_config_text(text: str) -> Dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def config_from_mapping(kv: Dict[str, str]) -> RunConfig:
    try:
        theta = ThetaSchedule(
            kind=kv.get("theta.kind", "geometric"),
            theta0=float(kv["theta.theta0"]) if "theta.theta0" in kv else None,
            q=float(kv.get("theta.q", 0.5)),
            alpha=float(kv.get("theta.alpha", 3.0)),
            value=float(kv.get("theta.value", 1e-6)),
        )
        params = AdmmParams(
            beta0=float(kv.get("beta0", 2.0)),
            beta1=float(kv.get("beta1", 3.0)),
            eta_base=float(kv.get("eta_base", 2.0)),
            theta=theta,
            tol=float(kv.get("tol", 1e-4)),
            max_outer=int(kv.get("max_outer", 1000)),
            exact_threshold=float(kv.get("exact_threshold", 1e-6)),
            verify=_parse_bool(kv.get("verify", "false")),
        )
        overrides = {}
        for key in ("gamma_d", "nu", "a0", "bounds.a", "bounds.b"):
            if key in kv:
                overrides[key] = float(kv[key])
        if "subdomain" in kv:
            overrides["subdomain"] = _parse_subdomain(kv["subdomain"])
        snaps = tuple(float(t) for t in kv.get("snapshots", "").split(",") if t.strip())
        fields = tuple(f.strip() for f in kv.get("snapshot_fields", "u,z,y").split(",") if f.strip())
        cfg = RunConfig(
            problem=kv.get("problem", "example1"),
            gamma_s=float(kv["gamma_s"]) if "gamma_s" in kv else None,
            m=int(kv.get("m", 64)),
            n_t=int(kv.get("nt", 64)),
            solver=kv.get("solver", "inadmm").lower(),
            params=params,
            out_dir=Path(kv["out_dir"]) if "out_dir" in kv else None,
            snapshots=snaps,
            snapshot_fields=fields,
            overrides=overrides,
            lumped=_parse_bool(kv.get("lumped", "false")),
            seed=int(kv.get("seed", 0)),
        )
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(str(exc)) from exc
    cfg.problem_spec()
    return cfg


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return config_from_mapping(parse_config_text(text))


# -- metrics --------------------------------------------------------------------

def compute_metrics(problem: DiscreteProblem, z: np.ndarray) -> Dict[str, Optional[float]]:
    """SRD, Obj and (when the optimum is known) ``||z - u*||_U``.

    SRD is NaN when ``||y_d|| = 0``.
    """
    return {"SRD": problem.srd(z), "Obj": problem.objective(z), "err_u": problem.error_u(z)}


# -- running --------------------------------------------------------------------

def solve(config: RunConfig, problem: Optional[DiscreteProblem] = None) -> Tuple[SolveReport, DiscreteProblem]:
    if problem is None:
        problem = discretize(config.problem_spec(), config.m, config.n_t, lumped=config.lumped)
    report = SOLVERS[config.solver](problem, config.params)
    return report, problem


def run(config: RunConfig) -> SolveReport:
    """Solve and write ``iterations.csv``, ``summary.json`` and any snapshots."""
    report, problem = solve(config)
    if config.out_dir is not None:
        out = Path(config.out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            write_iterations_csv(report, out / "iterations.csv")
            write_summary(report, problem, config, out / "summary.json")
            for t in config.snapshots:
                for name in config.snapshot_fields:
                    write_snapshot(problem, report, name, t, out / f"{name}_t{t:g}.txt")
        except OSError as exc:
            raise OSError(f"writing run artifacts under {out}: {exc}") from exc
    return report


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_iterations_csv(report: SolveReport, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in report.records:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_HEADER])


def read_iterations_csv(path: Path) -> List[Dict[str, Optional[float]]]:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({k: (None if v == "" else (int(v) if k in ("k", "cg_iters") else float(v)))
                         for k, v in row.items()})
    return rows


def summary_dict(report: SolveReport, problem: DiscreteProblem, config: Optional[RunConfig] = None) -> dict:
    last = report.last
    out = {
        "method": report.method,
        "status": report.status,
        "iterations": report.iterations,
        "cg_ave": report.cg_ave,
        "cg_max": report.cg_max,
        "theta0": report.theta0,
        "Obj": last.Obj,
        "J": problem.J(report.final.z),  # objective without the l1 term
        "SRD": last.SRD,
        "err_u": last.err_u,
        "wall_s": report.wall_s,
        "m": problem.grid.m,
        "n_t": problem.grid.n_t,
        "problem": problem.spec.name,
        "gamma_s": problem.gamma_s,
    }
    if config is not None:
        out["solver"] = config.solver
        out["beta0"] = config.params.beta0
        out["beta1"] = config.params.beta1
        out["theta"] = config.params.theta.label
    return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in out.items()}


def write_summary(report, problem, config, path: Path) -> None:
    path.write_text(json.dumps(summary_dict(report, problem, config), indent=2, sort_keys=True) + "\n")


# -- field snapshots --------------------------------------------------------------

def _level(problem: DiscreteProblem, t: float, field_name: str) -> int:
    g = problem.grid
    n = int(round(t / g.tau))
    if abs(n * g.tau - t) > 1e-9 * max(1.0, g.spec.T):
        raise ConfigurationError(f"t={t} is not a time level (tau={g.tau})")
    lo = 0 if field_name == "y" else 1
    if not lo <= n <= g.n_t:
        raise ConfigurationError(f"t={t} outside levels {lo}..{g.n_t} for field {field_name}")
    return n


def snapshot_values(problem: DiscreteProblem, report: SolveReport, field_name: str, t: float):
    """Nodal values of ``u``, ``z`` or ``y = S(z)`` at time ``t`` on the full ``(m+1)^2`` grid."""
    g = problem.grid
    n = _level(problem, t, field_name)
    if field_name == "y":
        values = problem.state(report.final.z)[n]
    else:
        values = g.extend(getattr(report.final, field_name)[n - 1])
    return n, g.to_full(values)


def write_snapshot(problem, report, field_name: str, t: float, path: Path) -> None:
    n, full = snapshot_values(problem, report, field_name, t)
    g = problem.grid
    with open(path, "w") as fh:
        fh.write(f"# field={field_name}\n# m={g.m}\n# n_t={g.n_t}\n# level={n}\n# t={t:.17g}\n")
        for row in full:
            fh.write(" ".join(format(v, ".17g") for v in row) + "\n")


def read_snapshot(path: Path):
    header = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key] = value
        elif line.strip():
            rows.append([float(v) for v in line.split()])
    return header, np.array(rows)
