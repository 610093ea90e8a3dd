"""Inexact ADMM (InADMM), exact ADMM with CG, and projected gradient.

All three share the same starting point (zero control) and report one
:class:`IterationRecord` per outer iteration. Records are numbered from 1:
record ``k`` describes the iterate produced by the ``k``-th outer step.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from .cg import cg_solve
from .errors import ParameterError, SolverError
from .prox import project_box, z_update
from .reduced import ReducedOperator

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITER = "max_iter"
STEP_FAILURE = "step_failure"

EXACT_THRESHOLD = 1e-6


@dataclass(frozen=True)
class ThetaSchedule:
    """Inner tolerance ``theta_k``.

    ``kind`` is ``"geometric"`` (``theta0 * q**k``), ``"algebraic"``
    (``theta0 / k**alpha``, with ``k = 0`` treated as ``k = 1``) or ``"fixed"``
    (``value`` at every step). ``theta0=None`` means half the initial residual
    norm.
    """

    kind: str = "geometric"
    theta0: Optional[float] = None
    q: float = 0.5
    alpha: float = 3.0
    value: float = EXACT_THRESHOLD

    def __post_init__(self):
        if self.kind not in ("geometric", "algebraic", "fixed"):
            raise ParameterError(f"unknown theta schedule {self.kind!r}")
        if self.kind == "geometric" and not 0 < self.q < 1:
            raise ParameterError(f"geometric theta schedule needs q in (0, 1), got {self.q}")
        if self.kind == "algebraic" and not self.alpha > 1:
            raise ParameterError(f"algebraic theta schedule needs alpha > 1, got {self.alpha}")
        if self.kind == "fixed" and not self.value > 0:
            raise ParameterError(f"fixed theta must be positive, got {self.value}")
        if self.theta0 is not None and not self.theta0 > 0:
            raise ParameterError(f"theta0 must be positive, got {self.theta0}")

    @property
    def label(self) -> str:
        if self.kind == "geometric":
            return f"theta0/({1 / self.q:g})^k"
        if self.kind == "algebraic":
            return f"theta0/k^{self.alpha:g}"
        return f"fixed {self.value:g}"


def geometric(q: float = 0.5, theta0: Optional[float] = None) -> ThetaSchedule:
    return ThetaSchedule("geometric", theta0=theta0, q=q)


def algebraic(alpha: float = 3.0, theta0: Optional[float] = None) -> ThetaSchedule:
    return ThetaSchedule("algebraic", theta0=theta0, alpha=alpha)


def fixed(value: float = EXACT_THRESHOLD) -> ThetaSchedule:
    return ThetaSchedule("fixed", value=value)


def theta_next(schedule: ThetaSchedule, k: int, theta0: float,
               exact_threshold: float = EXACT_THRESHOLD) -> float:
    if schedule.kind == "fixed":
        theta = schedule.value
    elif schedule.kind == "geometric":
        theta = theta0 * schedule.q**k
    else:
        theta = theta0 / max(k, 1) ** schedule.alpha
    return max(theta, exact_threshold)


@dataclass(frozen=True)
class AdmmParams:
    beta0: float = 2.0
    beta1: float = 3.0
    eta_base: float = 2.0  # eta_k = eta_base**(-k)
    theta: ThetaSchedule = field(default_factory=ThetaSchedule)
    tol: float = 1e-4
    max_outer: int = 1000
    exact_threshold: float = EXACT_THRESHOLD
    verify: bool = False  # recompute sigma independently every step
    divergence_limit: float = 1e12

    def __post_init__(self):
        if not (self.beta0 > 0 and self.beta1 > 0):
            raise ParameterError(f"penalties must be positive, got ({self.beta0}, {self.beta1})")
        if not self.eta_base > 1:
            raise ParameterError("eta_base must exceed 1 so that sum(eta_k) is finite")
        if not self.tol > 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.max_outer < 1:
            raise ParameterError("max_outer must be at least 1")
        if not self.exact_threshold > 0:
            raise ParameterError("exact_threshold must be positive")

    def eta(self, k: int) -> float:
        return self.eta_base ** (-k)

    def beta_bounds(self):
        """Bounds on every ``beta_k`` produced by the update rule (``k >= 1``)."""
        prod = 1.0
        for k in range(1, 200):
            prod *= 1.0 + self.eta(k)
        return self.beta1 / prod, self.beta1 * prod


@dataclass
class IterateTriple:
    u: np.ndarray
    z: np.ndarray
    lam: np.ndarray


@dataclass
class IterationRecord:
    k: int
    beta: float
    theta: float
    cg_iters: int
    PR: float
    DR: float
    SRD: float
    Obj: float
    err_u: Optional[float]
    wall_ms: float
    certificate: Optional[float] = None  # independently recomputed ||sigma_k(u^{k+1})||
    multiplier_defect: Optional[float] = None  # relative to max(1, |lam|, beta|u - z|)
    step: Optional[float] = None  # PGD step size


@dataclass
class SolveReport:
    method: str
    records: List[IterationRecord]
    final: IterateTriple
    status: str
    theta0: Optional[float] = None
    wall_s: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def cg_counts(self) -> List[int]:
        return [r.cg_iters for r in self.records]

    @property
    def cg_ave(self) -> float:
        c = self.cg_counts
        return float(np.mean(c)) if c else 0.0

    @property
    def cg_max(self) -> int:
        c = self.cg_counts
        return int(max(c)) if c else 0

    @property
    def last(self) -> IterationRecord:
        return self.records[-1]


def beta_update(beta_k: float, beta_km1: float, eta_k: float,
                z_k, z_km1, u_k, norm: Callable = np.linalg.norm) -> float:
    """Residual-balancing penalty update."""
    lhs = beta_km1 * norm(z_km1 - z_k)
    rhs = 0.25 * norm(u_k - z_k)
    if lhs < rhs:
        return (1.0 + eta_k) * beta_k
    if lhs > rhs:
        return beta_k / (1.0 + eta_k)
    return beta_k


def compute_residuals(u, z, z_prev, beta: float, norm: Callable = np.linalg.norm):
    """Relative primal and dual residuals ``(PR, DR)``.

    PR is ``inf`` when ``z_prev = 0`` but ``z`` moved, and 0 when neither moved.
    """
    dz = norm(z - z_prev)
    nz_prev = norm(z_prev)
    if nz_prev == 0.0:
        pr = math.inf if dz > 0 else 0.0
    else:
        pr = beta * dz / max(nz_prev, 1e-12)
    scale = max(norm(u), norm(z))
    dr = norm(u - z) / scale if scale > 0 else 0.0
    return pr, dr


def run_inadmm(problem, params: AdmmParams = AdmmParams(),
               callback: Optional[Callable] = None, method: str = "InADMM") -> SolveReport:
    """Outer InADMM loop.

    ``callback(info)`` receives a dict per outer step with the previous triple,
    the new triple, ``beta``, ``theta`` and the reduced operator; it is meant
    for diagnostics and must not mutate the arrays.
    """
    disc = problem.disc
    norm = disc.norm_U
    t_start = time.perf_counter()

    u = disc.zeros_control()
    z = disc.zeros_control()
    lam = disc.zeros_control()
    betas = [params.beta0, params.beta1]

    sched = params.theta
    theta0 = sched.theta0
    if theta0 is None and sched.kind != "fixed":
        op0 = ReducedOperator(problem, params.beta0)
        theta0 = 0.5 * norm(op0.sigma(u, z, lam))
        if theta0 == 0.0:
            theta0 = params.exact_threshold

    records: List[IterationRecord] = []
    status = MAX_ITER
    z_older = None  # z^{k-1}
    for k in range(params.max_outer):
        t0 = time.perf_counter()
        beta = betas[k]
        theta = theta_next(sched, k, theta0, params.exact_threshold)
        op = ReducedOperator(problem, beta)
        d = op.assemble_d(z, lam)
        out = cg_solve(op, d, u, theta)
        if not out.converged:
            raise SolverError("inner CG hit its iteration cap", outer_iteration=k + 1,
                              residual=out.final_residual, theta=theta)
        u_new = out.u
        z_new = z_update(u_new, lam, beta, problem.gamma_s, problem.bounds)
        lam_new = lam - beta * (u_new - z_new)

        if norm(u_new) > params.divergence_limit:
            raise SolverError("iterates diverged", outer_iteration=k + 1, norm_u=norm(u_new))

        certificate = defect = None
        if params.verify:
            certificate = norm(op.sigma(u_new, z, lam))
            # rounding-level residual of the multiplier step, relative to its terms
            scale = max(1.0, float(np.max(np.abs(lam))), beta * float(np.max(np.abs(u_new - z_new))))
            defect = float(np.max(np.abs(lam_new - lam + beta * (u_new - z_new)))) / scale

        if callback is not None:
            callback(dict(k=k, beta=beta, theta=theta, op=op, u=u, z=z, lam=lam,
                          u_new=u_new, z_new=z_new, lam_new=lam_new, cg=out))

        if k == 0:
            pr = math.inf
            dr = compute_residuals(u_new, z_new, z, beta, norm)[1]
        else:
            pr, dr = compute_residuals(u_new, z_new, z, beta, norm)
        records.append(IterationRecord(
            k=k + 1, beta=beta, theta=theta, cg_iters=out.iterations, PR=pr, DR=dr,
            SRD=problem.srd(z_new), Obj=problem.objective(z_new),
            err_u=problem.error_u(z_new),
            wall_ms=1e3 * (time.perf_counter() - t0),
            certificate=certificate, multiplier_defect=defect,
        ))
        log.debug("%s k=%d beta=%.3g theta=%.3g cg=%d PR=%.3e DR=%.3e",
                  method, k + 1, beta, theta, out.iterations, pr, dr)

        z_older, u, z, lam = z, u_new, z_new, lam_new
        if k >= 1 and max(pr, dr) <= params.tol:
            status = CONVERGED
            break
        # beta_{k+2} from (beta_{k+1}, beta_k, z^k, z^{k+1}, u^{k+1})
        betas.append(beta_update(betas[k + 1], betas[k], params.eta(k + 1),
                                 z, z_older, u, norm))

    return SolveReport(method, records, IterateTriple(u, z, lam), status, theta0,
                       time.perf_counter() - t_start)


def run_admm_exact(problem, params: AdmmParams = AdmmParams(),
                   callback: Optional[Callable] = None) -> SolveReport:
    """ADMM whose u-step is solved by CG to the fixed tolerance ``exact_threshold``."""
    params = replace(params, theta=fixed(params.exact_threshold))
    return run_inadmm(problem, params, callback, method="ADMMCG")


def run_pgd(problem, params: AdmmParams = AdmmParams(), c: float = 1e-4,
            max_halvings: int = 50) -> SolveReport:
    """Projected gradient with Armijo backtracking (smooth problems only).

    Each step starts from ``s = 1`` and halves until
    ``J(u+) <= J(u) - c*s*||(u - u+)/s||^2``. Stops once the relative change
    ``||u+ - u|| / max(1, ||u||)`` drops to ``tol``.
    """
    if problem.gamma_s != 0:
        raise ParameterError("projected gradient handles only gamma_s = 0")
    disc = problem.disc
    norm = disc.norm_U
    bounds = problem.bounds
    t_start = time.perf_counter()

    def evaluate(v):
        r = problem.tracking_residual(v)
        return 0.5 * problem.gamma_d * disc.dot_Y(r, r) + 0.5 * disc.dot_U(v, v), r

    u = disc.zeros_control()
    J_u, res = evaluate(u)
    records: List[IterationRecord] = []
    status = MAX_ITER
    y_d_norm = disc.norm_Y(problem.y_d)
    for k in range(params.max_outer):
        t0 = time.perf_counter()
        grad = u + problem.gamma_d * disc.apply_Sbar_star(res)
        s = 1.0
        for _ in range(max_halvings + 1):
            u_plus = project_box(u - s * grad, bounds)
            G = (u - u_plus) / s
            J_plus, res_plus = evaluate(u_plus)
            if J_plus <= J_u - c * s * disc.dot_U(G, G):
                break
            s *= 0.5
        else:
            status = STEP_FAILURE
            break
        rel = norm(u_plus - u) / max(1.0, norm(u))
        u, J_u, res = u_plus, J_plus, res_plus
        srd = disc.norm_Y(res) / y_d_norm if y_d_norm > 0 else float("nan")
        records.append(IterationRecord(
            k=k + 1, beta=float("nan"), theta=float("nan"), cg_iters=0,
            PR=float("nan"), DR=float("nan"), SRD=srd, Obj=J_u,
            err_u=problem.error_u(u), wall_ms=1e3 * (time.perf_counter() - t0), step=s,
        ))
        if rel <= params.tol:
            status = CONVERGED
            break
    return SolveReport("PGD", records, IterateTriple(u, u.copy(), disc.zeros_control()),
                       status, None, time.perf_counter() - t_start)


SOLVERS = {"inadmm": run_inadmm, "admmcg": run_admm_exact, "pgd": run_pgd}
