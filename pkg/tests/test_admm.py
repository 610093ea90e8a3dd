import math

import numpy as np
import pytest

from parabolic_admm.admm import (
    AdmmParams,
    algebraic,
    beta_update,
    compute_residuals,
    fixed,
    geometric,
    run_admm_exact,
    run_inadmm,
    run_pgd,
    theta_next,
)
from parabolic_admm.cg import cg_solve
from parabolic_admm.errors import ParameterError, SolverError
from parabolic_admm.problems import ProblemSpec, discretize, example3
from parabolic_admm.prox import BoxBounds


@pytest.fixture(scope="module")
def zero_problem():
    spec = ProblemSpec(name="zero", gamma_d=0.0, gamma_s=0.0, bounds=BoxBounds(-1, 1),
                       y_d=lambda x, y, t: 0 * x)
    return discretize(spec, 4, 4)


def test_theta_examples():
    assert theta_next(geometric(0.5), 3, 8.0) == 1.0
    assert theta_next(algebraic(3.0), 2, 8.0) == 1.0
    assert theta_next(algebraic(3.0), 0, 8.0) == 8.0
    assert theta_next(geometric(0.5), 200, 8.0) == 1e-6
    assert theta_next(algebraic(3.0), 10**6, 8.0) == 1e-6
    assert theta_next(fixed(1e-6), 0, 8.0) == 1e-6


@pytest.mark.parametrize("bad", [dict(kind="geometric", q=1.0), dict(kind="algebraic", alpha=1.0),
                                 dict(kind="spiral"), dict(kind="fixed", value=0.0)])
def test_theta_schedule_validation(bad):
    from parabolic_admm.admm import ThetaSchedule
    with pytest.raises(ParameterError):
        ThetaSchedule(**bad)


def test_params_validation():
    with pytest.raises(ParameterError):
        AdmmParams(beta0=0.0)
    with pytest.raises(ParameterError):
        AdmmParams(eta_base=1.0)


def _vec(*xs):
    return np.array(xs, dtype=float)


def test_beta_update_branches():
    z_prev, z, u = _vec(0.0), _vec(1.0), _vec(9.0)  # |dz| = 1, |u - z| = 8, quarter = 2
    assert beta_update(4.0, 1.0, 0.5, z, z_prev, u) == 6.0  # 1*1 < 2
    assert beta_update(4.0, 3.0, 0.5, z, z_prev, u) == pytest.approx(4.0 / 1.5)  # 3 > 2
    assert beta_update(4.0, 2.0, 0.5, z, z_prev, u) == 4.0  # tie
    for beta_km1 in (1.0, 2.0, 3.0):
        assert beta_update(4.0, beta_km1, 0.0, z, z_prev, u) == 4.0


def test_residual_examples():
    z = _vec(1.0, 2.0)
    pr, dr = compute_residuals(z, z, z, 5.0)
    assert pr == 0.0 and dr == 0.0
    pr, dr = compute_residuals(_vec(3.0, 4.0), _vec(0.0, 0.0), _vec(0.0, 0.0), 1.0)
    assert pr == 0.0 and dr == 1.0
    pr, _ = compute_residuals(_vec(1.0), _vec(1.0), _vec(0.0), 1.0)
    assert pr == math.inf
    pr, _ = compute_residuals(_vec(1.0), _vec(3.0), _vec(2.0), 2.0)
    assert pr == 1.0


@pytest.mark.parametrize("solver", [run_inadmm, run_admm_exact])
def test_trivial_problem_converges_in_two(zero_problem, solver):
    rep = solver(zero_problem, AdmmParams())
    assert rep.converged and rep.iterations == 2
    for field in (rep.final.u, rep.final.z, rep.final.lam):
        assert not np.any(field)
    assert math.isinf(rep.records[0].PR)


def test_pgd_trivial_step(zero_problem):
    rep = run_pgd(zero_problem, AdmmParams())
    assert rep.converged and rep.iterations == 1
    assert rep.last.step == 1.0 and not np.any(rep.final.u)


def test_pgd_rejects_sparsity(ex1_small):
    sparse = discretize(example3(0.1), 4, 4)
    with pytest.raises(ParameterError):
        run_pgd(sparse, AdmmParams())


def test_pgd_descends(ex1_small):
    rep = run_pgd(ex1_small, AdmmParams(max_outer=50))
    objs = [r.Obj for r in rep.records]
    assert all(b <= a for a, b in zip(objs, objs[1:]))


def test_max_iter_status(ex1_small):
    rep = run_inadmm(ex1_small, AdmmParams(max_outer=3))
    assert rep.status == "max_iter" and rep.iterations == 3


@pytest.mark.parametrize("schedule", [geometric(0.5), algebraic(3.0)])
def test_invariants_every_iteration(ex1_small, schedule):
    params = AdmmParams(theta=schedule, verify=True)
    betas = []
    rep = run_inadmm(ex1_small, params, callback=lambda info: betas.append(info["beta"]))
    assert rep.converged
    lo, hi = params.beta_bounds()
    b = ex1_small.bounds
    for rec in rep.records:
        assert rec.certificate <= rec.theta
        assert rec.multiplier_defect <= 1e-14
        assert rec.PR >= 0 and rec.DR >= 0
    assert b.contains(rep.final.z)
    assert all(lo * (1 - 1e-12) <= beta <= hi * (1 + 1e-12) for beta in betas[1:])
    assert max(rep.last.PR, rep.last.DR) <= params.tol


def test_inexact_step_close_to_exact_step(ex1_small):
    """Every accepted step lies within theta of the accurately solved step."""
    violations = []

    def compare(info):
        op = info["op"]
        d = op.assemble_d(info["z"], info["lam"])
        accurate = cg_solve(op, d, info["u"], 1e-12).u
        if op.norm(info["u_new"] - accurate) > info["theta"]:
            violations.append(info["k"])

    run_inadmm(ex1_small, AdmmParams(theta=geometric(0.5)), callback=compare)
    assert violations == []


def test_cg_cap_surfaces_context(ex1_small, monkeypatch):
    import parabolic_admm.admm as admm_mod
    from parabolic_admm.cg import CgOutcome

    def stuck(op, d, u0, theta, max_iter=None, callback=None):
        return CgOutcome(d * 0, 7, 1.0, False)

    monkeypatch.setattr(admm_mod, "cg_solve", stuck)
    with pytest.raises(SolverError, match="outer_iteration=1"):
        run_inadmm(ex1_small, AdmmParams())


def test_records_numbered_from_one(ex1_small):
    rep = run_admm_exact(ex1_small, AdmmParams(max_outer=4))
    assert [r.k for r in rep.records] == [1, 2, 3, 4]
    assert all(r.theta == 1e-6 for r in rep.records)
