import numpy as np
import pytest

from parabolic_admm.cg import cg_solve
from parabolic_admm.errors import NotSPDError, ParameterError
from parabolic_admm.problems import discretize, example1, example2
from parabolic_admm.reduced import ReducedOperator


def dense_operator(op, shape):
    n = int(np.prod(shape))
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        cols.append(op.apply_H(e.reshape(shape)).ravel())
    return np.array(cols).T


@pytest.fixture(scope="module", params=["example1", "example2"])
def small(request):
    spec = example1() if request.param == "example1" else example2()
    problem = discretize(spec, 4, 4)
    op = ReducedOperator(problem, 2.0)
    return problem, op


def test_matches_dense_solve(small, rng):
    problem, op = small
    shape = problem.disc.control_shape
    H = dense_operator(op, shape)
    d = rng.standard_normal(shape)
    exact = np.linalg.solve(H, d.ravel()).reshape(shape)
    out = cg_solve(op, d, None, 1e-13 * op.norm(d))
    assert out.converged
    assert op.norm(out.u - exact) <= 1e-10 * op.norm(exact)


def test_energy_error_monotone(small, rng):
    problem, op = small
    shape = problem.disc.control_shape
    H = dense_operator(op, shape)
    d = rng.standard_normal(shape)
    exact = np.linalg.solve(H, d.ravel()).reshape(shape)
    energy = []

    def record(m, u, r):
        e = u - exact
        energy.append(op.dot(op.apply_H(e), e))

    cg_solve(op, d, None, 1e-12, callback=record)
    assert all(b <= a * (1 + 1e-9) for a, b in zip(energy, energy[1:]))


def test_recursive_residual_tracks_true_residual(ex1_16, rng):
    op = ReducedOperator(ex1_16, 3.0)
    d = rng.standard_normal(ex1_16.disc.control_shape)
    out = cg_solve(op, d, None, 1e-8)
    true = op.norm(d - op.apply_H(out.u))
    assert abs(true - out.final_residual) <= 1e-6 * op.norm(d)
    assert out.final_residual <= 1e-8


def test_warm_start_already_accepted_costs_nothing(small):
    problem, op = small
    d = op.apply_H(np.ones(problem.disc.control_shape))
    out = cg_solve(op, d, np.ones(problem.disc.control_shape), 1e-8)
    assert out.iterations == 0 and out.converged


def test_zero_rhs(small):
    problem, op = small
    out = cg_solve(op, problem.disc.zeros_control(), None, 1e-6)
    assert out.iterations == 0 and not np.any(out.u)


def test_iteration_cap_reports_nonconvergence(small, rng):
    problem, op = small
    out = cg_solve(op, rng.standard_normal(problem.disc.control_shape), None, 1e-14, max_iter=2)
    assert not out.converged and out.iterations == 2


def test_rejects_nonpositive_tolerance(small):
    problem, op = small
    with pytest.raises(ParameterError):
        cg_solve(op, problem.disc.zeros_control(), None, 0.0)


class _Indefinite:
    def dot(self, a, b):
        return float(np.sum(a * b))

    def apply_H(self, u):
        return -u


def test_indefinite_operator_detected():
    with pytest.raises(NotSPDError):
        cg_solve(_Indefinite(), np.ones(3), None, 1e-8)
