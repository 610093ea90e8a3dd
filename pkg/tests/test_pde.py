import numpy as np
import pytest

from parabolic_admm.errors import DataError
from parabolic_admm.grid import GridSpec
from parabolic_admm.pde import Discretization, objective_full, objective_J


def _random_pair(disc, rng):
    u = rng.standard_normal(disc.control_shape)
    w = rng.standard_normal((disc.n_t, disc.grid.n_state))
    return u, w


@pytest.mark.parametrize("which", ["disc16", "disc16_sub"])
def test_adjoint_identity(which, request, rng):
    disc = request.getfixturevalue(which)
    worst = 0.0
    for _ in range(100):
        u, w = _random_pair(disc, rng)
        lhs = disc.dot_Y(disc.apply_Sbar(u), w)
        rhs = disc.dot_U(u, disc.apply_Sbar_star(w))
        worst = max(worst, abs(lhs - rhs) / (disc.norm_U(u) * disc.norm_Y(w)))
    assert worst <= 1e-10


def test_zero_inputs_give_zero(disc16):
    assert not np.any(disc16.solve_forward())
    assert not np.any(disc16.apply_Sbar(disc16.zeros_control()))
    assert not np.any(disc16.apply_Sbar_star(np.zeros((16, disc16.grid.n_state))))


def _eigenmode_error(m, n_t):
    disc = Discretization.build(GridSpec(m, n_t))
    phi = disc.interpolate(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    y = disc.solve_forward(phi=phi)
    exact = disc.interpolate(lambda x, yy, t: np.exp(-2 * np.pi**2 * t)
                             * np.sin(np.pi * x) * np.sin(np.pi * yy), disc.grid.times)
    return disc.norm_Y(y - exact) / disc.norm_Y(exact)


def test_eigenmode_error_halves_under_refinement():
    errs = [_eigenmode_error(m, m) for m in (16, 32, 64)]
    assert errs[1] <= errs[0] / 2 and errs[2] <= errs[1] / 2


def test_eigenmode_error_small_with_fine_steps():
    assert _eigenmode_error(32, 1024) <= 1e-2


@pytest.mark.xfail(strict=True, reason="first-order time error of the 2*pi^2 mode at tau=1/32 is about 0.26")
def test_eigenmode_error_at_32():
    assert _eigenmode_error(32, 32) <= 5e-2


def test_linearity(disc16_sub, rng):
    d = disc16_sub
    u1, u2 = rng.standard_normal(d.control_shape), rng.standard_normal(d.control_shape)
    lhs = d.apply_Sbar(2.5 * u1 + u2)
    rhs = 2.5 * d.apply_Sbar(u1) + d.apply_Sbar(u2)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(lhs)


def test_superposition(disc16, rng):
    d = disc16
    u = rng.standard_normal(d.control_shape)
    f = rng.standard_normal((d.n_t, d.grid.n_state))
    phi = rng.standard_normal(d.grid.n_state)
    full = d.solve_forward(u, f, phi)
    split = d.apply_Sbar(u) + d.solve_forward(None, f, phi)
    assert np.linalg.norm(full - split) <= 1e-12 * np.linalg.norm(full)


def test_initial_level_is_phi(disc16, rng):
    phi = rng.standard_normal(disc16.grid.n_state)
    np.testing.assert_array_equal(disc16.solve_forward(phi=phi)[0], phi)


def test_factorization_reuse_is_bitwise(disc16_sub, rng):
    u = rng.standard_normal(disc16_sub.control_shape)
    np.testing.assert_array_equal(disc16_sub.apply_Sbar(u), disc16_sub.apply_Sbar(u))


def test_factorization_residual(disc16_sub, rng):
    for _ in range(5):
        b = rng.standard_normal(disc16_sub.grid.n_state)
        x = disc16_sub.A_factor.solve(b)
        assert np.linalg.norm(disc16_sub.A @ x - b) <= 1e-12 * np.linalg.norm(b)


def test_unforced_state_norm_nonincreasing(disc16_sub, rng):
    d = disc16_sub
    y = d.solve_forward(phi=rng.uniform(-1, 1, d.grid.n_state))
    norms = np.sqrt(np.einsum("ni,ni->n", y, (d.ops.M @ y.T).T))
    assert np.all(np.diff(norms) <= 1e-14)


def test_adjoint_of_terminal_residual_decays_backward(disc16):
    d = disc16
    w = np.zeros((d.n_t, d.grid.n_state))
    w[-1] = d.interpolate(lambda x, y: np.sin(3 * np.pi * x) * np.sin(np.pi * y))
    v = d.apply_Sbar_star(w)
    norms = [np.linalg.norm(v[n]) for n in range(d.n_t)]
    # after the first backward step the norm shrinks as n decreases
    assert all(norms[n] <= norms[n + 1] for n in range(d.n_t - 2))


def test_non_finite_input_rejected(disc16):
    u = disc16.zeros_control()
    u[3, 5] = np.nan
    with pytest.raises(DataError):
        disc16.apply_Sbar(u)
    with pytest.raises(DataError):
        disc16.solve_forward(phi=np.full(disc16.grid.n_state, np.inf))


def test_shape_mismatch_rejected(disc16):
    with pytest.raises(DataError):
        disc16.apply_Sbar(np.zeros((3, 3)))


def test_zero_objective(disc16):
    z = disc16.zeros_control()
    y_d = np.zeros((16, disc16.grid.n_state))
    assert objective_full(disc16, z, y_d, 1e5, 1.0) == 0.0


def test_objective_full_adds_l1(disc16, rng):
    z = rng.standard_normal(disc16.control_shape)
    y_d = rng.standard_normal((16, disc16.grid.n_state))
    base = objective_J(disc16, z, y_d, 3.0)
    assert objective_full(disc16, z, y_d, 3.0, 0.7) == pytest.approx(base + 0.7 * disc16.l1_U(z))


def test_l1_of_constant_matches_mass_total(disc16):
    u = np.ones(disc16.control_shape)
    assert disc16.l1_U(u) == pytest.approx(disc16.ops.M_G.sum())
