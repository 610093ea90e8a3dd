import numpy as np
import pytest
import sympy as sp

from parabolic_admm.errors import ConfigurationError
from parabolic_admm.problems import discretize, example1, example2, example3, example4, make_problem
from parabolic_admm.prox import BoxBounds


def _symbolic_fields(gamma_d):
    x, y, t = sp.symbols("x y t")
    y_bar = (1 - t) * sp.sin(sp.pi * x) * sp.sin(sp.pi * y)
    p_bar = (1 - t) * sp.sin(2 * sp.pi * x) * sp.sin(2 * sp.pi * y) / gamma_d
    lap = lambda e: sp.diff(e, x, 2) + sp.diff(e, y, 2)
    y_d = y_bar + sp.diff(p_bar, t) + lap(p_bar)
    smooth_f = sp.diff(y_bar, t) - lap(y_bar)  # f + u_bar
    args = (x, y, t)
    return (sp.lambdify(args, y_d, "numpy"), sp.lambdify(args, smooth_f, "numpy"),
            sp.lambdify(args, -gamma_d * p_bar, "numpy"))


def test_example1_fields_match_symbolic_derivatives(rng):
    spec = example1()
    y_d, smooth_f, unclamped_u = _symbolic_fields(spec.gamma_d)
    x, y, t = rng.uniform(0, 1, (3, 200))
    np.testing.assert_allclose(spec.y_d(x, y, t), y_d(x, y, t), rtol=1e-12, atol=1e-15)
    u_bar = np.clip(unclamped_u(x, y, t), -0.5, 0.5)
    np.testing.assert_allclose(spec.u_exact(x, y, t), u_bar, atol=1e-14)
    np.testing.assert_allclose(spec.f(x, y, t), smooth_f(x, y, t) - u_bar, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(spec.phi(x, y), spec.y_exact(x, y, 0.0))


def test_example1_terminal_target():
    spec = example1()
    x, y = 0.125, 0.125
    expected = -np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y) / spec.gamma_d
    assert spec.y_d(x, y, 1.0) == pytest.approx(expected, rel=1e-12)


def test_example1_control_clamped():
    spec = example1()
    # choose a point with sin(2 pi x) sin(2 pi y) = -0.3, then -0.9, at t = 0
    x = 0.75
    y = np.arcsin(0.3) / (2 * np.pi)
    assert spec.u_exact(x, y, 0.0) == pytest.approx(0.3)
    y = np.arcsin(0.9) / (2 * np.pi)
    assert spec.u_exact(x, y, 0.0) == pytest.approx(0.5)


def test_example2_target_value():
    assert example2().y_d(0.5, 0.5, 0.0) == pytest.approx(0.0625)


def test_example2_control_lives_on_corner(ex2_small):
    g = ex2_small.grid
    assert g.n_control == 4  # interior-or-edge nodes of [0, 0.25]^2 with h = 1/8, boundary removed
    assert np.all(g.control_coords <= 0.25 + 1e-12)


def test_sparse_variants():
    assert example3(0.5).gamma_s == 0.5 and example3(0.5).gamma_d == example1().gamma_d
    assert example4(10).subdomain == example2().subdomain
    for maker in (example3, example4):
        with pytest.raises(ConfigurationError):
            maker(0.0)
    with pytest.raises(ConfigurationError):
        make_problem("example3")
    with pytest.raises(ConfigurationError):
        make_problem("example9")


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        example1().with_overrides(gamma_s=-1.0)
    assert example1(bounds=BoxBounds(-1, 1)).bounds.b == 1


def test_manufactured_state_error_decreases():
    errs = []
    for m in (8, 16, 32):
        p = discretize(example1(), m, m)
        y = p.state(p.u_exact)
        errs.append(p.disc.norm_Y(y - p.y_exact) / p.disc.norm_Y(p.y_exact))
    assert errs[1] < errs[0] / 1.8 and errs[2] < errs[1] / 1.8


def test_exact_control_tracking_distance_at_64():
    p = discretize(example1(), 64, 64)
    srd = p.srd(p.u_exact)
    assert 5e-4 < srd < 1.2e-3


def test_zero_target_gives_nan_srd():
    spec = example1().with_overrides(y_d=lambda x, y, t: 0 * x)
    p = discretize(spec, 4, 4)
    assert np.isnan(p.srd(p.disc.zeros_control()))


def test_error_norm_of_interpolant_is_zero(ex1_small):
    assert ex1_small.error_u(ex1_small.u_exact) == 0.0
    assert discretize(example2(), 4, 4).error_u(np.zeros((4, 1))) is None


def test_gradient_matches_central_differences(ex1_16, rng):
    p = ex1_16
    norm = p.disc.norm_U
    worst = 0.0
    for _ in range(20):
        u = rng.uniform(-0.5, 0.5, p.disc.control_shape)
        d = rng.standard_normal(p.disc.control_shape)
        eps = 1e-5 * norm(u) / norm(d)
        fd = (p.J(u + eps * d) - p.J(u - eps * d)) / (2 * eps)
        exact = p.disc.dot_U(p.gradient(u), d)
        worst = max(worst, abs(fd - exact) / abs(exact))
    assert worst <= 1e-5
