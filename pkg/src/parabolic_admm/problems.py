"""Benchmark problems and their discrete realization.

Examples 1 and 3 use a manufactured solution on the whole square; examples 2
and 4 control only the corner ``[0, 0.25]^2`` and have no closed-form optimum.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConfigurationError
from .grid import ENTIRE, GridSpec, Rect
from .pde import Discretization
from .prox import BoxBounds

PI = np.pi


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    gamma_d: float
    gamma_s: float
    bounds: BoxBounds
    nu: float = 1.0
    a0: float = 0.0
    T: float = 1.0
    subdomain: Union[str, Rect] = ENTIRE
    f: Optional[Callable] = None  # f(x, y, t)
    phi: Optional[Callable] = None  # phi(x, y)
    y_d: Callable = None  # y_d(x, y, t)
    u_exact: Optional[Callable] = None
    y_exact: Optional[Callable] = None

    def __post_init__(self):
        if self.gamma_d < 0:
            raise ConfigurationError(f"gamma_d must be nonnegative, got {self.gamma_d}")
        if self.gamma_s < 0:
            raise ConfigurationError(f"gamma_s must be nonnegative, got {self.gamma_s}")
        if self.y_d is None:
            raise ConfigurationError("a target state y_d is required")

    def with_overrides(self, **changes) -> "ProblemSpec":
        return dataclasses.replace(self, **changes)


# -- example 1 / 3: manufactured solution ------------------------------------

def _s1(x, y):
    return np.sin(PI * x) * np.sin(PI * y)


def _s2(x, y):
    return np.sin(2 * PI * x) * np.sin(2 * PI * y)


def example1(gamma_d: float = 1e5, bounds: BoxBounds = BoxBounds(-0.5, 0.5)) -> ProblemSpec:
    """Entire-domain control with the known optimum ``(u*, y*)``."""
    a, b = bounds.a, bounds.b

    def y_bar(x, y, t):
        return (1 - t) * _s1(x, y)

    def u_bar(x, y, t):
        # -gamma_d * p_bar, clamped to the box
        return np.clip(-(1 - t) * _s2(x, y), a, b)

    def y_d(x, y, t):
        # y_bar + dp/dt + lap p, with p = (1-t) s2 / gamma_d
        return (1 - t) * _s1(x, y) - (1 + 8 * PI**2 * (1 - t)) * _s2(x, y) / gamma_d

    def f(x, y, t):
        # -u_bar + dy/dt - lap y
        return -u_bar(x, y, t) + (2 * PI**2 * (1 - t) - 1) * _s1(x, y)

    return ProblemSpec(
        name="example1",
        gamma_d=gamma_d,
        gamma_s=0.0,
        bounds=bounds,
        nu=1.0,
        a0=0.0,
        subdomain=ENTIRE,
        f=f,
        phi=_s1,
        y_d=y_d,
        u_exact=u_bar,
        y_exact=y_bar,
    )


# -- example 2 / 4: corner control with reaction -----------------------------

def _example2_target(x, y, t):
    return np.exp(t) * x * y * (1 - x) * (1 - y)


def _example2_initial(x, y):
    return _example2_target(x, y, 0.0)


def example2(gamma_d: float = 1e6, bounds: BoxBounds = BoxBounds(-30.0, 30.0)) -> ProblemSpec:
    """Control on ``[0, 0.25]^2`` with reaction ``a0 = 1``.

    The state starts on the target, ``phi = y_d(., 0)``.
    """
    return ProblemSpec(
        name="example2",
        gamma_d=gamma_d,
        gamma_s=0.0,
        bounds=bounds,
        nu=1.0,
        a0=1.0,
        subdomain=(0.0, 0.25, 0.0, 0.25),
        f=None,
        phi=_example2_initial,
        y_d=_example2_target,
    )


def example3(gamma_s: float) -> ProblemSpec:
    if not gamma_s > 0:
        raise ConfigurationError(f"example3 needs gamma_s > 0, got {gamma_s}")
    return dataclasses.replace(example1(), name="example3", gamma_s=float(gamma_s))


def example4(gamma_s: float) -> ProblemSpec:
    if not gamma_s > 0:
        raise ConfigurationError(f"example4 needs gamma_s > 0, got {gamma_s}")
    return dataclasses.replace(example2(), name="example4", gamma_s=float(gamma_s))


EXAMPLES = {
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "example4": example4,
}


def make_problem(name: str, gamma_s: Optional[float] = None) -> ProblemSpec:
    if name not in EXAMPLES:
        raise ConfigurationError(f"unknown problem {name!r}; choose from {sorted(EXAMPLES)}")
    if name in ("example3", "example4"):
        if gamma_s is None:
            raise ConfigurationError(f"{name} requires gamma_s")
        return EXAMPLES[name](gamma_s)
    spec = EXAMPLES[name]()
    if gamma_s:
        spec = dataclasses.replace(spec, gamma_s=float(gamma_s))
    return spec


# -- discrete problem ---------------------------------------------------------

class DiscreteProblem:
    """A :class:`ProblemSpec` interpolated on a grid, with the cached offset ``g0``.

    ``f`` and ``y_d`` are nodal values at levels ``1..n_t`` (right endpoints);
    ``phi`` is the nodal initial datum. ``S0 = S(0)`` and
    ``g0 = gamma_d Sbar*(S(0) - y_d)`` are computed once at construction.
    """

    def __init__(self, spec: ProblemSpec, disc: Discretization):
        self.spec = spec
        self.disc = disc
        g = disc.grid
        t = g.times[1:]
        self.gamma_d = float(spec.gamma_d)
        self.gamma_s = float(spec.gamma_s)
        self.bounds = spec.bounds
        self.f = disc.interpolate(spec.f, t) if spec.f is not None else None
        self.phi = disc.interpolate(spec.phi) if spec.phi is not None else None
        self.y_d = disc.interpolate(spec.y_d, t)
        self.u_exact = None
        if spec.u_exact is not None:
            self.u_exact = g.restrict(disc.interpolate(spec.u_exact, t))
        self.y_exact = None
        if spec.y_exact is not None:
            self.y_exact = disc.interpolate(spec.y_exact, g.times)
        self.S0 = disc.solve_forward(None, self.f, self.phi)
        self.g0_evaluations = 0
        self.g0 = self._compute_g0()

    def _compute_g0(self) -> np.ndarray:
        self.g0_evaluations += 1
        return self.gamma_d * self.disc.apply_Sbar_star(self.S0[1:] - self.y_d)

    @property
    def grid(self):
        return self.disc.grid

    def state(self, u: np.ndarray) -> np.ndarray:
        """``S(u) = Sbar u + S(0)``."""
        return self.disc.apply_Sbar(u) + self.S0

    def tracking_residual(self, u: np.ndarray) -> np.ndarray:
        return self.state(u)[1:] - self.y_d

    def J(self, u: np.ndarray) -> float:
        r = self.tracking_residual(u)
        return 0.5 * self.gamma_d * self.disc.dot_Y(r, r) + 0.5 * self.disc.dot_U(u, u)

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """``DJ(u) = u + gamma_d Sbar*(S(u) - y_d)``."""
        return u + self.gamma_d * self.disc.apply_Sbar_star(self.tracking_residual(u))

    def objective(self, z: np.ndarray) -> float:
        return self.J(z) + self.gamma_s * self.disc.l1_U(z)

    def srd(self, z: np.ndarray) -> float:
        denom = self.disc.norm_Y(self.y_d)
        if denom == 0.0:
            return float("nan")
        return self.disc.norm_Y(self.tracking_residual(z)) / denom

    def error_u(self, u: np.ndarray) -> Optional[float]:
        if self.u_exact is None:
            return None
        return self.disc.norm_U(u - self.u_exact)


def discretize(spec: ProblemSpec, m: int, n_t: int, lumped: bool = False) -> DiscreteProblem:
    gspec = GridSpec(m=m, n_t=n_t, T=spec.T, subdomain=spec.subdomain)
    disc = Discretization.build(gspec, nu=spec.nu, a0=spec.a0, lumped=lumped)
    return DiscreteProblem(spec, disc)
