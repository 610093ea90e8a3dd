"""The reduced u-subproblem: ``H u = d`` with residual ``sigma(u) = H u - d``."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


class ReducedOperator:
    """``H = (1 + beta) I + gamma_d Sbar* Sbar`` for a fixed penalty ``beta``.

    ``problem`` is a :class:`~parabolic_admm.problems.DiscreteProblem`; its
    cached affine offset ``g0 = gamma_d Sbar*(S(0) - y_d)`` is read, never
    recomputed here.
    """

    def __init__(self, problem, beta: float):
        if not beta > 0:
            raise ParameterError(f"penalty must be positive, got {beta}")
        self.problem = problem
        self.disc = problem.disc
        self.beta = float(beta)
        self.gamma_d = problem.gamma_d
        self.g0 = problem.g0
        self.applications = 0

    def dot(self, u1, u2) -> float:
        return self.disc.dot_U(u1, u2)

    def norm(self, u) -> float:
        return self.disc.norm_U(u)

    def apply_H(self, u: np.ndarray) -> np.ndarray:
        self.applications += 1
        out = (1.0 + self.beta) * u
        if self.gamma_d != 0.0:
            out += self.gamma_d * self.disc.apply_Sbar_star(self.disc.apply_Sbar(u)[1:])
        return out

    def assemble_d(self, z: np.ndarray, lam: np.ndarray) -> np.ndarray:
        return self.beta * z + lam - self.g0

    def sigma(self, u: np.ndarray, z: np.ndarray, lam: np.ndarray) -> np.ndarray:
        """Inexactness residual computed through the full state ``S(u)``.

        Independent of ``g0``: solves the state equation with the problem's
        source and initial datum, then one adjoint sweep.
        """
        p = self.problem
        out = (1.0 + self.beta) * u - (self.beta * z + lam)
        if self.gamma_d != 0.0:
            y = self.disc.solve_forward(u, p.f, p.phi)
            out += self.gamma_d * self.disc.apply_Sbar_star(y[1:] - p.y_d)
        return out

