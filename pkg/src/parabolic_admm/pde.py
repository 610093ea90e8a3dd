"""Backward-Euler state solver and its exact discrete adjoint.

Trajectories are plain arrays. A state trajectory has shape ``(n_t + 1, N_s)``
(levels ``0..n_t``); a control field has shape ``(n_t, N_c)`` (levels
``1..n_t``). Residual trajectories fed to the adjoint use levels ``1..n_t``
only, shape ``(n_t, N_s)``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.sparse.linalg as spla

from .errors import DataError, NotSPDError
from .grid import AssembledOperators, Grid, GridSpec, assemble, build_grid


def _factorize(mat):
    return spla.splu(mat.tocsc(), permc_spec="MMD_AT_PLUS_A", options=dict(SymmetricMode=True))


class Discretization:
    """Grid, assembled operators and the factorized time-step system.

    ``A = M + tau*(nu*K + a0*M)`` is factorized once; every forward and adjoint
    sweep reuses the factor.
    """

    def __init__(self, grid: Grid, ops: AssembledOperators):
        self.grid = grid
        self.ops = ops
        self.tau = grid.tau
        self.nu = ops.nu
        self.a0 = ops.a0
        self.A = (ops.M + self.tau * (ops.nu * ops.K + ops.M_a0)).tocsr()
        try:
            self.A_factor = _factorize(self.A)
            self.MG_factor = _factorize(ops.M_G)
        except RuntimeError as exc:  # singular factor
            raise NotSPDError(f"factorization failed: {exc}") from exc
        self._M = ops.M
        self._B = ops.B

    @classmethod
    def build(cls, spec: GridSpec, nu: float = 1.0, a0: float = 0.0, lumped: bool = False):
        grid = build_grid(spec)
        return cls(grid, assemble(grid, nu, a0, lumped=lumped))

    @property
    def n_t(self) -> int:
        return self.grid.n_t

    @property
    def state_shape(self):
        return (self.grid.n_t + 1, self.grid.n_state)

    @property
    def control_shape(self):
        return (self.grid.n_t, self.grid.n_control)

    def zeros_control(self) -> np.ndarray:
        return np.zeros(self.control_shape)

    # -- inner products -------------------------------------------------------

    def dot_U(self, u1: np.ndarray, u2: np.ndarray) -> float:
        _check_shape(u1, self.control_shape, "control")
        _check_shape(u2, self.control_shape, "control")
        return self.tau * float(np.sum(u1 * (self.ops.M_G @ u2.T).T))

    def dot_Y(self, y1: np.ndarray, y2: np.ndarray) -> float:
        """Right-endpoint rule over levels ``1..n_t``.

        Accepts full trajectories (``n_t + 1`` levels, level 0 ignored) or
        residual arrays with ``n_t`` levels.
        """
        y1 = _levels_1_to_nt(y1, self.grid)
        y2 = _levels_1_to_nt(y2, self.grid)
        return self.tau * float(np.sum(y1 * (self._M @ y2.T).T))

    def norm_U(self, u: np.ndarray) -> float:
        return float(np.sqrt(max(self.dot_U(u, u), 0.0)))

    def norm_Y(self, y: np.ndarray) -> float:
        return float(np.sqrt(max(self.dot_Y(y, y), 0.0)))

    def l1_U(self, u: np.ndarray) -> float:
        """Nodal-interpolated L1(G) norm: ``tau * sum_n lump_G . |u^n|``."""
        _check_shape(u, self.control_shape, "control")
        return self.tau * float(np.sum(np.abs(u) @ self.ops.lump_G))

    # -- state and adjoint ----------------------------------------------------

    def solve_forward(
        self,
        u: Optional[np.ndarray] = None,
        f: Optional[np.ndarray] = None,
        phi: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """March ``A y^n = M y^{n-1} + tau*(B u^n + M f^n)`` from ``y^0 = phi``.

        ``f`` holds levels ``1..n_t`` (shape ``(n_t, N_s)``); absent terms are
        dropped.
        """
        g = self.grid
        n_t = g.n_t
        if u is not None:
            _check_shape(u, self.control_shape, "control")
            _check_finite(u, "control")
        if f is not None:
            f = _levels_1_to_nt(f, g)
            _check_finite(f, "source")
        if phi is not None:
            _check_shape(phi, (g.n_state,), "initial datum")
            _check_finite(phi, "initial datum")

        # all right-hand-side loads at once; the march itself is sequential
        load = np.zeros((n_t, g.n_state))
        if u is not None:
            load += self.tau * (self._B @ u.T).T
        if f is not None:
            load += self.tau * (self._M @ f.T).T

        y = np.zeros((n_t + 1, g.n_state))
        if phi is not None:
            y[0] = phi
        solve = self.A_factor.solve
        M = self._M
        for n in range(1, n_t + 1):
            rhs = load[n - 1]
            if n > 1 or phi is not None:
                rhs = rhs + M @ y[n - 1]
            y[n] = solve(rhs)
        return y

    def apply_Sbar(self, u: np.ndarray) -> np.ndarray:
        """Linear control-to-state map (zero source, zero initial datum)."""
        return self.solve_forward(u)

    def adjoint_sweep(self, w: np.ndarray) -> np.ndarray:
        """Backward sweep ``A p^n = M p^{n+1} + tau*M w^n``, ``p^{n_t+1} = 0``.

        Returns ``p`` at levels ``1..n_t`` (shape ``(n_t, N_s)``).
        """
        w = _levels_1_to_nt(w, self.grid)
        _check_finite(w, "adjoint residual")
        n_t = self.grid.n_t
        load = self.tau * (self._M @ w.T).T
        p = np.zeros((n_t, self.grid.n_state))
        solve = self.A_factor.solve
        M = self._M
        p[n_t - 1] = solve(load[n_t - 1])
        for n in range(n_t - 2, -1, -1):
            p[n] = solve(load[n] + M @ p[n + 1])
        return p

    def apply_Sbar_star(self, w: np.ndarray) -> np.ndarray:
        """Adjoint of :meth:`apply_Sbar` w.r.t. ``dot_Y``/``dot_U``."""
        p = self.adjoint_sweep(w)
        if self.grid.entire:
            return p
        rhs = (self._B.T @ p.T)
        return self.MG_factor.solve(np.ascontiguousarray(rhs)).T.copy()

    # -- utilities ------------------------------------------------------------

    def interpolate(self, func, times: Optional[np.ndarray] = None) -> np.ndarray:
        """Nodal interpolation on interior nodes.

        ``func(x, y)`` when ``times`` is None, else ``func(x, y, t)`` evaluated
        at each time in ``times`` (one row per time).
        """
        x = self.grid.coords[:, 0]
        yy = self.grid.coords[:, 1]
        if times is None:
            return np.broadcast_to(np.asarray(func(x, yy), dtype=float), x.shape).copy()
        return np.array(
            [np.broadcast_to(np.asarray(func(x, yy, t), dtype=float), x.shape) for t in times]
        )


def objective_J(
    disc: Discretization,
    u: np.ndarray,
    y_d: np.ndarray,
    gamma_d: float,
    f: Optional[np.ndarray] = None,
    phi: Optional[np.ndarray] = None,
) -> float:
    """``gamma_d/2 ||S(u) - y_d||_Y^2 + 1/2 ||u||_U^2``."""
    y = disc.solve_forward(u, f, phi)
    r = y[1:] - _levels_1_to_nt(y_d, disc.grid)
    return 0.5 * gamma_d * disc.dot_Y(r, r) + 0.5 * disc.dot_U(u, u)


def objective_full(
    disc: Discretization,
    z: np.ndarray,
    y_d: np.ndarray,
    gamma_d: float,
    gamma_s: float,
    f: Optional[np.ndarray] = None,
    phi: Optional[np.ndarray] = None,
) -> float:
    return objective_J(disc, z, y_d, gamma_d, f, phi) + gamma_s * disc.l1_U(z)


def _levels_1_to_nt(y: np.ndarray, grid: Grid) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim == 2 and y.shape == (grid.n_t + 1, grid.n_state):
        return y[1:]
    _check_shape(y, (grid.n_t, grid.n_state), "state trajectory")
    return y


def _check_shape(a: np.ndarray, shape, what: str):
    if np.shape(a) != tuple(shape):
        raise DataError(f"{what} has shape {np.shape(a)}, expected {tuple(shape)}")


def _check_finite(a: np.ndarray, what: str):
    if not np.all(np.isfinite(a)):
        raise DataError(f"{what} contains non-finite entries")
