"""Uniform space-time grid on the unit square and P1 finite-element operators.

Nodes are numbered row-major by ``(j, i)`` where ``x = i*h`` and ``y = j*h``.
Only interior nodes carry degrees of freedom (homogeneous Dirichlet data).
Each cell is split along its lower-left to upper-right diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError

Rect = Tuple[float, float, float, float]

ENTIRE = "entire"

# reference-element mass matrix on a triangle of unit area
_MASS_REF = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


@dataclass(frozen=True)
class GridSpec:
    """Mesh parameters: ``m`` cells per side, ``n_t`` time steps on ``(0, T)``.

    ``subdomain`` is ``"entire"`` or ``(x_lo, x_hi, y_lo, y_hi)`` with corners
    on mesh lines.
    """

    m: int
    n_t: int
    T: float = 1.0
    subdomain: Union[str, Rect] = ENTIRE

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ConfigurationError(f"m must be an integer >= 2, got {self.m!r}")
        if int(self.n_t) != self.n_t or self.n_t < 1:
            raise ConfigurationError(f"n_t must be an integer >= 1, got {self.n_t!r}")
        if not self.T > 0:
            raise ConfigurationError(f"T must be positive, got {self.T!r}")
        if isinstance(self.subdomain, str):
            if self.subdomain != ENTIRE:
                raise ConfigurationError(f"unknown subdomain {self.subdomain!r}")
            return
        rect = tuple(float(c) for c in self.subdomain)
        if len(rect) != 4:
            raise ConfigurationError("subdomain must be (x_lo, x_hi, y_lo, y_hi)")
        x_lo, x_hi, y_lo, y_hi = rect
        if not (0.0 <= x_lo < x_hi <= 1.0 and 0.0 <= y_lo < y_hi <= 1.0):
            raise ConfigurationError(f"subdomain {rect} is empty or leaves [0, 1]^2")
        for name, c in zip(("x_lo", "x_hi", "y_lo", "y_hi"), rect):
            k = c * self.m
            if abs(k - round(k)) > 1e-9:
                raise ConfigurationError(
                    f"subdomain coordinate {name}={c} is not a multiple of h=1/{self.m}"
                )
        object.__setattr__(self, "subdomain", rect)

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def tau(self) -> float:
        return self.T / self.n_t


@dataclass(frozen=True, eq=False)
class Grid:
    spec: GridSpec
    coords: np.ndarray  # (N_s, 2) interior node coordinates
    elements: np.ndarray  # (n_el, 3) indices into the full (m+1)^2 node set
    interior: np.ndarray  # full node index -> interior index, -1 on the boundary
    control_nodes: np.ndarray  # sorted interior indices inside the closed subdomain

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def n_t(self) -> int:
        return self.spec.n_t

    @property
    def h(self) -> float:
        return self.spec.h

    @property
    def tau(self) -> float:
        return self.spec.tau

    @property
    def times(self) -> np.ndarray:
        """Time levels ``t_0 .. t_{n_t}``."""
        return np.linspace(0.0, self.spec.T, self.n_t + 1)

    @property
    def n_state(self) -> int:
        return self.coords.shape[0]

    @property
    def n_control(self) -> int:
        return self.control_nodes.size

    @property
    def entire(self) -> bool:
        return self.n_control == self.n_state

    @property
    def control_coords(self) -> np.ndarray:
        return self.coords[self.control_nodes]

    def extend(self, u: np.ndarray) -> np.ndarray:
        """Zero-extend control values (last axis ``N_c``) to all interior nodes."""
        out = np.zeros(u.shape[:-1] + (self.n_state,))
        out[..., self.control_nodes] = u
        return out

    def restrict(self, v: np.ndarray) -> np.ndarray:
        return v[..., self.control_nodes]

    def to_full(self, v: np.ndarray) -> np.ndarray:
        """Interior nodal values -> ``(m+1, m+1)`` array indexed ``[j, i]``."""
        m = self.m
        full = np.zeros((m + 1) ** 2)
        mask = self.interior >= 0
        full[mask] = v[self.interior[mask]]
        return full.reshape(m + 1, m + 1)


def build_grid(spec: GridSpec) -> Grid:
    m = spec.m
    h = spec.h
    n1 = m + 1
    jj, ii = np.meshgrid(np.arange(n1), np.arange(n1), indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()

    is_int = (ii > 0) & (ii < m) & (jj > 0) & (jj < m)
    interior = np.full(n1 * n1, -1, dtype=np.int64)
    interior[is_int] = np.arange(int(is_int.sum()))
    coords = np.column_stack([ii[is_int] * h, jj[is_int] * h])

    ci, cj = np.meshgrid(np.arange(m), np.arange(m), indexing="xy")
    ci = ci.ravel()
    cj = cj.ravel()
    ll = cj * n1 + ci
    lr = ll + 1
    ul = ll + n1
    ur = ul + 1
    elements = np.concatenate(
        [np.column_stack([ll, lr, ur]), np.column_stack([ll, ur, ul])]
    ).astype(np.int64)

    if spec.subdomain == ENTIRE:
        control = np.arange(coords.shape[0])
    else:
        x_lo, x_hi, y_lo, y_hi = spec.subdomain
        # closed rectangle in integer mesh coordinates
        i_int = np.rint(coords[:, 0] * m).astype(int)
        j_int = np.rint(coords[:, 1] * m).astype(int)
        inside = (
            (i_int >= round(x_lo * m))
            & (i_int <= round(x_hi * m))
            & (j_int >= round(y_lo * m))
            & (j_int <= round(y_hi * m))
        )
        control = np.flatnonzero(inside)
        if control.size == 0:
            raise ConfigurationError(f"subdomain {spec.subdomain} holds no interior node")
    return Grid(spec, coords, elements, interior, control.astype(np.int64))


@dataclass(frozen=True, eq=False)
class AssembledOperators:
    M: sp.csr_matrix
    K: sp.csr_matrix
    M_a0: sp.csr_matrix
    M_G: sp.csr_matrix
    B: sp.csr_matrix
    nu: float
    a0: float
    lumped: bool = False
    lump_G: np.ndarray = field(default=None, repr=False)  # row sums of M_G


def _element_matrices(grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    m = grid.m
    h = grid.h
    n1 = m + 1
    el = grid.elements
    xy = np.column_stack([(np.arange(n1 * n1) % n1) * h, (np.arange(n1 * n1) // n1) * h])
    p = xy[el]  # (n_el, 3, 2)
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    area = 0.5 * np.abs(det)
    # gradients of barycentric coordinates
    g = np.empty((el.shape[0], 3, 2))
    g[:, 1, 0] = d2[:, 1] / det
    g[:, 1, 1] = -d2[:, 0] / det
    g[:, 2, 0] = -d1[:, 1] / det
    g[:, 2, 1] = d1[:, 0] / det
    g[:, 0] = -g[:, 1] - g[:, 2]
    ke = area[:, None, None] * np.einsum("eik,ejk->eij", g, g)
    me = area[:, None, None] * _MASS_REF[None]
    return me, ke


def _scatter(grid: Grid, local: np.ndarray) -> sp.csr_matrix:
    dof = grid.interior[grid.elements]
    rows = np.repeat(dof, 3, axis=1).ravel()
    cols = np.tile(dof, (1, 3)).ravel()
    vals = local.ravel()
    keep = (rows >= 0) & (cols >= 0)
    n = grid.n_state
    mat = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    return mat


def assemble(grid: Grid, nu: float = 1.0, a0: float = 0.0, lumped: bool = False) -> AssembledOperators:
    """Assemble mass, stiffness and reaction operators on the interior nodes.

    With ``lumped=True`` the mass matrix is replaced by its row-sum diagonal.
    """
    if not nu > 0:
        raise ValueError(f"diffusion coefficient must be positive, got {nu}")
    if not a0 >= 0:
        raise ValueError(f"reaction coefficient must be nonnegative, got {a0}")
    me, ke = _element_matrices(grid)
    M = _scatter(grid, me)
    K = _scatter(grid, ke)
    if lumped:
        M = sp.diags(np.asarray(M.sum(axis=1)).ravel()).tocsr()
    c = grid.control_nodes
    if grid.entire:
        M_G = M
        B = M
    else:
        B = M[:, c].tocsr()
        M_G = B[c, :].tocsr()
    lump_G = np.asarray(M_G.sum(axis=1)).ravel()
    return AssembledOperators(M, K, (a0 * M).tocsr(), M_G, B, float(nu), float(a0), lumped, lump_G)
