"""Matrix-free conjugate gradients for the u-subproblem."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import NotSPDError, ParameterError


@dataclass
class CgOutcome:
    u: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    residual_history: List[float] = field(default_factory=list)


def cg_solve(
    op,
    d: np.ndarray,
    u0: Optional[np.ndarray],
    theta: float,
    max_iter: Optional[int] = None,
    callback: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None,
) -> CgOutcome:
    """Run CG on ``H u = d`` in the ``dot_U`` inner product until ``||H u - d|| <= theta``.

    ``r`` tracks ``d - H u = -sigma(u)``. The initial residual is tested before
    the first step, so an already-accepted warm start costs no iterations.
    ``callback(m, u, r)`` is invoked after every step.
    """
    if not theta > 0:
        raise ParameterError(f"CG tolerance must be positive, got {theta}")
    if max_iter is None:
        max_iter = int(np.prod(d.shape))

    u = np.zeros_like(d) if u0 is None else np.array(u0, dtype=float, copy=True)
    r = d - op.apply_H(u) if np.any(u) else d.copy()
    rr = op.dot(r, r)
    res = float(np.sqrt(max(rr, 0.0)))
    history = [res]
    q = r.copy()
    m = 0
    while res > theta:
        if m >= max_iter:
            return CgOutcome(u, m, res, False, history)
        Hq = op.apply_H(q)
        curv = op.dot(Hq, q)
        if not curv > 0:
            raise NotSPDError(f"<Hq, q> = {curv:.3e} at CG step {m}")
        alpha = op.dot(r, q) / curv
        u += alpha * q
        r -= alpha * Hq
        rr_new = op.dot(r, r)
        q = r + (rr_new / rr) * q
        rr = rr_new
        res = float(np.sqrt(max(rr, 0.0)))
        history.append(res)
        m += 1
        if callback is not None:
            callback(m, u, r)
    return CgOutcome(u, m, res, True, history)
