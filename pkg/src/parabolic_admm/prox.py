"""Pointwise proximal maps for the sparsity term and the box constraint."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class BoxBounds:
    a: float
    b: float

    def __post_init__(self):
        if not self.a <= self.b:
            raise ParameterError(f"box bounds need a <= b, got ({self.a}, {self.b})")

    def contains(self, v, atol: float = 0.0) -> bool:
        v = np.asarray(v)
        return bool(np.all(v >= self.a - atol) and np.all(v <= self.b + atol))


def project_box(v, bounds: BoxBounds):
    return np.minimum(bounds.b, np.maximum(v, bounds.a))


def soft_threshold(v, kappa: float):
    if kappa < 0:
        raise ParameterError(f"threshold must be nonnegative, got {kappa}")
    if kappa == 0:
        return np.array(v, dtype=float, copy=True)
    return np.sign(v) * np.maximum(np.abs(v) - kappa, 0.0)


def z_update(u, lam, beta: float, gamma_s: float, bounds: BoxBounds):
    """Closed-form z-step: threshold ``u - lam/beta`` by ``gamma_s/beta``, then clamp.

    This is the exact pointwise minimizer of
    ``gamma_s|z| + I_[a,b](z) + beta/2 (z - (u - lam/beta))^2``.
    """
    if not beta > 0:
        raise ParameterError(f"penalty must be positive, got {beta}")
    if gamma_s < 0:
        raise ParameterError(f"sparsity weight must be nonnegative, got {gamma_s}")
    return project_box(soft_threshold(u - lam / beta, gamma_s / beta), bounds)
