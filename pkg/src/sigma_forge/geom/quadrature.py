"""Quadrature rules for weighted integrals ``int f e^{-phi} dvol``.

A rule stores points, weights and a per-node exponent ``log_base``.  The weighted
integral is ``sum_i w_i f_i exp(log_base_i - phi_i)``: on flat compact and spherical
backends ``log_base`` is zero, while Gauss-Hermite rules carry the quadratic
exponent they were built around so the Gaussian factor cancels analytically.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_hermitenorm, roots_jacobi

__all__ = [
    "QuadratureRule",
    "gauss_hermite_rule",
    "torus_rule",
    "sphere_rule",
]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    log_base: np.ndarray
    description: str = ""

    def __post_init__(self):
        for name in ("points", "weights", "log_base"):
            a = np.ascontiguousarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def measure(self, phi_vals) -> np.ndarray:
        """Per-node weights of ``e^{-phi} dvol``."""
        return self.weights * np.exp(self.log_base - np.asarray(phi_vals))

    def integrate(self, values, phi_vals=None):
        """``int values e^{-phi} dvol``; ``values`` may carry trailing axes."""
        values = np.asarray(values)
        w = self.weights if phi_vals is None else self.measure(phi_vals)
        if phi_vals is None and np.any(self.log_base != 0):
            w = w * np.exp(self.log_base)
        w = w.reshape(w.shape + (1,) * (values.ndim - 1))
        # np.sum over a contiguous axis uses pairwise summation
        return np.sum(np.ascontiguousarray(w * values), axis=0)


def _check_order(q):
    if int(q) != q or q < 2:
        raise ValueError(f"quadrature order must be an integer >= 2, got {q}")
    return int(q)


@lru_cache(maxsize=64)
def _hermite_1d(q):
    z, w = roots_hermitenorm(q)
    return z, w


def gauss_hermite_rule(q: int, center, precision, volume_factor: float = 1.0) -> QuadratureRule:
    """Tensor Gauss-Hermite rule adapted to ``(x - center).precision.(x - center) / 2``.

    Exact for ``poly(x) exp(-quadratic)`` through degree ``2q - 1`` in each variable.
    """
    q = _check_order(q)
    center = np.atleast_1d(np.asarray(center, dtype=float))
    precision = np.atleast_2d(np.asarray(precision, dtype=float))
    n = center.shape[0]
    evals, evecs = np.linalg.eigh(0.5 * (precision + precision.T))
    if evals.min() <= 0:
        raise ValueError("the quadratic part of the potential must be positive definite")
    # x = center + L z with L^T precision L = I
    L = evecs / np.sqrt(evals)
    z1, w1 = _hermite_1d(q)
    grids = np.meshgrid(*([z1] * n), indexing="ij")
    Z = np.stack([g.ravel() for g in grids], axis=-1)
    W = np.ones(Z.shape[0])
    for g in np.meshgrid(*([w1] * n), indexing="ij"):
        W = W * g.ravel()
    X = center + Z @ L.T
    det = 1.0 / np.sqrt(np.prod(evals))
    log_base = 0.5 * np.sum(Z * Z, axis=1)
    return QuadratureRule(X, W * det * volume_factor, log_base, f"gauss-hermite q={q} n={n}")


def torus_rule(grid: int, n: int, volume_factor: float = 1.0) -> QuadratureRule:
    """Uniform grid on ``[0, 2 pi)**n``; exact for trig polynomials of degree < ``grid``."""
    grid = _check_order(grid)
    t = 2 * np.pi * np.arange(grid) / grid
    X = np.stack([g.ravel() for g in np.meshgrid(*([t] * n), indexing="ij")], axis=-1)
    w = np.full(X.shape[0], (2 * np.pi / grid) ** n * volume_factor)
    return QuadratureRule(X, w, np.zeros(X.shape[0]), f"torus grid={grid} n={n}")


def _sphere_nodes(m: int, q: int):
    """Nodes and weights on the unit sphere ``S**m`` in ``R**(m+1)``."""
    if m == 1:
        a = 2 * np.pi * np.arange(2 * q) / (2 * q)
        return np.stack([np.cos(a), np.sin(a)], axis=-1), np.full(2 * q, np.pi / q)
    # x = (sqrt(1 - t^2) y, t) with y on S^{m-1}; area element (1 - t^2)^{(m-2)/2} dt dy
    a = 0.5 * (m - 2)
    t, wt = roots_jacobi(q, a, a)
    Y, wy = _sphere_nodes(m - 1, q)
    r = np.sqrt(1 - t * t)
    X = np.concatenate(
        [(r[:, None, None] * Y[None]).reshape(-1, m), np.repeat(t, Y.shape[0])[:, None]],
        axis=-1,
    )
    W = np.repeat(wt, Y.shape[0]) * np.tile(wy, q)
    return X, W


def sphere_rule(q: int, n: int, volume_factor: float = 1.0) -> QuadratureRule:
    """Product Gauss-Jacobi x uniform rule on ``S**n``.

    Exact for restrictions of polynomials of degree ``<= 2q - 1``.
    """
    q = _check_order(q)
    if n < 1:
        raise ValueError("sphere dimension must be at least 1")
    X, W = _sphere_nodes(n, q)
    X = X / np.linalg.norm(X, axis=-1, keepdims=True)
    return QuadratureRule(X, W * volume_factor, np.zeros(W.shape[0]), f"sphere q={q} n={n}")
