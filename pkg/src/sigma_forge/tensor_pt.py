"""Pointwise tensor algebra in an orthonormal frame.

The metric is the identity in every frame used here, so upper and lower indices
are interchangeable.  Conventions:

* ``riem[i, j, k, l]`` is normalised so that ``sum_i riem[i, x, i, y] = Ric[x, y]``;
  the unit sphere has ``riem = d_ik d_jl - d_il d_jk``.
* ``cotton[a, b, c] = (nabla_a Ric)(b, c) - (nabla_b Ric)(a, c)``.
* ``(A . dB)[c] = sum_ab A[a, b] dB[a, c, b]``: the middle slot is the output.

Every kernel accepts leading batch axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import wsym

__all__ = [
    "PointCurvature",
    "project_curvature",
    "curvature_residuals",
    "constant_curvature",
    "rm_dot",
    "a_dot_db",
    "rm_direction",
    "sigma_pt",
    "newton_pt",
    "e_pt",
    "s_tensor",
    "s_tensor_batch",
    "to_flat_leading_coeff",
    "point_scale",
]


def project_curvature(R) -> np.ndarray:
    """Project a 4-tensor onto algebraic curvature tensors.

    Antisymmetrises each index pair, symmetrises under pair exchange and removes
    the totally antisymmetric (first Bianchi) part.
    """
    R = np.asarray(R, dtype=float)
    R = 0.5 * (R - R.transpose(1, 0, 2, 3))
    R = 0.5 * (R - R.transpose(0, 1, 3, 2))
    R = 0.5 * (R + R.transpose(2, 3, 0, 1))
    cyc = R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)
    R = R - cyc / 3.0
    # restore the antisymmetries exactly after the Bianchi correction
    R = 0.5 * (R - R.transpose(1, 0, 2, 3))
    R = 0.5 * (R - R.transpose(0, 1, 3, 2))
    return 0.5 * (R + R.transpose(2, 3, 0, 1))


def curvature_residuals(R) -> dict[str, float]:
    """Max violations of the algebraic curvature identities."""
    R = np.asarray(R)
    return {
        "antisym_12": float(np.abs(R + R.transpose(1, 0, 2, 3)).max(initial=0.0)),
        "antisym_34": float(np.abs(R + R.transpose(0, 1, 3, 2)).max(initial=0.0)),
        "pair_swap": float(np.abs(R - R.transpose(2, 3, 0, 1)).max(initial=0.0)),
        "bianchi": float(
            np.abs(R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)).max(initial=0.0)
        ),
    }


def constant_curvature(n: int, K: float = 1.0) -> np.ndarray:
    d = np.eye(n)
    return K * (np.einsum("ik,jl->ijkl", d, d) - np.einsum("il,jk->ijkl", d, d))


@dataclass(frozen=True, eq=False)
class PointCurvature:
    """Curvature snapshot at a point: ``Y``, the modified Bakry-Emery Ricci tensor,
    its exterior derivative (weighted Cotton tensor) and the Riemann tensor."""

    Y: float
    ric: np.ndarray
    cotton: np.ndarray | None = None
    riem: np.ndarray | None = None

    def __post_init__(self):
        ric = np.array(self.ric, dtype=float)
        n = ric.shape[0]
        if ric.shape != (n, n):
            raise ValueError(f"ric must be square, got {ric.shape}")
        ric = 0.5 * (ric + ric.T)
        cotton = np.zeros((n, n, n)) if self.cotton is None else np.array(self.cotton, float)
        riem = np.zeros((n,) * 4) if self.riem is None else np.array(self.riem, float)
        if cotton.shape != (n,) * 3 or riem.shape != (n,) * 4:
            raise ValueError("cotton/riem dimensions do not match ric")
        if np.abs(cotton + cotton.transpose(1, 0, 2)).max(initial=0.0) > 1e-12 * (
            1 + np.abs(cotton).max(initial=0.0)
        ):
            raise ValueError("cotton tensor must be antisymmetric in its first two slots")
        cotton = 0.5 * (cotton - cotton.transpose(1, 0, 2))
        object.__setattr__(self, "Y", float(self.Y))
        object.__setattr__(self, "ric", ric)
        object.__setattr__(self, "cotton", cotton)
        object.__setattr__(self, "riem", riem)

    @property
    def n(self) -> int:
        return self.ric.shape[0]

    def pair(self, shift: float = 0.0) -> wsym.SymPair:
        return wsym.SymPair(self.Y + shift, self.ric)


def _check_dims(*arrays):
    n = {a.shape[-1] for a in arrays}
    if len(n) != 1:
        raise ValueError(f"dimension mismatch: {[a.shape for a in arrays]}")


def rm_dot(riem, S) -> np.ndarray:
    """``(Rm . S)[x, y] = sum_ij riem[i, x, j, y] S[i, j]``."""
    riem = np.asarray(riem)
    S = np.asarray(S)
    _check_dims(riem, S)
    return np.einsum("...ixjy,...ij->...xy", riem, S)


def a_dot_db(A, dB) -> np.ndarray:
    """``v[c] = sum_ab A[a, b] dB[a, c, b]``."""
    A = np.asarray(A)
    dB = np.asarray(dB)
    _check_dims(A, dB)
    return np.einsum("...ab,...acb->...c", A, dB)


def rm_direction(riem, X) -> np.ndarray:
    """The 3-tensor ``Rm(., ., X, .)``: ``out[a, b, c] = sum_d riem[a, b, d, c] X[d]``."""
    return np.einsum("...abdc,...d->...abc", np.asarray(riem), np.asarray(X))


def point_scale(pc: PointCurvature, k: int) -> float:
    mu = np.linalg.eigvalsh(pc.ric)
    return (abs(pc.Y) + np.abs(mu).sum() + 1.0) ** k


def sigma_pt(k: int, pc: PointCurvature, shift: float = 0.0) -> float:
    """The weighted sigma_k-curvature ``sigma_k(Y + shift; ric)`` at the point."""
    return wsym.weighted_sigma(k, pc.pair(shift).spectrum())


def newton_pt(k: int, pc: PointCurvature, shift: float = 0.0) -> np.ndarray:
    return wsym.newton_transform(k, pc.pair(shift))


def e_pt(k: int, pc: PointCurvature, shift: float = 0.0) -> np.ndarray:
    """Trace-adjusted Newton tensor ``T_k - sigma_k I``."""
    return newton_pt(k, pc, shift) - sigma_pt(k, pc, shift) * np.eye(pc.n)


def s_tensor_batch(k: int, T: np.ndarray, ric: np.ndarray, cotton: np.ndarray) -> np.ndarray:
    """Batched obstruction vector from a stack of Newton tensors ``T[..., j, :, :]``.

    ``sum_{j=0}^{k-3} (-1)**j T_{k-3-j} (ric**(j+1) . cotton)``.
    """
    out = np.zeros(ric.shape[:-1], dtype=np.result_type(T, ric, cotton))
    power = ric
    for j in range(k - 2):
        v = a_dot_db(power, cotton)
        out = out + (-1) ** j * np.einsum("...ab,...b->...a", T[..., k - 3 - j, :, :], v)
        power = power @ ric
    return out


def s_tensor(k: int, pc: PointCurvature) -> np.ndarray:
    """The vector ``S_k`` whose vanishing decides self-adjointness of the linearisation."""
    if k < 1:
        raise ValueError("k must be positive")
    if k <= 2:
        return np.zeros(pc.n)
    T = np.stack([newton_pt(j, pc) for j in range(k - 2)])
    return s_tensor_batch(k, T, pc.ric, pc.cotton)


def to_flat_leading_coeff(k: int, pc: PointCurvature, X, grad_phi):
    """Leading t-coefficient of ``S_k`` along the one-parameter family that adds
    ``t psi`` to the potential, where ``psi`` vanishes at the point together with
    its Hessian and has gradient ``X``.

    Along the family ``Y_t = Y - t <grad phi, X> - t**2 |X|**2 / 2``, ``ric`` is
    unchanged and ``cotton_t = cotton - t Rm(., ., X, .)``.  ``S_k`` is a vector
    polynomial of degree ``2k - 5`` in ``t``; it is sampled at ``2k - 4`` Chebyshev
    nodes and interpolated.

    Returns ``(fitted, predicted)`` where ``predicted`` is
    ``(-1)**k (|X|**2/2)**(k-3) / (k-3)! * ric . Rm(., ., X, .)``.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    X = np.asarray(X, dtype=float)
    grad_phi = np.asarray(grad_phi, dtype=float)
    deg = 2 * k - 5
    m = deg + 1
    nodes = np.cos(np.pi * (np.arange(m) + 0.5) / m)
    if len(np.unique(nodes)) != m:
        raise ValueError("interpolation nodes must be distinct")
    half_sq = 0.5 * float(X @ X)
    rmX = rm_direction(pc.riem, X)
    samples = []
    for t in nodes:
        pct = PointCurvature(
            Y=pc.Y - t * float(grad_phi @ X) - t**2 * half_sq,
            ric=pc.ric,
            cotton=pc.cotton - t * rmX,
            riem=pc.riem,
        )
        samples.append(s_tensor(k, pct))
    samples = np.asarray(samples)
    V = np.vander(nodes, m, increasing=True)
    coeffs = np.linalg.solve(V, samples)
    fitted = coeffs[-1]
    predicted = (-1) ** k * half_sq ** (k - 3) / math.factorial(k - 3) * a_dot_db(pc.ric, rmX)
    return fitted, predicted
