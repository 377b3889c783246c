"""Pointwise conservation laws and contraction identities checked on quadrature nodes.

Derivatives of the Newton tensors and of the weighted invariants are taken by
complex-step differentiation in the coordinates.  The sigma recursion is run
from power sums so that every step is holomorphic; the result is exact to
rounding, with no subtractive cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import wsym
from .density import DensityConfig, NodeState, evaluate, field_scale

__all__ = [
    "Gradients",
    "node_gradients",
    "DivergenceReport",
    "divergence_residuals",
    "dsigma_identity_residual",
    "ObataReport",
    "obata_identity_residual",
    "CriticalReport",
    "critical_point_residual",
]

_STEP = 1e-20


def _require_flat(cfg: DensityConfig, what: str):
    if not cfg.backend.flat:
        raise ValueError(f"{what} needs a flat backend; covariant derivatives of "
                         "non-parallel tensors on the sphere are not available")


@dataclass(frozen=True, eq=False)
class Gradients:
    """Frame derivatives ``d/dE_a`` stacked on axis 1 (shape ``(N, n, ...)``)."""

    Y: np.ndarray
    sig: np.ndarray
    psums: np.ndarray
    newton: np.ndarray


def node_gradients(cfg: DensityConfig, kmax: int, shift: float = 0.0) -> Gradients:
    _require_flat(cfg, "differentiating node data")
    b = cfg.backend
    x = cfg.quadrature().points
    n = b.n
    dY, dsig, dps, dT = [], [], [], []
    for a in range(n):
        xc = x.astype(complex)
        xc[:, a] += 1j * _STEP
        d = b.node_data(cfg.phi, cfg.lam, xc)
        Y = d.Y + shift
        ps = wsym.power_sums(kmax, d.ric)
        sig = wsym.sigma_from_power_sums(kmax, Y, ps)
        T = wsym.newton_transform_batch(sig, d.ric, kmax)
        dY.append(Y.imag)
        dsig.append(sig.imag)
        dps.append(ps.imag)
        dT.append(T.imag)
    # coordinate derivative / sqrt(scale) = derivative along the unit frame vector
    f = 1.0 / (_STEP * np.sqrt(b.scale))
    return Gradients(
        Y=np.stack(dY, axis=1) * f,
        sig=np.stack(dsig, axis=1) * f,
        psums=np.stack(dps, axis=1) * f,
        newton=np.stack(dT, axis=1) * f,
    )


def weighted_divergence(dA: np.ndarray, A: np.ndarray, grad_phi: np.ndarray) -> np.ndarray:
    """``sum_a (D_a A)(E_a, .) - A(grad phi, .)`` for a batch of 2-tensors."""
    return np.einsum("naac->nc", dA) - np.einsum("nac,na->nc", A, grad_phi)


@dataclass(frozen=True)
class DivergenceReport:
    newton: float
    trace_adjusted: float
    scale: float

    def __iter__(self):
        yield self.newton
        yield self.trace_adjusted


def divergence_residuals(k: int, cfg: DensityConfig, shift: float = 0.0) -> DivergenceReport:
    """Sup-norms of ``div_phi T_k + sigma_k grad phi`` and ``div_phi E_k + d sigma_k``.

    ``shift`` adds a constant to ``Y`` before forming the invariants.
    """
    _require_flat(cfg, "divergence residuals")
    if k < 0:
        raise ValueError("k must be nonnegative")
    st = evaluate(cfg, k, shift)
    gr = node_gradients(cfg, k, shift)
    T = st.newton[:, k]
    dT = gr.newton[:, :, k]
    sig = st.sig[:, k]
    dsig = gr.sig[:, :, k]
    r1 = weighted_divergence(dT, T, st.grad) + sig[:, None] * st.grad
    eye = np.eye(cfg.n)
    E = T - sig[:, None, None] * eye
    dE = dT - dsig[:, :, None, None] * eye
    r2 = weighted_divergence(dE, E, st.grad) + dsig
    return DivergenceReport(
        newton=float(np.abs(r1).max()),
        trace_adjusted=float(np.abs(r2).max()),
        scale=field_scale(st, k + 1),
    )


def dsigma_identity_residual(k: int, cfg: DensityConfig) -> float:
    """Sup-norm of ``d sigma_k - [sigma_{k-1} dY + sum_j (-1)^j/(j+1) sigma_{k-1-j} d tr(ric^{j+1})]``."""
    _require_flat(cfg, "the differential identity")
    if k < 1:
        raise ValueError("k must be positive")
    st = evaluate(cfg, k)
    gr = node_gradients(cfg, k)
    rhs = st.sig[:, None, k - 1] * gr.Y
    for j in range(k):
        rhs = rhs + (-1) ** j / (j + 1) * st.sig[:, None, k - 1 - j] * gr.psums[:, :, j + 1]
    return float(np.abs(gr.sig[:, :, k] - rhs).max())


@dataclass(frozen=True)
class ObataReport:
    """Contraction identity ``<E_k, ric> = (k+1) s_{k+1} - s_1 s_k`` for the shifted invariants
    ``s_j = sigma_j(Y - lambda; ric)``, plus the sign of the bracket where the shifted data
    lie in the negative k-cone."""

    k: int
    residual: float
    scale: float
    cone_nodes: int
    sign_violation: float
    strict_failures: int

    def __float__(self):
        return self.residual


def obata_identity_residual(k: int, cfg: DensityConfig, flat_tol: float = 1e-10) -> ObataReport:
    if k < 1:
        raise ValueError("k must be positive")
    st = evaluate(cfg, k + 1, shift=-cfg.lam)
    s = st.sig
    T = st.newton[:, k]
    E = T - s[:, k, None, None] * np.eye(cfg.n)
    lhs = np.einsum("nab,nab->n", E, st.ric)
    bracket = (k + 1) * s[:, k + 1] - s[:, 1] * s[:, k]
    residual = float(np.abs(lhs - bracket).max())
    scale = field_scale(st, k + 1)

    max_k, _ = wsym.cone_margins(s, k)
    inside = max_k >= k
    signed = (-1) ** (k + 1) * bracket[inside]
    ric_size = np.abs(st.ric[inside]).max(axis=(-2, -1)) if inside.any() else np.zeros(0)
    violation = float(signed.max()) if signed.size else 0.0
    # equality is only allowed where the tensor itself vanishes
    strict = int(np.sum((ric_size >= flat_tol) & (signed >= 0)))
    return ObataReport(
        k=k, residual=residual, scale=scale, cone_nodes=int(inside.sum()),
        sign_violation=max(violation, 0.0), strict_failures=strict,
    )


@dataclass(frozen=True)
class CriticalReport:
    k: int
    spread: float
    trace_integral: float


def _weighted_std(st: NodeState, f: np.ndarray) -> float:
    w = st.weight
    mean = np.sum(w * f) / np.sum(w)
    return float(np.sqrt(max(np.sum(w * (f - mean) ** 2) / np.sum(w), 0.0)))


def critical_point_residual(k: int, cfg: DensityConfig) -> CriticalReport:
    """Residuals of the Euler-Lagrange system for ``W_1`` (any backend) or ``W_2`` (flat)."""
    if k not in (1, 2):
        raise ValueError("critical point equations are available for k = 1, 2")
    if cfg.mode != "shrinking":
        raise ValueError("critical point equations need the shrinking mode")
    if k == 2 and not cfg.backend.flat:
        raise ValueError("k = 2 needs a flat backend, where the weighted Bach tensor vanishes")
    st = evaluate(cfg, 2)
    lam = cfg.lam
    eye = np.eye(cfg.n)
    if k == 1:
        spread = _weighted_std(st, st.sig[:, 1] - lam)
        trace = np.trace(st.ric, axis1=-2, axis2=-1)
    else:
        spread = _weighted_std(st, st.sig[:, 2] - lam * st.sig[:, 1])
        E1 = st.newton[:, 1] - st.sig[:, 1, None, None] * eye
        E2 = st.newton[:, 2] - st.sig[:, 2, None, None] * eye
        trace = np.trace(E2 - lam * E1, axis1=-2, axis2=-1)
    return CriticalReport(k=k, spread=spread, trace_integral=float(np.sum(st.measure * trace)))
