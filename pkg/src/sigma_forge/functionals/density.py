"""Density configurations and evaluation of the weighted invariants on quadrature nodes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property

import numpy as np

from .. import wsym
from ..geom import Backend, PolyField, SphereField, TrigField
from ..geom.quadrature import QuadratureRule

__all__ = [
    "MODES",
    "DensityConfig",
    "NodeState",
    "HatWCoeffs",
    "evaluate",
    "sigma_field",
    "w_eval",
    "weighted_volume",
    "normalize_c1",
    "hat_sigma",
    "hat_w_coeffs",
    "hat_w_eval",
    "field_laplacian",
    "field_grad_sq",
    "sigma1_field",
    "field_scale",
]

MODES = ("shrinking", "steady", "expanding", "explicit")

_DEFAULT_ORDER = {"euclidean": 24, "torus": 32, "sphere": 16}


@dataclass(frozen=True, eq=False)
class DensityConfig:
    """A backend with density ``e^{-phi}``, scale ``tau`` and soliton mode.

    ``lam`` is ``1/(2 tau)``, ``0`` or ``-1/(2 tau)`` for the shrinking, steady and
    expanding modes; mode ``explicit`` takes it from ``lam_override``.  A fixed
    ``rule`` keeps the quadrature nodes of a base configuration along variations.
    """

    backend: Backend
    phi: PolyField | TrigField | SphereField
    tau: float
    mode: str = "shrinking"
    lam_override: float | None = None
    order: int | None = None
    rule: QuadratureRule | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError("tau must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "explicit" and self.lam_override is None:
            raise ValueError("explicit mode needs lam_override")
        if self.mode != "explicit" and self.lam_override is not None:
            raise ValueError("lam_override is only allowed with mode='explicit'")
        self.backend.check_field(self.phi)
        if self.order is None:
            object.__setattr__(self, "order", _DEFAULT_ORDER[self.backend.kind])

    @property
    def n(self) -> int:
        return self.backend.n

    @property
    def lam(self) -> float:
        if self.mode == "shrinking":
            return 1 / (2 * self.tau)
        if self.mode == "steady":
            return 0.0
        if self.mode == "expanding":
            return -1 / (2 * self.tau)
        return float(self.lam_override)

    @property
    def gaussian_factor(self) -> float:
        return (4 * math.pi * self.tau) ** (-self.n / 2)

    def quadrature(self) -> QuadratureRule:
        if self.rule is None:
            object.__setattr__(self, "rule", self.backend.quadrature(self.order, self.phi))
        return self.rule

    def frozen(self) -> "DensityConfig":
        """Copy that pins the current quadrature nodes for later variations."""
        return replace(self, rule=self.quadrature())

    def with_phi(self, phi) -> "DensityConfig":
        return replace(self, phi=phi, rule=self.quadrature())

    def with_tau(self, tau: float) -> "DensityConfig":
        return replace(self, tau=tau, rule=self.quadrature())

    def with_backend(self, backend: Backend) -> "DensityConfig":
        return replace(self, backend=backend, rule=None)

    def with_lambda(self, lam: float) -> "DensityConfig":
        return replace(self, mode="explicit", lam_override=lam, rule=self.quadrature())


@dataclass(frozen=True, eq=False)
class NodeState:
    """Curvature data and weighted invariants at the quadrature nodes."""

    cfg: DensityConfig
    kmax: int
    shift: float
    points: np.ndarray
    phi: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    Y: np.ndarray
    ric: np.ndarray
    eig: np.ndarray
    sig: np.ndarray
    measure: np.ndarray

    @cached_property
    def newton(self) -> np.ndarray:
        """``T_0 .. T_kmax`` at every node, shape ``(N, kmax+1, n, n)``."""
        return wsym.newton_transform_batch(self.sig, self.ric, self.kmax)

    @property
    def weight(self) -> np.ndarray:
        """Node weights of ``(4 pi tau)^{-n/2} e^{-phi} dvol``."""
        return self.cfg.gaussian_factor * self.measure

    def integrate(self, values) -> float:
        values = np.asarray(values)
        w = self.weight.reshape(self.weight.shape + (1,) * (values.ndim - 1))
        return np.sum(np.ascontiguousarray(w * values), axis=0)


def evaluate(cfg: DensityConfig, kmax: int, shift: float = 0.0) -> NodeState:
    """Evaluate ``sigma_j(Y + shift; ric)`` for ``j <= kmax`` at every node."""
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    rule = cfg.quadrature()
    x = rule.points
    d = cfg.backend.node_data(cfg.phi, cfg.lam, x)
    Y = d.Y + shift
    eig = np.linalg.eigvalsh(d.ric)
    sig = wsym.sigma_table(kmax, Y, eig)
    return NodeState(
        cfg=cfg, kmax=kmax, shift=shift, points=x, phi=d.phi, grad=d.grad, hess=d.hess,
        Y=Y, ric=d.ric, eig=eig, sig=sig, measure=rule.measure(d.phi),
    )


def field_scale(state: NodeState, k: int) -> float:
    """Magnitude used for relative tolerances of degree-``k`` node quantities."""
    size = np.abs(state.Y) + np.abs(state.eig).sum(axis=-1) + np.linalg.norm(state.grad, axis=-1)
    return float(np.max((size + 1.0) ** max(k, 1)))


def sigma_field(k: int, cfg: DensityConfig) -> np.ndarray:
    """The weighted sigma_k-curvature at the quadrature nodes."""
    return evaluate(cfg, k).sig[:, k]


def weighted_volume(cfg: DensityConfig) -> float:
    """``int (4 pi tau)^{-n/2} e^{-phi} dvol``."""
    rule = cfg.quadrature()
    return float(cfg.gaussian_factor * np.sum(rule.measure(cfg.phi(rule.points))))


def w_eval(k: int, cfg: DensityConfig) -> float:
    """``W_k = int tau^k sigma_k (4 pi tau)^{-n/2} e^{-phi} dvol``; ``W_0`` is the weighted volume."""
    if k == 0:
        return weighted_volume(cfg)
    st = evaluate(cfg, k)
    return float(cfg.tau**k * st.integrate(st.sig[:, k]))


def normalize_c1(cfg: DensityConfig) -> DensityConfig:
    """Add the constant to ``phi`` that makes the weighted volume equal to one."""
    vol = weighted_volume(cfg)
    if not (vol > 0 and math.isfinite(vol)):
        raise ValueError(f"weighted volume must be positive and finite, got {vol}")
    return cfg.with_phi(cfg.phi + math.log(vol))


# -- the shifted invariants and the combination with gradient tau^k sigma_hat_k ----------


@dataclass(frozen=True)
class HatWCoeffs:
    """Coefficients ``c_0 .. c_k`` of the combination ``sum_m c_m W_m``.

    Fixed by ``c_k = 1`` and ``c_m - c_{m+1}/2 = (-1/2)**(k-m) / (k-m)!``.
    """

    k: int
    coeffs: tuple[float, ...]
    exact: tuple[Fraction, ...] = field(repr=False, default=())


def hat_w_coeffs(k: int) -> HatWCoeffs:
    if k < 1:
        raise ValueError("k must be positive")
    c = [Fraction(0)] * (k + 2)
    for m in range(k, -1, -1):
        c[m] = Fraction(-1, 2) ** (k - m) / math.factorial(k - m) + c[m + 1] / 2
    exact = tuple(c[: k + 1])
    return HatWCoeffs(k=k, coeffs=tuple(float(v) for v in exact), exact=exact)


def _require_shrinking(cfg):
    if cfg.mode != "shrinking":
        raise ValueError("this construction needs the shrinking mode (lambda = 1/(2 tau))")


def hat_sigma(k: int, cfg: DensityConfig) -> np.ndarray:
    """``sigma_k(Y - lambda; ric)`` at the nodes."""
    return evaluate(cfg, k, shift=-cfg.lam).sig[:, k]


def hat_w_eval(k: int, cfg: DensityConfig) -> float:
    _require_shrinking(cfg)
    coeffs = hat_w_coeffs(k).coeffs
    st = evaluate(cfg, k)
    total = coeffs[0] * st.integrate(np.ones_like(st.Y))
    for m in range(1, k + 1):
        total += coeffs[m] * cfg.tau**m * st.integrate(st.sig[:, m])
    return float(total)


# -- field algebra for exact derived fields -----------------------------------------


def field_laplacian(backend: Backend, f):
    backend.check_field(f)
    if backend.kind == "sphere":
        return f.laplacian() * (1.0 / backend.scale)
    out = 0.0 * f
    for i in range(backend.n):
        out = out + f.partial(i, 2)
    return out * (1.0 / backend.scale)


def field_grad_sq(backend: Backend, f):
    backend.check_field(f)
    if backend.kind == "sphere":
        return f.grad_sq() * (1.0 / backend.scale)
    out = 0.0 * f
    for i in range(backend.n):
        d = f.partial(i)
        out = out + d * d
    return out * (1.0 / backend.scale)


def sigma1_field(cfg: DensityConfig):
    """``sigma_1 = R/2 - |grad phi|^2/2 + Delta phi + lambda (phi - n)`` as an exact field."""
    b, phi, lam = cfg.backend, cfg.phi, cfg.lam
    return (
        field_laplacian(b, phi)
        - 0.5 * field_grad_sq(b, phi)
        + lam * phi
        + (0.5 * b.scalar_curvature - lam * b.n)
    )
