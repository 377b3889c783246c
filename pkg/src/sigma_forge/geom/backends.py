"""Model geometries: Euclidean space, the flat torus and the round sphere.

Each backend carries a homothety factor ``scale`` (the metric is ``scale * g0``)
and turns coordinate jets of a field into components in an orthonormal frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .. import tensor_pt
from .fields import PolyField, SphereField, TrigField
from .quadrature import QuadratureRule, gauss_hermite_rule, sphere_rule, torus_rule

__all__ = ["Backend", "NodeData", "sphere_frame", "sphere_hessian", "sphere_volume"]

KINDS = ("euclidean", "torus", "sphere")
_FIELD_TYPES = {"euclidean": PolyField, "torus": TrigField, "sphere": SphereField}


def sphere_volume(n: int) -> float:
    """Area of the unit ``S**n``."""
    return 2 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def sphere_frame(p) -> np.ndarray:
    """Orthonormal tangent frames at unit vectors ``p``; shape ``(..., n+1, n)``.

    Uses the Householder reflection exchanging the last basis vector with ``+-p``.
    """
    p = np.asarray(p, dtype=float)
    d = p.shape[-1]
    e = np.zeros(d)
    e[-1] = 1.0
    sign = np.where(p[..., -1:] > 0, 1.0, -1.0)
    v = e + sign * p
    vv = np.sum(v * v, axis=-1)[..., None, None]
    H = np.eye(d) - 2 * v[..., :, None] * v[..., None, :] / vv
    return H[..., :, : d - 1]


def _check_on_sphere(p, tol=1e-10):
    r = np.linalg.norm(np.asarray(p, dtype=float), axis=-1)
    if np.any(np.abs(r - 1) > tol):
        raise ValueError("points must lie on the unit sphere")


def sphere_hessian(f: SphereField, p) -> np.ndarray:
    """Hessian of the restriction of ``f`` to the unit sphere, in the frame of
    :func:`sphere_frame`: ``E^T (Hess F - (p.grad F) I) E``."""
    p = np.asarray(p, dtype=float)
    _check_on_sphere(p)
    _, g, H = f.ambient_jets(p, 2)
    E = sphere_frame(p)
    radial = np.sum(p * g, axis=-1)[..., None, None]
    A = H - radial * np.eye(p.shape[-1])
    return np.swapaxes(E, -1, -2) @ A @ E


@dataclass(frozen=True, eq=False)
class NodeData:
    """Frame-level curvature data at a batch of points (possibly complex-shifted)."""

    phi: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    Y: np.ndarray
    ric: np.ndarray
    lam: float

    @property
    def n(self) -> int:
        return self.grad.shape[-1]


@dataclass(frozen=True)
class Backend:
    kind: str
    n: int
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}; expected one of {KINDS}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("dimension must be a positive integer")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("metric scale must be positive and finite")

    # -- constructors ---------------------------------------------------
    @classmethod
    def euclidean(cls, n: int, scale: float = 1.0) -> "Backend":
        return cls("euclidean", n, scale)

    @classmethod
    def torus(cls, n: int, scale: float = 1.0) -> "Backend":
        return cls("torus", n, scale)

    @classmethod
    def sphere(cls, n: int, scale: float = 1.0) -> "Backend":
        return cls("sphere", n, scale)

    def scale_metric(self, c: float) -> "Backend":
        """The same manifold with metric multiplied by ``c``."""
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return replace(self, scale=self.scale * c)

    @property
    def flat(self) -> bool:
        return self.kind != "sphere"

    @property
    def coord_dim(self) -> int:
        return self.n + 1 if self.kind == "sphere" else self.n

    # -- intrinsic curvature in an orthonormal frame --------------------
    @property
    def scalar_curvature(self) -> float:
        return self.n * (self.n - 1) / self.scale if self.kind == "sphere" else 0.0

    @property
    def ricci(self) -> np.ndarray:
        if self.kind == "sphere":
            return (self.n - 1) / self.scale * np.eye(self.n)
        return np.zeros((self.n, self.n))

    @property
    def riemann(self) -> np.ndarray:
        if self.kind == "sphere":
            return tensor_pt.constant_curvature(self.n, 1.0 / self.scale)
        return np.zeros((self.n,) * 4)

    def volume_factor(self) -> float:
        return self.scale ** (self.n / 2)

    # -- fields -----------------------------------------------------------
    def check_field(self, f) -> None:
        want = _FIELD_TYPES[self.kind]
        if not isinstance(f, want):
            raise TypeError(f"{self.kind} backend needs a {want.__name__}, got {type(f).__name__}")
        if f.dim != self.coord_dim:
            raise ValueError(f"field dimension {f.dim} does not match backend ({self.coord_dim})")

    def frame_jets(self, f, x, order: int = 2):
        """Value, frame gradient and frame Hessian (and for flat kinds the third
        derivative) of ``f`` at coordinates ``x``."""
        self.check_field(f)
        x = np.asarray(x)
        if self.kind == "sphere":
            if order > 2:
                raise ValueError("sphere jets are available through second order")
            _check_on_sphere(x)
            v, g, H = f.ambient_jets(x, 2)
            E = sphere_frame(x)
            Et = np.swapaxes(E, -1, -2)
            grad = np.einsum("...ai,...a->...i", E, g) / math.sqrt(self.scale)
            radial = np.sum(x * g, axis=-1)[..., None, None]
            hess = Et @ (H - radial * np.eye(self.coord_dim)) @ E / self.scale
            return (v, grad, hess)[: order + 1]
        jets = f.jets(x, order)
        c = self.scale
        return tuple(j / c ** (r / 2) for r, j in enumerate(jets))

    def node_data(self, phi, lam: float, x) -> NodeData:
        v, g, H = self.frame_jets(phi, x, 2)
        Y = -0.5 * (self.scalar_curvature + np.sum(g * g, axis=-1) - 2 * lam * v)
        ric = self.ricci - lam * np.eye(self.n) + H
        return NodeData(phi=v, grad=g, hess=H, Y=Y, ric=ric, lam=lam)

    def cotton(self, phi, x) -> np.ndarray:
        """Exterior derivative of the modified Bakry-Emery Ricci tensor, frame components."""
        if self.kind == "sphere":
            _, g = self.frame_jets(phi, x, 1)
            # d(Hess phi)(a, b, c) = -Rm(a, b, grad phi, c) when Ric is parallel
            return -tensor_pt.rm_direction(self.riemann, g)
        third = self.frame_jets(phi, x, 3)[3]
        return third - np.swapaxes(third, -3, -2)

    def point_curvature(self, phi, lam: float, p) -> tensor_pt.PointCurvature:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.coord_dim,):
            raise ValueError(f"expected a single point of dimension {self.coord_dim}")
        d = self.node_data(phi, lam, p)
        return tensor_pt.PointCurvature(
            Y=float(d.Y), ric=d.ric, cotton=self.cotton(phi, p), riem=self.riemann
        )

    # -- quadrature -------------------------------------------------------
    def quadrature(self, order: int, phi=None) -> QuadratureRule:
        """Rule for ``int . dvol``.

        ``order`` is the per-axis Gauss-Hermite order (euclidean, adapted to the
        quadratic part of ``phi``), the grid size per axis (torus) or the Jacobi
        order (sphere).
        """
        vol = self.volume_factor()
        if self.kind == "torus":
            return torus_rule(order, self.n, vol)
        if self.kind == "sphere":
            return sphere_rule(order, self.n, vol)
        if phi is None:
            raise ValueError("a euclidean rule needs the potential to read off its Gaussian part")
        self.check_field(phi)
        center, precision = gaussian_part(phi)
        return gauss_hermite_rule(order, center, precision, vol)


def gaussian_part(phi: PolyField):
    """Center and precision matrix of the quadratic part of a polynomial potential."""
    q = phi.quadratic_part()
    n = phi.dim
    z = np.zeros(n)
    _, b, A = q.jets(z, 2)
    A = np.asarray(A, dtype=float)
    if np.linalg.eigvalsh(A).min() <= 0:
        raise ValueError("the quadratic part of the potential must be positive definite")
    return -np.linalg.solve(A, b), A
