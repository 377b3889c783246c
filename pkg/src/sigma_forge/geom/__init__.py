"""Model backends, exactly differentiable fields and quadrature."""

from .backends import Backend, NodeData, gaussian_part, sphere_frame, sphere_hessian, sphere_volume
from .fields import PolyField, SphereField, TrigField, field_from_literal, random_poly
from .quadrature import QuadratureRule, gauss_hermite_rule, sphere_rule, torus_rule


def point_curvature(backend, phi, lam, p):
    return backend.point_curvature(phi, lam, p)


def quadrature(backend, order, phi=None):
    return backend.quadrature(order, phi)


def scale_metric(backend, c):
    return backend.scale_metric(c)


__all__ = [
    "Backend",
    "NodeData",
    "PolyField",
    "TrigField",
    "SphereField",
    "QuadratureRule",
    "field_from_literal",
    "random_poly",
    "gaussian_part",
    "gauss_hermite_rule",
    "torus_rule",
    "sphere_rule",
    "sphere_frame",
    "sphere_hessian",
    "sphere_volume",
    "point_curvature",
    "quadrature",
    "scale_metric",
]
