"""First and second variations along potential and scale directions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh
from scipy.special import eval_hermitenorm

from .. import wsym
from ..geom import Backend, gaussian_part
from .density import (
    DensityConfig,
    evaluate,
    hat_w_coeffs,
    hat_w_eval,
    normalize_c1,
    w_eval,
)
from .identities import node_gradients

__all__ = [
    "NonVariationalError",
    "VariationPath",
    "richardson_first",
    "richardson_second",
    "first_variation_phi",
    "fd_first_variation",
    "hat_w_gradient",
    "d_operator",
    "d_operator_selfadjoint",
    "selfadjoint_residual",
    "soliton_residual",
    "second_variation",
    "gaussian_second_variation",
    "spectral_gap",
]

STEPS = (1e-3, 5e-4)


class NonVariationalError(ValueError):
    """The requested equation is not the Euler-Lagrange equation of any functional here."""


@dataclass(frozen=True, eq=False)
class VariationPath:
    """Direction ``(phi', tau') = (psi, alpha)``; with ``renormalize`` the path is pushed back
    into the volume-normalised set at every sampled time."""

    psi: object
    alpha: float = 0.0
    renormalize: bool = True


def richardson_first(F: Callable[[float], float], steps=STEPS) -> float:
    h1, h2 = steps
    d1 = (F(h1) - F(-h1)) / (2 * h1)
    d2 = (F(h2) - F(-h2)) / (2 * h2)
    r = (h1 / h2) ** 2
    return (r * d2 - d1) / (r - 1)


def richardson_second(F: Callable[[float], float], steps=STEPS) -> float:
    h1, h2 = steps
    f0 = F(0.0)
    d1 = (F(h1) - 2 * f0 + F(-h1)) / h1**2
    d2 = (F(h2) - 2 * f0 + F(-h2)) / h2**2
    r = (h1 / h2) ** 2
    return (r * d2 - d1) / (r - 1)


def _check_variational(k: int, cfg: DensityConfig):
    if k < 1:
        raise ValueError("k must be positive")
    if k >= 3 and not cfg.backend.flat:
        raise NonVariationalError(
            f"sigma_{k} is not variational on a curved backend; "
            "see selfadjoint_residual for the obstruction"
        )


def first_variation_phi(k: int, cfg: DensityConfig, psi) -> float:
    """``-int tau^k (sigma_k - lambda sigma_{k-1}) psi (4 pi tau)^{-n/2} e^{-phi} dvol``."""
    _check_variational(k, cfg)
    cfg.backend.check_field(psi)
    st = evaluate(cfg, k)
    g = st.sig[:, k] - cfg.lam * st.sig[:, k - 1]
    return float(-(cfg.tau**k) * st.integrate(g * psi(st.points)))


def fd_first_variation(functional: Callable[[DensityConfig], float], cfg: DensityConfig, psi,
                       steps=STEPS) -> float:
    """Richardson central difference of ``functional`` along ``phi + t psi`` on fixed nodes."""
    base = cfg.frozen()
    return richardson_first(lambda t: functional(base.with_phi(base.phi + t * psi)), steps)


def hat_w_gradient(k: int, cfg: DensityConfig, psi) -> float:
    """``-int tau^k sigma_hat_k psi (4 pi tau)^{-n/2} e^{-phi} dvol``."""
    if cfg.mode != "shrinking":
        raise ValueError("needs the shrinking mode")
    _check_variational(k, cfg)
    st = evaluate(cfg, k, shift=-cfg.lam)
    return float(-(cfg.tau**k) * st.integrate(st.sig[:, k] * psi(st.points)))


def d_operator(k: int, cfg: DensityConfig, psi) -> np.ndarray:
    """Linearisation of ``sigma_k`` in the potential, at the nodes:
    ``<T_{k-1}, Hess psi> - sigma_{k-1} <grad phi, grad psi> + lambda sigma_{k-1} psi``."""
    if k < 1:
        raise ValueError("k must be positive")
    st = evaluate(cfg, k - 1)
    v, g, H = cfg.backend.frame_jets(psi, st.points, 2)
    s = st.sig[:, k - 1]
    T = st.newton[:, k - 1]
    return (
        np.einsum("nab,nab->n", T, H)
        - s * np.einsum("na,na->n", st.grad, g)
        + cfg.lam * s * v
    )


def d_operator_selfadjoint(k: int, cfg: DensityConfig, psi) -> np.ndarray:
    """Divergence form ``div_phi(T_{k-1} grad psi) + lambda sigma_{k-1} psi`` (flat backends)."""
    if k < 1:
        raise ValueError("k must be positive")
    st = evaluate(cfg, k - 1)
    gr = node_gradients(cfg, k - 1)
    v, g, H = cfg.backend.frame_jets(psi, st.points, 2)
    T = st.newton[:, k - 1]
    dT = gr.newton[:, :, k - 1]
    div_T = np.einsum("naab->nb", dT)
    return (
        np.einsum("nb,nb->n", div_T, g)
        + np.einsum("nab,nab->n", T, H)
        - np.einsum("na,nab,nb->n", st.grad, T, g)
        + cfg.lam * st.sig[:, k - 1] * v
    )


def selfadjoint_residual(k: int, cfg: DensityConfig, eta, omega) -> float:
    """``int (eta D_k omega - omega D_k eta) e^{-phi} dvol``."""
    st = evaluate(cfg, 0)
    x = st.points
    val = eta(x) * d_operator(k, cfg, omega) - omega(x) * d_operator(k, cfg, eta)
    return float(np.sum(np.ascontiguousarray(st.measure * val)))


def soliton_residual(cfg: DensityConfig) -> float:
    """Sup over nodes of the modified Bakry-Emery Ricci tensor."""
    return float(np.abs(evaluate(cfg, 0).ric).max())


# -- second variation ----------------------------------------------------------------


def _functional(k: int, which: str):
    if which == "W":
        return lambda c: w_eval(k, c)
    if which == "hat":
        return lambda c: hat_w_eval(k, c)
    raise ValueError("functional must be 'W' or 'hat'")


def second_variation(k: int, cfg: DensityConfig, path: VariationPath, h: float | None = None,
                     functional: str = "W", soliton_tol: float = 1e-8,
                     method: str = "contour", contour_points: int = 32) -> float:
    """Second derivative of ``W_k`` (or the shifted combination) along the path.

    ``method="contour"`` evaluates the functional at complex times on a circle of
    radius ``h`` (default 0.05) and applies the Cauchy formula, which avoids the cancellation of
    difference quotients.  ``method="fd"`` uses Richardson-extrapolated central
    differences with steps ``h`` (default 1e-3) and ``h/2``.
    """
    _check_variational(k, cfg)
    if cfg.mode != "shrinking":
        raise ValueError("second variations are taken at shrinking solitons")
    res = soliton_residual(cfg)
    if res > soliton_tol * (1 + abs(cfg.lam)):
        raise ValueError(f"base configuration is not a soliton (residual {res:.3e})")
    cfg.backend.check_field(path.psi)
    base = cfg.frozen()
    if method == "contour":
        return _contour_second(k, base, path, functional, h or 0.05, contour_points)
    if method != "fd":
        raise ValueError("method must be 'contour' or 'fd'")
    h = h or STEPS[0]
    F = _functional(k, functional)

    def along(t):
        c = base.with_phi(base.phi + t * path.psi).with_tau(base.tau + t * path.alpha)
        if path.renormalize:
            c = normalize_c1(c)
        return F(c)

    return richardson_second(along, (h, h / 2))


def _contour_second(k, cfg: DensityConfig, path: VariationPath, functional: str, radius: float,
                    points: int) -> float:
    if functional == "W":
        weights = [0.0] * k + [1.0]
    elif functional == "hat":
        weights = list(hat_w_coeffs(k).coeffs)
    else:
        raise ValueError("functional must be 'W' or 'hat'")
    b = cfg.backend
    rule = cfg.quadrature()
    x = rule.points
    v0, g0, H0 = b.frame_jets(cfg.phi, x, 2)
    v1, g1, H1 = b.frame_jets(path.psi, x, 2)
    eye = np.eye(b.n)
    theta = 2 * np.pi * np.arange(points) / points
    total = 0.0
    for th in theta:
        t = radius * np.exp(1j * th)
        tau = cfg.tau + t * path.alpha
        lam = 1 / (2 * tau)
        gf = (4 * np.pi * tau) ** (-b.n / 2)
        v = v0 + t * v1
        g = g0 + t * g1
        measure = rule.measure(v)
        if path.renormalize:
            vol = gf * np.sum(measure)
            v = v + np.log(vol)
            measure = measure / vol
        Y = -0.5 * (b.scalar_curvature + np.sum(g * g, axis=-1) - 2 * lam * v)
        ric = b.ricci - lam * eye + H0 + t * H1
        sig = wsym.sigma_from_power_sums(k, Y, wsym.power_sums(k, ric))
        F = sum(c * tau**m * gf * np.sum(measure * sig[:, m]) for m, c in enumerate(weights) if c)
        total += F * np.exp(-2j * th)
    return float((2 * total / (points * radius**2)).real)


def gaussian_second_variation(k: int, cfg: DensityConfig, psi) -> float:
    """``(-1/2)^{k-1} tau/(k-1)! int [|grad psi0|^2 - psi0^2/(2 tau)] weight`` with ``psi0``
    the weighted-mean-free part of ``psi``."""
    st = evaluate(cfg, 0)
    v, g, _ = cfg.backend.frame_jets(psi, st.points, 2)
    mean = st.integrate(v) / st.integrate(np.ones_like(v))
    v0 = v - mean
    integral = st.integrate(np.sum(g * g, axis=-1) - v0**2 / (2 * cfg.tau))
    return float((-0.5) ** (k - 1) * cfg.tau / math.factorial(k - 1) * integral)


# -- spectral gap --------------------------------------------------------------------


def spectral_gap(cfg: DensityConfig, m: int) -> float:
    """First nonzero eigenvalue of the weighted Laplacian on a one-dimensional Euclidean
    backend, by Galerkin projection onto mean-free polynomials of degree ``<= m``."""
    if m < 2:
        raise ValueError("basis size must be at least 2")
    b: Backend = cfg.backend
    if b.kind != "euclidean" or b.n != 1:
        raise ValueError("spectral_gap needs a one-dimensional euclidean backend")
    center, precision = gaussian_part(cfg.phi)
    s = 1.0 / math.sqrt(float(precision[0, 0]))
    rule = b.quadrature(max(cfg.order, m + 4), cfg.phi)
    x = rule.points[:, 0]
    w = rule.measure(cfg.phi(rule.points))
    z = (x - center[0]) / s
    deg = np.arange(1, m + 1)
    # probabilists' Hermite polynomials in the standardised variable, normalised
    norm = np.sqrt([math.factorial(j) for j in deg])
    V = np.stack([eval_hermitenorm(j, z) for j in deg], axis=-1) / norm
    D = np.stack([j * eval_hermitenorm(j - 1, z) for j in deg], axis=-1) / norm / s
    V = V - (w @ V) / w.sum()
    mass = V.T @ (w[:, None] * V)
    stiff = D.T @ (w[:, None] * D) / b.scale
    return float(eigh(stiff, mass, eigvals_only=True)[0])

