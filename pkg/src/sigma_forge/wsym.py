"""Weighted elementary symmetric polynomials and weighted Newton transformations.

A weighted spectrum ``(mu0; mu)`` behaves like the spectrum ``mu`` padded with
infinitely many copies of an infinitesimal eigenvalue whose total mass is
``mu0``.  Three evaluation routes are provided and are kept independent of each
other so they can cross-check one another:

* :func:`weighted_sigma` runs the defining Newton-identity recursion in exact
  integer arithmetic and rounds once, so the result is correctly rounded.
* :func:`sigma_table` is the vectorised float path used on quadrature nodes.  It
  builds the table by adding one eigenvalue at a time, which is well conditioned.
* :func:`sigma_from_power_sums` runs the recursion in floating point from power
  sums; it accepts complex input and is what complex-step differentiation uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "WeightedSpectrum",
    "SymPair",
    "ConeReport",
    "Definiteness",
    "OutsideConeError",
    "weighted_sigma",
    "weighted_sigma_table",
    "weighted_sigma_shifted",
    "generating_coeffs",
    "newton_gap",
    "is_newton_equality",
    "cone_report",
    "newton_cor_gap",
    "remove_coordinate",
    "newton_transform",
    "definiteness",
    "sigma_table",
    "sigma_from_power_sums",
    "power_sums",
    "newton_transform_batch",
    "cone_margins",
    "scale",
]


class OutsideConeError(ValueError):
    """Raised when an operation that requires cone membership gets a point outside it."""


@dataclass(frozen=True)
class WeightedSpectrum:
    """The argument ``(mu0; mu)`` of every weighted symmetric polynomial."""

    mu0: float
    mu: tuple[float, ...] = ()

    def __post_init__(self):
        mu = tuple(float(m) for m in np.ravel(np.asarray(self.mu, dtype=float)))
        object.__setattr__(self, "mu0", float(self.mu0))
        object.__setattr__(self, "mu", mu)
        if not math.isfinite(self.mu0) or not all(math.isfinite(m) for m in mu):
            raise ValueError("weighted spectrum entries must be finite")

    @property
    def n(self) -> int:
        return len(self.mu)

    def shifted(self, s: float) -> "WeightedSpectrum":
        return WeightedSpectrum(self.mu0 + s, self.mu)


@dataclass(frozen=True, eq=False)
class SymPair:
    """A weight scalar together with a symmetric matrix in an orthonormal frame."""

    mu0: float
    P: np.ndarray

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError(f"P must be square, got shape {P.shape}")
        # (a + b) / 2 is commutative in floating point, so this is exactly symmetric.
        P = 0.5 * (P + P.T)
        P.setflags(write=False)
        object.__setattr__(self, "mu0", float(self.mu0))
        object.__setattr__(self, "P", P)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def spectrum(self) -> WeightedSpectrum:
        return WeightedSpectrum(self.mu0, tuple(np.linalg.eigvalsh(self.P)))


@dataclass(frozen=True)
class ConeReport:
    """Membership of a weighted spectrum in the negative weighted elliptic cones.

    ``margins[j - 1]`` holds ``(-1)**j * sigma_j`` for ``j = 1 .. kmax``.
    ``max_k`` is the largest ``k`` such that the first ``k`` margins are strictly
    positive, or 0.
    """

    max_k: int
    margins: tuple[float, ...] = field(default=())

    def contains(self, k: int) -> bool:
        return self.max_k >= k


@dataclass(frozen=True)
class Definiteness:
    """Eigenvalues of ``(-1)**k T_k`` and the resulting verdict."""

    k: int
    eigenvalues: tuple[float, ...]

    @property
    def min_eigenvalue(self) -> float:
        return min(self.eigenvalues) if self.eigenvalues else math.inf

    @property
    def verdict(self) -> str:
        ev = np.asarray(self.eigenvalues)
        if ev.size == 0 or np.all(ev > 0):
            return "positive definite"
        if np.all(ev < 0):
            return "negative definite"
        if np.all(ev >= 0):
            return "positive semidefinite"
        if np.all(ev <= 0):
            return "negative semidefinite"
        return "indefinite"

    @property
    def positive(self) -> bool:
        return self.verdict == "positive definite"


def scale(ws: WeightedSpectrum, k: int) -> float:
    """Magnitude ``(|mu0| + sum|mu_j| + 1)**k`` used for relative tolerances."""
    return (abs(ws.mu0) + sum(abs(m) for m in ws.mu) + 1.0) ** k


# ---------------------------------------------------------------------------
# exact scalar route
# ---------------------------------------------------------------------------


def _exact_table(kmax: int, mu0: float, mu: Sequence[float]) -> list[Fraction]:
    # All inputs are dyadic rationals; put them over the common denominator
    # ``den`` and run the recursion on the integer numerators.  Writing
    # P_k = k! sigma_k turns the recursion into an integer one:
    #   P_k = sum_i (-1)^i (k-1)!/(k-1-i)! P_{k-1-i} p_{i+1}.
    ratios = [float(v).as_integer_ratio() for v in (mu0, *mu)]
    den = max(r[1] for r in ratios)
    ints = [num * (den // d) for num, d in ratios]
    m0, ms = ints[0], ints[1:]

    p = [0]
    powers = list(ms)
    for _ in range(kmax):
        p.append(sum(powers))
        powers = [a * b for a, b in zip(powers, ms)]
    if kmax >= 1:
        p[1] += m0

    P = [1]
    for k in range(1, kmax + 1):
        acc = 0
        falling = 1
        for i in range(k):
            if i:
                falling *= k - i
            term = falling * P[k - 1 - i] * p[i + 1]
            acc = acc - term if i % 2 else acc + term
        P.append(acc)
    return [Fraction(P[k], math.factorial(k) * den**k) for k in range(kmax + 1)]


def weighted_sigma_table(kmax: int, ws: WeightedSpectrum) -> list[float]:
    """``[sigma_0, ..., sigma_kmax]`` of ``ws``, each correctly rounded."""
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    return [float(v) for v in _exact_table(kmax, ws.mu0, ws.mu)]


def weighted_sigma(k: int, ws: WeightedSpectrum) -> float:
    """The k-th weighted elementary symmetric polynomial ``sigma_k(mu0; mu)``.

    Defined for every ``k >= 0``, including ``k > n``; for ``n = 0`` this is
    ``mu0**k / k!``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    return float(_exact_table(k, ws.mu0, ws.mu)[k])


def weighted_sigma_shifted(k: int, ws: WeightedSpectrum, s: float) -> float:
    """``sum_j s**j / j! * sigma_{k-j}(mu0; mu)``, which equals ``sigma_k(mu0 + s; mu)``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    table = _exact_table(k, ws.mu0, ws.mu)
    s = Fraction(s)
    return float(sum(s**j / math.factorial(j) * table[k - j] for j in range(k + 1)))


def generating_coeffs(ws: WeightedSpectrum, K: int) -> list[float]:
    """Taylor coefficients through ``t**K`` of ``exp(mu0 t) * prod_j (1 + mu_j t)``."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    poly = np.zeros(max(K, ws.n) + 1)
    poly[0] = 1.0
    for m in ws.mu:
        poly[1:] = poly[1:] + m * poly[:-1]
    expo = [ws.mu0**j / math.factorial(j) for j in range(K + 1)]
    return [math.fsum(expo[j] * poly[i - j] for j in range(i + 1)) for i in range(K + 1)]


def newton_gap(k: int, ws: WeightedSpectrum) -> float:
    """``k/(k+1) sigma_k**2 - sigma_{k-1} sigma_{k+1}``; nonnegative for every input."""
    if k < 1:
        raise ValueError("k must be positive")
    s = _exact_table(k + 1, ws.mu0, ws.mu)
    return float(Fraction(k, k + 1) * s[k] ** 2 - s[k - 1] * s[k + 1])


def is_newton_equality(k: int, ws: WeightedSpectrum) -> bool:
    """Structural test for the equality cases of the weighted Newton inequality.

    Either ``mu = 0``, or ``mu0 = 0`` and at least ``n + 1 - k`` entries vanish.
    """
    zeros = sum(1 for m in ws.mu if m == 0.0)
    if zeros == ws.n:
        return True
    return ws.mu0 == 0.0 and zeros >= ws.n + 1 - k


def cone_report(ws: WeightedSpectrum, kmax: int) -> ConeReport:
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    table = weighted_sigma_table(kmax, ws)
    margins = tuple((-1) ** j * table[j] for j in range(1, kmax + 1))
    max_k = 0
    for m in margins:
        if m > 0:
            max_k += 1
        else:
            break
    return ConeReport(max_k=max_k, margins=margins)


def newton_cor_gap(k: int, ws: WeightedSpectrum) -> float:
    """``(-1)**(k+1) [sigma_1 sigma_k - (k+1) sigma_{k+1}]``, defined inside the k-cone."""
    if k < 1:
        raise ValueError("k must be positive")
    if not cone_report(ws, k).contains(k):
        raise OutsideConeError(f"{ws} is not in the negative weighted elliptic {k}-cone")
    s = _exact_table(k + 1, ws.mu0, ws.mu)
    return float((-1) ** (k + 1) * (s[1] * s[k] - (k + 1) * s[k + 1]))


def remove_coordinate(ws: WeightedSpectrum, i: int) -> WeightedSpectrum:
    """Drop the ``i``-th eigenvalue, counting from 1 as in ``mu_1 .. mu_n``."""
    if isinstance(i, bool) or not 1 <= i <= ws.n:
        raise IndexError(f"coordinate {i} out of range 1..{ws.n}")
    return WeightedSpectrum(ws.mu0, ws.mu[: i - 1] + ws.mu[i:])


def newton_transform(k: int, sp: SymPair) -> np.ndarray:
    """``T_k = sum_j (-1)**j sigma_{k-j}(mu0; P) P**j``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    sig = weighted_sigma_table(k, sp.spectrum())
    out = np.zeros_like(sp.P)
    power = np.eye(sp.n)
    for j in range(k + 1):
        out += (-1) ** j * sig[k - j] * power
        power = power @ sp.P
    return 0.5 * (out + out.T)


def definiteness(k: int, sp: SymPair) -> Definiteness:
    T = (-1) ** k * newton_transform(k, sp)
    return Definiteness(k=k, eigenvalues=tuple(np.linalg.eigvalsh(T)))


# ---------------------------------------------------------------------------
# vectorised float routes
# ---------------------------------------------------------------------------


def sigma_table(kmax: int, mu0, mu) -> np.ndarray:
    """Batched ``sigma_0 .. sigma_kmax``; ``mu0`` has shape ``(...)``, ``mu`` ``(..., n)``.

    Starts from ``mu0**j / j!`` and adds one eigenvalue at a time using
    ``sigma_k(mu0; mu, m) = sigma_k(mu0; mu) + m sigma_{k-1}(mu0; mu)``.
    """
    mu0 = np.asarray(mu0, dtype=float)
    mu = np.asarray(mu, dtype=float)
    out = np.empty(mu0.shape + (kmax + 1,))
    out[..., 0] = 1.0
    for j in range(1, kmax + 1):
        out[..., j] = out[..., j - 1] * mu0 / j
    for i in range(mu.shape[-1]):
        m = mu[..., i, None]
        out[..., 1:] = out[..., 1:] + m * out[..., :-1]
    return out


def power_sums(kmax: int, P) -> np.ndarray:
    """``tr(P**j)`` for ``j = 1 .. kmax`` stacked on the last axis (index 0 unused)."""
    P = np.asarray(P)
    out = np.zeros(P.shape[:-2] + (kmax + 1,), dtype=P.dtype)
    power = P
    for j in range(1, kmax + 1):
        out[..., j] = np.trace(power, axis1=-2, axis2=-1)
        power = power @ P
    return out


def sigma_from_power_sums(kmax: int, mu0, psums) -> np.ndarray:
    """The defining recursion in floating point, from ``psums[..., j] = sum mu_i**j``."""
    mu0 = np.asarray(mu0)
    psums = np.asarray(psums)
    dtype = np.result_type(mu0, psums, float)
    out = np.zeros(np.broadcast_shapes(mu0.shape, psums.shape[:-1]) + (kmax + 1,), dtype=dtype)
    out[..., 0] = 1.0
    for k in range(1, kmax + 1):
        acc = out[..., k - 1] * (mu0 + psums[..., 1])
        for i in range(1, k):
            acc = acc + (-1) ** i * out[..., k - 1 - i] * psums[..., i + 1]
        out[..., k] = acc / k
    return out


def newton_transform_batch(sig: np.ndarray, P: np.ndarray, kmax: int) -> np.ndarray:
    """Stack ``T_0 .. T_kmax`` with shape ``(..., kmax+1, n, n)`` from a sigma table."""
    n = P.shape[-1]
    dtype = np.result_type(sig, P)
    out = np.zeros(P.shape[:-2] + (kmax + 1, n, n), dtype=dtype)
    eye = np.broadcast_to(np.eye(n), P.shape)
    out[..., 0, :, :] = eye
    # T_k = sigma_k I - T_{k-1} P
    for k in range(1, kmax + 1):
        out[..., k, :, :] = sig[..., k, None, None] * eye - out[..., k - 1, :, :] @ P
    return out


def cone_margins(sig: np.ndarray, kmax: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised cone test: returns ``(max_k, margins)`` for a sigma table."""
    j = np.arange(1, kmax + 1)
    margins = (-1.0) ** j * sig[..., 1 : kmax + 1]
    positive = margins > 0
    max_k = np.cumprod(positive, axis=-1).sum(axis=-1)
    return max_k, margins
