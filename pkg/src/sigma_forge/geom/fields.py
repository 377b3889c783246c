"""Exactly differentiable scalar fields.

Every field evaluates on arrays of points with shape ``(..., dim)`` and accepts
complex points; the evaluation is holomorphic in the coordinates, which is what
makes complex-step differentiation of derived quantities exact to rounding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = ["PolyField", "TrigField", "SphereField", "Field"]


def _as_index(alpha, dim):
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != dim or any(a < 0 for a in alpha):
        raise ValueError(f"bad multi-index {alpha} for dimension {dim}")
    return alpha


@dataclass(frozen=True, eq=False)
class PolyField:
    """Polynomial ``sum_m coeffs[m] * x**exps[m]`` on ``R**dim``."""

    dim: int
    exps: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        exps = np.asarray(self.exps, dtype=np.int64).reshape(-1, self.dim)
        coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if exps.shape[0] != coeffs.shape[0]:
            raise ValueError("exps and coeffs must have the same length")
        if (exps < 0).any():
            raise ValueError("exponents must be nonnegative")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        # merge duplicate monomials and drop zeros
        merged: dict[tuple, float] = {}
        for e, c in zip(map(tuple, exps.tolist()), coeffs.tolist()):
            merged[e] = merged.get(e, 0.0) + c
        items = sorted((e, c) for e, c in merged.items() if c != 0.0)
        exps = np.array([e for e, _ in items], dtype=np.int64).reshape(-1, self.dim)
        coeffs = np.array([c for _, c in items], dtype=float)
        exps.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "exps", exps)
        object.__setattr__(self, "coeffs", coeffs)

    # -- construction ---------------------------------------------------
    @classmethod
    def from_terms(cls, dim: int, terms: Iterable) -> "PolyField":
        """Build from ``(multi_index, coefficient)`` pairs."""
        terms = list(terms)
        exps = [_as_index(a, dim) for a, _ in terms]
        return cls(dim, np.array(exps, dtype=np.int64).reshape(-1, dim), [c for _, c in terms])

    @classmethod
    def constant(cls, dim: int, c: float) -> "PolyField":
        return cls(dim, np.zeros((1, dim), dtype=np.int64), [c])

    @classmethod
    def linear(cls, a, b: float = 0.0) -> "PolyField":
        a = np.asarray(a, dtype=float)
        dim = a.size
        terms = [(tuple(np.eye(dim, dtype=int)[i]), a[i]) for i in range(dim)]
        return cls.from_terms(dim, terms + [((0,) * dim, b)])

    @classmethod
    def quadratic(cls, A, b=None, c: float = 0.0) -> "PolyField":
        """``x.A.x / 2 + b.x + c``."""
        A = np.asarray(A, dtype=float)
        dim = A.shape[0]
        A = 0.5 * (A + A.T)
        terms = []
        for i in range(dim):
            for j in range(i, dim):
                e = [0] * dim
                e[i] += 1
                e[j] += 1
                terms.append((e, A[i, j] * (0.5 if i == j else 1.0)))
        if b is not None:
            terms += [(tuple(np.eye(dim, dtype=int)[i]), float(b[i])) for i in range(dim)]
        terms.append(((0,) * dim, c))
        return cls.from_terms(dim, terms)

    def terms(self) -> list[tuple[tuple[int, ...], float]]:
        return [(tuple(e), float(c)) for e, c in zip(self.exps.tolist(), self.coeffs)]

    @property
    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max()) if len(self.coeffs) else 0

    # -- algebra --------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = PolyField.constant(self.dim, other)
        if not isinstance(other, PolyField) or other.dim != self.dim:
            return NotImplemented
        return PolyField(
            self.dim,
            np.concatenate([self.exps, other.exps]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    __radd__ = __add__

    def __neg__(self):
        return PolyField(self.dim, self.exps, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return PolyField(self.dim, self.exps, float(other) * self.coeffs)
        if not isinstance(other, PolyField) or other.dim != self.dim:
            return NotImplemented
        exps = (self.exps[:, None, :] + other.exps[None, :, :]).reshape(-1, self.dim)
        coeffs = np.outer(self.coeffs, other.coeffs).reshape(-1)
        return PolyField(self.dim, exps, coeffs)

    __rmul__ = __mul__

    def quadratic_part(self) -> "PolyField":
        keep = self.exps.sum(axis=1) <= 2
        return PolyField(self.dim, self.exps[keep], self.coeffs[keep])

    # -- calculus -------------------------------------------------------
    def derivative(self, alpha) -> "PolyField":
        alpha = np.asarray(_as_index(alpha, self.dim))
        keep = np.all(self.exps >= alpha, axis=1)
        exps = self.exps[keep]
        factor = np.ones(exps.shape[0])
        for i, a in enumerate(alpha):
            for r in range(a):
                factor *= exps[:, i] - r
        return PolyField(self.dim, exps - alpha, self.coeffs[keep] * factor)

    def partial(self, i: int, order: int = 1) -> "PolyField":
        alpha = [0] * self.dim
        alpha[i] = order
        return self.derivative(alpha)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got {x.shape}")
        if len(self.coeffs) == 0:
            return np.zeros(x.shape[:-1], dtype=np.result_type(x, float))
        maxdeg = int(self.exps.max())
        # powers[..., i, p] = x_i ** p
        powers = np.ones(x.shape + (maxdeg + 1,), dtype=np.result_type(x, float))
        for p in range(1, maxdeg + 1):
            powers[..., p] = powers[..., p - 1] * x
        mono = np.ones(x.shape[:-1] + (len(self.coeffs),), dtype=powers.dtype)
        for i in range(self.dim):
            mono = mono * powers[..., i, self.exps[:, i]]
        return mono @ self.coeffs

    def jets(self, x, order: int = 2):
        """``(value, gradient, hessian[, third])`` in coordinates."""
        return _jets(self, x, order)


@dataclass(frozen=True, eq=False)
class TrigField:
    """``sum_m cos_c[m] cos(freqs[m].x) + sin_c[m] sin(freqs[m].x)`` on the torus."""

    dim: int
    freqs: np.ndarray
    cos_c: np.ndarray
    sin_c: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.int64).reshape(-1, self.dim)
        cos_c = np.asarray(self.cos_c, dtype=float).reshape(-1)
        sin_c = np.asarray(self.sin_c, dtype=float).reshape(-1)
        if not (freqs.shape[0] == cos_c.shape[0] == sin_c.shape[0]):
            raise ValueError("freqs, cos and sin coefficient arrays must align")
        if not (np.all(np.isfinite(cos_c)) and np.all(np.isfinite(sin_c))):
            raise ValueError("coefficients must be finite")
        for a in (freqs, cos_c, sin_c):
            a.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "cos_c", cos_c)
        object.__setattr__(self, "sin_c", sin_c)

    @classmethod
    def from_terms(cls, dim: int, terms: Iterable) -> "TrigField":
        """Build from ``(frequency, cos_coeff, sin_coeff)`` triples."""
        terms = list(terms)
        freqs = np.array([_as_int_vec(f, dim) for f, _, _ in terms], dtype=np.int64)
        return cls(dim, freqs.reshape(-1, dim), [t[1] for t in terms], [t[2] for t in terms])

    @classmethod
    def constant(cls, dim: int, c: float) -> "TrigField":
        return cls(dim, np.zeros((1, dim), dtype=np.int64), [c], [0.0])

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, n_terms: int = 4,
               max_freq: int = 2, amplitude: float = 0.3) -> "TrigField":
        freqs = rng.integers(-max_freq, max_freq + 1, size=(n_terms, dim))
        freqs[np.all(freqs == 0, axis=1), 0] = 1
        cos_c = amplitude * rng.uniform(-1, 1, n_terms)
        sin_c = amplitude * rng.uniform(-1, 1, n_terms)
        return cls(dim, freqs, cos_c, sin_c)

    def terms(self):
        return [
            (tuple(f), float(a), float(b))
            for f, a, b in zip(self.freqs.tolist(), self.cos_c, self.sin_c)
        ]

    @property
    def max_frequency(self) -> int:
        return int(np.abs(self.freqs).max()) if len(self.cos_c) else 0

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = TrigField.constant(self.dim, other)
        if not isinstance(other, TrigField) or other.dim != self.dim:
            return NotImplemented
        return TrigField(
            self.dim,
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([self.cos_c, other.cos_c]),
            np.concatenate([self.sin_c, other.sin_c]),
        )

    __radd__ = __add__

    def __neg__(self):
        return TrigField(self.dim, self.freqs, -self.cos_c, -self.sin_c)

    def __sub__(self, other):
        return self + (-other)

    def _exponentials(self):
        # a cos + b sin = c e^{i theta} + conj(c) e^{-i theta} with c = (a - i b) / 2
        c = 0.5 * (self.cos_c - 1j * self.sin_c)
        return np.concatenate([self.freqs, -self.freqs]), np.concatenate([c, c.conj()])

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            s = float(other)
            return TrigField(self.dim, self.freqs, s * self.cos_c, s * self.sin_c)
        if not isinstance(other, TrigField) or other.dim != self.dim:
            return NotImplemented
        f1, c1 = self._exponentials()
        f2, c2 = other._exponentials()
        freqs = (f1[:, None, :] + f2[None, :, :]).reshape(-1, self.dim)
        c = np.outer(c1, c2).reshape(-1)
        # the product is real, so it equals the sum of the real parts of its terms
        return TrigField(self.dim, freqs, c.real, -c.imag)

    __rmul__ = __mul__

    def derivative(self, alpha) -> "TrigField":
        alpha = np.asarray(_as_index(alpha, self.dim))
        # f = Re sum c e^{i k.x} with c = a - i b; d^alpha multiplies c by (i k)^alpha
        c = self.cos_c - 1j * self.sin_c
        factor = (1j ** int(alpha.sum())) * np.prod(self.freqs.astype(float) ** alpha, axis=1)
        c = c * factor
        return TrigField(self.dim, self.freqs, c.real, -c.imag)

    def partial(self, i: int, order: int = 1) -> "TrigField":
        alpha = [0] * self.dim
        alpha[i] = order
        return self.derivative(alpha)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got {x.shape}")
        theta = x @ self.freqs.T.astype(float)
        return np.cos(theta) @ self.cos_c + np.sin(theta) @ self.sin_c

    def jets(self, x, order: int = 2):
        return _jets(self, x, order)


def _as_int_vec(f, dim):
    f = tuple(int(v) for v in np.atleast_1d(f))
    if len(f) != dim:
        raise ValueError(f"frequency {f} does not have dimension {dim}")
    return f


@dataclass(frozen=True, eq=False)
class SphereField:
    """A polynomial on ``R**(n+1)`` read through its restriction to the unit sphere."""

    poly: PolyField

    @property
    def n(self) -> int:
        return self.poly.dim - 1

    @property
    def dim(self) -> int:
        return self.poly.dim

    @classmethod
    def from_terms(cls, n: int, terms) -> "SphereField":
        return cls(PolyField.from_terms(n + 1, terms))

    @classmethod
    def constant(cls, n: int, c: float) -> "SphereField":
        return cls(PolyField.constant(n + 1, c))

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return SphereField(self.poly + other)
        if isinstance(other, SphereField):
            return SphereField(self.poly + other.poly)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return SphereField(-self.poly)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return SphereField(self.poly * other)
        if isinstance(other, SphereField):
            return SphereField(self.poly * other.poly)
        return NotImplemented

    __rmul__ = __mul__

    def __call__(self, x) -> np.ndarray:
        return self.poly(x)

    def ambient_jets(self, x, order: int = 2):
        return _jets(self.poly, x, order)

    def radial(self) -> PolyField:
        """``x . grad F``."""
        out = PolyField.constant(self.dim, 0.0)
        for i in range(self.dim):
            out = out + _coord(self.dim, i) * self.poly.partial(i)
        return out

    def laplacian(self) -> "SphereField":
        """Laplace-Beltrami operator of the unit sphere, as another sphere field.

        ``Delta_S f = Delta F - n x.grad F - x.Hess F.x`` at ``|x| = 1``.
        """
        p = self.poly
        lap = PolyField.constant(self.dim, 0.0)
        second = PolyField.constant(self.dim, 0.0)
        for i in range(self.dim):
            lap = lap + p.partial(i, 2)
            for j in range(self.dim):
                second = second + _coord(self.dim, i) * _coord(self.dim, j) * p.derivative(
                    _unit2(self.dim, i, j)
                )
        return SphereField(lap - self.n * self.radial() - second)

    def grad_sq(self) -> "SphereField":
        """``|grad_S f|**2 = |grad F|**2 - (x.grad F)**2`` on the unit sphere."""
        p = self.poly
        total = PolyField.constant(self.dim, 0.0)
        for i in range(self.dim):
            d = p.partial(i)
            total = total + d * d
        r = self.radial()
        return SphereField(total - r * r)


def _coord(dim, i):
    e = [0] * dim
    e[i] = 1
    return PolyField.from_terms(dim, [(e, 1.0)])


def _unit2(dim, i, j):
    e = [0] * dim
    e[i] += 1
    e[j] += 1
    return e


def _jets(field, x, order):
    """Coordinate jets of a Poly/Trig field, with derivative fields cached per field."""
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be 0..3")
    cache = _derivative_cache(field, order)
    x = np.asarray(x)
    d = field.dim
    out = [field(x)]
    if order >= 1:
        out.append(np.stack([cache[(i,)](x) for i in range(d)], axis=-1))
    if order >= 2:
        H = np.empty(x.shape[:-1] + (d, d), dtype=out[0].dtype)
        for i, j in itertools.combinations_with_replacement(range(d), 2):
            H[..., i, j] = H[..., j, i] = cache[(i, j)](x)
        out.append(H)
    if order >= 3:
        T = np.empty(x.shape[:-1] + (d, d, d), dtype=out[0].dtype)
        for idx in itertools.combinations_with_replacement(range(d), 3):
            v = cache[idx](x)
            for perm in set(itertools.permutations(idx)):
                T[(Ellipsis,) + perm] = v
        out.append(T)
    return tuple(out)


def _derivative_cache(field, order):
    cache = field.__dict__.get("_dcache")
    if cache is None:
        cache = {}
        object.__setattr__(field, "_dcache", cache)
    d = field.dim
    for r in range(1, order + 1):
        for idx in itertools.combinations_with_replacement(range(d), r):
            if idx not in cache:
                alpha = [0] * d
                for i in idx:
                    alpha[i] += 1
                cache[idx] = field.derivative(alpha)
    return cache


Field = PolyField | TrigField | SphereField


def field_from_literal(kind: str, dim: int, terms) -> Field:
    """Parse a field literal as read from a config file."""
    if kind == "poly":
        return PolyField.from_terms(dim, [(tuple(a), float(c)) for a, c in terms])
    if kind == "trig":
        return TrigField.from_terms(dim, [(tuple(f), float(a), float(b)) for f, a, b in terms])
    if kind == "sphere":
        return SphereField.from_terms(dim, [(tuple(a), float(c)) for a, c in terms])
    raise ValueError(f"unknown field kind {kind!r}")


def random_poly(dim: int, degree: int, rng: np.random.Generator, scale: float = 1.0,
                min_degree: int = 0) -> PolyField:
    """Random polynomial with every monomial of total degree in ``[min_degree, degree]``."""
    terms = []
    for e in itertools.product(range(degree + 1), repeat=dim):
        if min_degree <= sum(e) <= degree:
            terms.append((e, scale * rng.uniform(-1, 1) / math.factorial(sum(e))))
    return PolyField.from_terms(dim, terms)
