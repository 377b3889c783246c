"""Verification suites.

Each check group returns a list of :class:`Record`.  Groups are keyed by the
acceptance criterion they establish and are grouped into the CLI suites
``algebra``, ``identities``, ``soliton``, ``variation`` and ``spectrum``.
Randomness is derived from ``(seed, group name)`` so a group's output does not
depend on which other groups run or in what order.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np

from . import tensor_pt, wsym
from .functionals import (
    DensityConfig,
    VariationPath,
    d_operator,
    d_operator_selfadjoint,
    divergence_residuals,
    dsigma_identity_residual,
    evaluate,
    fd_first_variation,
    field_scale,
    first_variation_phi,
    gaussian_second_variation,
    hat_w_eval,
    hat_w_gradient,
    normalize_c1,
    obata_identity_residual,
    second_variation,
    selfadjoint_residual,
    sigma_field,
    soliton_suite,
    spectral_gap,
    w_eval,
)
from .geom import Backend, PolyField, SphereField, TrigField, random_poly, sphere_volume

__all__ = [
    "Record",
    "RunOptions",
    "GROUPS",
    "SUITES",
    "run_group",
    "run_suite",
]


@dataclass(frozen=True)
class Record:
    suite: str
    check_id: str
    anchor: str
    value: float
    reference: float
    residual: float
    tol: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "check_id": self.check_id,
            "anchor": self.anchor,
            "value": _clean(self.value),
            "reference": _clean(self.reference),
            "residual": _clean(self.residual),
            "tol": _clean(self.tol),
            "pass": bool(self.passed),
        }


def _clean(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass(frozen=True)
class RunOptions:
    """Knobs shared by all groups.  ``None`` means the group's own default."""

    seed: int = 0
    samples: int | None = None
    tol_scale: float = 1.0
    backend: str | None = None
    n: int | None = None
    k: int | None = None
    tau: float | None = None
    mode: str | None = None
    lam: float | None = None
    quad_order: int | None = None
    grid: int | None = None
    model: str | None = None
    fields: dict = field(default_factory=dict)


def _rng(opts: RunOptions, name: str) -> np.random.Generator:
    return np.random.default_rng([opts.seed, zlib.crc32(name.encode())])


class _Collector:
    def __init__(self, suite: str, opts: RunOptions):
        self.suite = suite
        self.opts = opts
        self.records: list[Record] = []

    def add(self, check_id, anchor, value, reference, residual, tol, passed=None):
        tol = float(tol) * self.opts.tol_scale
        residual = float(residual)
        if passed is None:
            passed = bool(np.isfinite(residual) and residual <= tol)
        self.records.append(
            Record(self.suite, check_id, anchor, float(value), float(reference), residual, tol,
                   bool(passed))
        )

    def bound(self, check_id, anchor, value, upper, tol):
        """Pass when ``value <= upper + tol``."""
        excess = max(float(value) - float(upper), 0.0)
        self.add(check_id, anchor, value, upper, excess, tol)


# ---------------------------------------------------------------------------------------
# criterion 1: recursion against the shift formula and the generating function
# ---------------------------------------------------------------------------------------


def _quantize(v, bits=44):
    # a 2^-bits grid keeps mu0 + s exact, so both sides see the same input
    return np.round(np.asarray(v) * 2.0**bits) / 2.0**bits


def algebra_oracles(opts: RunOptions) -> list[Record]:
    c = _Collector("algebra", opts)
    rng = _rng(opts, "algebra_oracles")
    samples = opts.samples or 10_000
    worst_shift = worst_gen = worst_perm = 0.0
    for _ in range(samples):
        n = int(rng.integers(0, 9))
        k = int(rng.integers(0, 11))
        ws = wsym.WeightedSpectrum(float(_quantize(rng.uniform(-5, 5))), rng.uniform(-5, 5, n))
        s = float(_quantize(rng.uniform(-5, 5)))
        direct = wsym.weighted_sigma(k, ws.shifted(s))
        oracle = wsym.weighted_sigma_shifted(k, ws, s)
        worst_shift = max(worst_shift, abs(direct - oracle) / (1 + abs(direct)))
        table = wsym.weighted_sigma_table(10, ws)
        gen = wsym.generating_coeffs(ws, 10)
        worst_gen = max(worst_gen, max(abs(a - b) / (1 + abs(b)) for a, b in zip(gen, table)))
        perm = wsym.WeightedSpectrum(ws.mu0, tuple(rng.permutation(ws.mu)))
        worst_perm = max(worst_perm, abs(wsym.weighted_sigma(k, perm) - table[k]))
    c.add("shift_formula.max_rel_error", "shift-formula", worst_shift, 0, worst_shift, 1e-12)
    c.add("generating_function.max_rel_error", "generating-function", worst_gen, 0, worst_gen, 1e-10)
    c.add("permutation_invariance.max_abs_error", "weighted-sigma-definition", worst_perm, 0,
          worst_perm, 0.0)
    return c.records


# ---------------------------------------------------------------------------------------
# criterion 2: weighted Newton inequality and its equality cases
# ---------------------------------------------------------------------------------------


def newton_inequality(opts: RunOptions) -> list[Record]:
    c = _Collector("algebra", opts)
    rng = _rng(opts, "newton_inequality")
    samples = 10 * (opts.samples or 10_000)
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(0, 9))
        k = int(rng.integers(1, 11))
        ws = wsym.WeightedSpectrum(rng.uniform(-5, 5), rng.uniform(-5, 5, n))
        gap = wsym.newton_gap(k, ws)
        worst = min(worst, gap / wsym.scale(ws, k))
    c.add("newton_gap.min_scaled", "weighted-newton-inequality", worst, 0, max(-worst, 0), 1e-12)

    # equality families: mu = 0 (any mu0), and mu0 = 0 with n + 1 - k zeros
    worst_eq = 0.0
    for _ in range(1000):
        n = int(rng.integers(0, 9))
        k = int(rng.integers(1, 11))
        ws = wsym.WeightedSpectrum(rng.uniform(-5, 5), np.zeros(n))
        worst_eq = max(worst_eq, abs(wsym.newton_gap(k, ws)) / wsym.scale(ws, k))
        zeros = max(n + 1 - k, 0)
        mu = np.concatenate([np.zeros(zeros), rng.uniform(-5, 5, n - zeros)]) if n else []
        ws = wsym.WeightedSpectrum(0.0, rng.permutation(mu) if n else ())
        worst_eq = max(worst_eq, abs(wsym.newton_gap(k, ws)) / wsym.scale(ws, k))
    c.add("newton_gap.equality_families", "weighted-newton-equality", worst_eq, 0, worst_eq, 1e-12)
    return c.records


# ---------------------------------------------------------------------------------------
# criterion 3: Newton transformation identities and ellipticity
# ---------------------------------------------------------------------------------------


def _random_symmetric(rng, count, n, spread=2.0):
    Q, _ = np.linalg.qr(rng.normal(size=(count, n, n)))
    lam = rng.uniform(-spread, spread, size=(count, n))
    return Q, lam, (Q * lam[:, None, :]) @ np.swapaxes(Q, -1, -2)


def _powers(P, kmax):
    out = [np.broadcast_to(np.eye(P.shape[-1]), P.shape)]
    for _ in range(kmax):
        out.append(out[-1] @ P)
    return out


def newton_transform_identities(opts: RunOptions) -> list[Record]:
    c = _Collector("algebra", opts)
    rng = _rng(opts, "newton_transform_identities")
    count = opts.samples // 10 if opts.samples else 1000
    kmax = 6
    eig_res = contr_res = rec_res = api_res = 0.0
    for n in range(1, 7):
        Q, lam, P = _random_symmetric(rng, count, n)
        mu0 = rng.uniform(-2, 2, count)
        sig = wsym.sigma_table(kmax + 1, mu0, lam)
        scl = (np.abs(mu0) + np.abs(lam).sum(-1) + 1)[:, None]
        powers = _powers(P, kmax)
        T_prev = None
        for k in range(kmax + 1):
            # definition: sum_j (-1)^j sigma_{k-j} P^j
            T = sum((-1) ** j * sig[:, k - j, None, None] * powers[j] for j in range(k + 1))
            # eigenvalues: Q^T T Q is diagonal with sigma_k(mu0; mu without i)
            D = np.swapaxes(Q, -1, -2) @ T @ Q
            removed = np.stack(
                [wsym.sigma_table(k, mu0, np.delete(lam, i, axis=1))[:, k] for i in range(n)], -1
            )
            expected = np.zeros_like(D)
            expected[:, np.arange(n), np.arange(n)] = removed
            eig_res = max(eig_res, float((np.abs(D - expected).max(axis=(1, 2)) / scl[:, 0] ** k).max()))
            # contraction identity
            contr = np.einsum("nab,nab->n", T, P)
            ref = (k + 1) * sig[:, k + 1] - mu0 * sig[:, k]
            contr_res = max(contr_res, float((np.abs(contr - ref) / scl[:, 0] ** (k + 1)).max()))
            if T_prev is not None:
                rec = sig[:, k, None, None] * np.eye(n) - T_prev @ P
                rec_res = max(rec_res, float((np.abs(T - rec).max(axis=(1, 2)) / scl[:, 0] ** k).max()))
            T_prev = T
        # public scalar API on a subset
        for i in range(min(count, 20)):
            sp = wsym.SymPair(mu0[i], P[i])
            for k in range(kmax + 1):
                T = wsym.newton_transform(k, sp)
                ref = (k + 1) * wsym.weighted_sigma(k + 1, sp.spectrum()) - mu0[i] * wsym.weighted_sigma(k, sp.spectrum())
                api_res = max(api_res, abs(np.sum(T * P[i]) - ref) / scl[i, 0] ** (k + 1))
    c.add("newton_transform.eigenvalues", "newton-eigenvalues", eig_res, 0, eig_res, 1e-9)
    c.add("newton_transform.contraction", "newton-contraction", contr_res, 0, contr_res, 1e-9)
    c.add("newton_transform.recursion", "newton-transform-definition", rec_res, 0, rec_res, 1e-9)
    c.add("newton_transform.scalar_api", "newton-contraction", api_res, 0, api_res, 1e-9)

    # ellipticity inside the cones, and nesting of the cones
    nest_fail = 0
    for k in range(0, 6):
        worst_min = math.inf
        got = 0
        while got < count:
            batch = 4 * count
            n = int(rng.integers(1, 7))
            mu0 = -rng.uniform(0.05, 3.0, batch)
            lam = rng.uniform(-1.5, 0.4, (batch, n))
            sig = wsym.sigma_table(k + 1, mu0, lam)
            max_k, margins = wsym.cone_margins(sig, k + 1)
            for j in range(1, k + 1):
                nest_fail += int(np.sum((max_k >= j + 1) & ~(max_k >= j)))
            inside = np.nonzero(max_k >= k + 1)[0][: count - got]
            if inside.size == 0:
                continue
            Q, _ = np.linalg.qr(rng.normal(size=(inside.size, n, n)))
            P = (Q * lam[inside][:, None, :]) @ np.swapaxes(Q, -1, -2)
            T = wsym.newton_transform_batch(sig[inside], P, k)[:, k]
            ev = np.linalg.eigvalsh((-1) ** k * T)
            worst_min = min(worst_min, float(ev.min()))
            got += inside.size
        c.add(f"definiteness.k{k}.min_eigenvalue", "newton-ellipticity", worst_min, 0,
              0.0 if worst_min > 0 else abs(worst_min), 0.0, passed=worst_min > 0)
    c.add("cone.nesting_violations", "negative-elliptic-cone", nest_fail, 0, nest_fail, 0.0)
    return c.records


# ---------------------------------------------------------------------------------------
# criterion 4: flat conservation laws
# ---------------------------------------------------------------------------------------


def _torus_grid(opts, n):
    return opts.grid or opts.quad_order or 32


def _lambda_values(tau, opts):
    if opts.lam is not None:
        return [opts.lam]
    if opts.mode is not None:
        return [{"shrinking": 1 / (2 * tau), "steady": 0.0, "expanding": -1 / (2 * tau)}[opts.mode]]
    return [0.0, 0.7, -0.7, 1 / (2 * tau)]


def conservation_laws(opts: RunOptions) -> list[Record]:
    c = _Collector("identities", opts)
    rng = _rng(opts, "conservation_laws")
    tau = opts.tau or 0.5
    dims = [opts.n] if opts.n else [2, 3]
    ks = [opts.k] if opts.k else [1, 2, 3, 4]
    for n in dims:
        phi = opts.fields.get("phi") or TrigField.random(n, rng)
        for lam in _lambda_values(tau, opts):
            # residuals are pointwise, so a coarse grid suffices
            cfg = DensityConfig(Backend.torus(n), phi, tau, mode="explicit", lam_override=lam,
                                order=opts.grid or opts.quad_order or 12)
            for k in ks:
                tag = f"torus.n{n}.lam{lam:+.4g}.k{k}"
                for shift, label in ((0.0, ""), (0.37, ".shifted")):
                    r = divergence_residuals(k, cfg, shift=shift)
                    tol = 1e-8 * r.scale
                    c.add(f"div_newton.{tag}{label}", "divergence-of-newton-tensor", r.newton, 0,
                          r.newton, tol)
                    c.add(f"div_trace_adjusted.{tag}{label}", "divergence-of-trace-adjusted-tensor",
                          r.trace_adjusted, 0, r.trace_adjusted, tol)
                res = dsigma_identity_residual(k, cfg)
                c.add(f"dsigma.{tag}", "differential-of-sigma-k", res, 0, res, tol)
    return c.records


# ---------------------------------------------------------------------------------------
# criterion 5: self-adjointness on flat backends and the curved obstruction
# ---------------------------------------------------------------------------------------


def _flat_cases(opts, rng):
    tau = opts.tau or 0.5
    cases = []
    kinds = [opts.backend] if opts.backend else ["torus", "euclidean"]
    for kind in kinds:
        if kind == "torus":
            for n in ([opts.n] if opts.n else [2, 3]):
                phi = TrigField.random(n, rng)
                cases.append((f"torus.n{n}", DensityConfig(Backend.torus(n), phi, tau,
                              order=_torus_grid(opts, n)), lambda r, n=n: TrigField.random(n, r)))
        elif kind == "euclidean":
            for n in ([opts.n] if opts.n else [1, 2]):
                phi = PolyField.quadratic(np.eye(n) / (2 * tau)) + random_poly(n, 3, rng, 0.05, 3)
                phi = phi + PolyField.from_terms(n, [(tuple(4 * e), 0.01) for e in np.eye(n, dtype=int)])
                cases.append((f"euclidean.n{n}", DensityConfig(Backend.euclidean(n), phi, tau,
                              order=opts.quad_order or 40),
                              lambda r, n=n: random_poly(n, 3, r, 0.5)))
    return cases


def self_adjointness(opts: RunOptions) -> list[Record]:
    c = _Collector("identities", opts)
    rng = _rng(opts, "self_adjointness")
    ks = [opts.k] if opts.k else [1, 2, 3, 4]
    if opts.backend in (None, "torus", "euclidean"):
        for name, cfg, make in _flat_cases(opts, rng):
            for k in ks:
                eta, omega = make(rng), make(rng)
                st = evaluate(cfg, k)
                scl = field_scale(st, k) * (1 + _size(cfg, eta)) * (1 + _size(cfg, omega))
                res = selfadjoint_residual(k, cfg, eta, omega)
                c.add(f"selfadjoint.{name}.k{k}", "flat-self-adjointness", res, 0, abs(res), 1e-8 * scl)
                diff = float(np.abs(d_operator(k, cfg, omega) - d_operator_selfadjoint(k, cfg, omega)).max())
                c.add(f"d_operator_forms.{name}.k{k}", "linearized-operator-divergence-form", diff, 0,
                      diff, 1e-9 * scl)
    if opts.backend in (None, "sphere"):
        tau = opts.tau or 0.5
        for n in ([opts.n] if opts.n else [2, 3]):
            phi = SphereField(random_poly(n + 1, 2, rng, 0.3))
            cfg = DensityConfig(Backend.sphere(n), phi, tau, order=opts.quad_order or 12)
            for k in ([opts.k] if opts.k else [1, 2, 3]):
                eta = SphereField(random_poly(n + 1, 2, rng))
                omega = SphereField(random_poly(n + 1, 2, rng))
                st = evaluate(cfg, k)
                scl = field_scale(st, k) * (1 + _size(cfg, eta)) * (1 + _size(cfg, omega))
                res = selfadjoint_residual(k, cfg, eta, omega)
                if k <= 2:
                    c.add(f"selfadjoint.sphere.n{n}.k{k}", "low-order-self-adjointness", res, 0,
                          abs(res), 1e-8 * scl)
                else:
                    # the obstruction: a visibly nonzero residual
                    c.add(f"obstruction.sphere.n{n}.k{k}", "curved-obstruction", res, 0, abs(res),
                          1e-8 * scl, passed=abs(res) > 1e-8 * scl)
    c.records.extend(_to_flat_records(opts, rng))
    return c.records


def _size(cfg, f):
    x = cfg.quadrature().points
    v, g, H = cfg.backend.frame_jets(f, x, 2)
    return float(max(np.abs(v).max(), np.abs(g).max(), np.abs(H).max()))


def random_curvature_point(rng, n, curved=True) -> tensor_pt.PointCurvature:
    ric = rng.normal(size=(n, n))
    cot = rng.normal(size=(n, n, n))
    riem = tensor_pt.project_curvature(rng.normal(size=(n,) * 4)) if curved else None
    return tensor_pt.PointCurvature(rng.normal(), ric + ric.T, cot - cot.transpose(1, 0, 2), riem)


def _to_flat_records(opts, rng):
    c = _Collector("identities", opts)
    samples = opts.samples // 50 if opts.samples else 200
    for k in ([opts.k] if opts.k and opts.k >= 3 else [3, 4]):
        worst = 0.0
        nonzero = 0
        for _ in range(samples):
            n = int(rng.integers(2, 5))
            pc = random_curvature_point(rng, n)
            fitted, predicted = tensor_pt.to_flat_leading_coeff(k, pc, rng.normal(size=n), rng.normal(size=n))
            size = np.linalg.norm(predicted)
            worst = max(worst, float(np.linalg.norm(fitted - predicted) / max(size, 1e-300)))
            nonzero += int(size > 1e-8)
        c.add(f"to_flat.k{k}.agreement", "leading-coefficient", worst, 0, worst, 1e-8)
        frac = nonzero / samples
        c.add(f"to_flat.k{k}.nonzero_fraction", "leading-coefficient", frac, 0.95,
              max(0.95 - frac, 0.0), 0.0)
    return c.records


# ---------------------------------------------------------------------------------------
# criterion 6: soliton closed forms
# ---------------------------------------------------------------------------------------


def gaussian_config(n, tau, order=None) -> DensityConfig:
    return DensityConfig(Backend.euclidean(n), PolyField.quadratic(np.eye(n) / (2 * tau)), tau,
                         order=order or 16)


def sphere_soliton_config(n, order=None) -> DensityConfig:
    tau = 1 / (2 * (n - 1))
    cfg = DensityConfig(Backend.sphere(n), SphereField.constant(n, 0.0), tau, order=order or 8)
    return normalize_c1(cfg)


def soliton_closed_forms(opts: RunOptions) -> list[Record]:
    c = _Collector("soliton", opts)
    models = [opts.model] if opts.model else ["gaussian", "sphere"]
    if "gaussian" in models:
        taus = [opts.tau] if opts.tau else [0.25, 0.5]
        for n in ([opts.n] if opts.n else [1, 2, 3]):
            for tau in taus:
                cfg = gaussian_config(n, tau, opts.quad_order)
                tag = f"gaussian.n{n}.tau{tau:g}"
                rep = soliton_suite(cfg)
                st = evaluate(cfg, 5)
                zero = float(np.abs(st.sig[:, 1:]).max())
                c.add(f"sigma_vanish.{tag}", "gaussian-sigma-vanishing", zero, 0, zero, 1e-10)
                c.add(f"soliton_residual.{tag}", "soliton-equation", rep.ricci_residual, 0,
                      rep.ricci_residual, 0.0)
                err = abs(rep.potential_sq_integral - n / 2)
                c.add(f"potential_sq.{tag}", "soliton-potential-bound", rep.potential_sq_integral,
                      n / 2, err, 1e-8)
                c.add(f"potential_eigen.{tag}", "soliton-potential-eigenfunction",
                      rep.potential_eigen_residual, 0, rep.potential_eigen_residual, 1e-9)
                _integral_rows(c, rep, tag)
    if "sphere" in models:
        for n in ([opts.n] if opts.n else [2, 3, 4, 5]):
            if n < 2:
                continue
            cfg = sphere_soliton_config(n, opts.quad_order)
            tag = f"sphere.n{n}"
            rep = soliton_suite(cfg)
            c.add(f"soliton_residual.{tag}", "soliton-equation", rep.ricci_residual, 0,
                  rep.ricci_residual, 1e-12)
            pw = max(rep.sigma_power_residual)
            c.add(f"sigma_powers.{tag}", "soliton-sigma-powers", pw, 0, pw, 1e-10)
            c.bound(f"potential_sq.{tag}", "soliton-potential-bound", rep.potential_sq_integral,
                    n / 2, 1e-8)
            _integral_rows(c, rep, tag)
            c.bound(f"sigma1_sign.{tag}", "sigma1-sign-at-solitons", rep.sigma1_max, 0.0, 0.0)
            phi_c = math.log(sphere_volume(n)) - n / 2 * math.log(4 * math.pi * cfg.tau)
            s1 = float(sigma_field(1, cfg).mean())
            ref = (n - 1) * (phi_c - n / 2)
            c.add(f"sigma1_value.{tag}", "sphere-sigma1", s1, ref, abs(s1 - ref), 1e-10 * (1 + abs(ref)))
    return c.records


def _integral_rows(c, rep, tag):
    for name, val, ref, anchor in (
        ("sigma1_integral", rep.sigma1_integral, rep.sigma1_reference, "total-sigma1-at-solitons"),
        ("sigma2_integral", rep.sigma2_integral, rep.sigma2_reference, "total-sigma2-at-solitons"),
    ):
        c.add(f"{name}.{tag}", anchor, val, ref, abs(val - ref), 1e-9 * max(1.0, abs(ref)))


# ---------------------------------------------------------------------------------------
# criterion 7: scale invariance
# ---------------------------------------------------------------------------------------


def scale_invariance(opts: RunOptions) -> list[Record]:
    c = _Collector("variation", opts)
    rng = _rng(opts, "scale_invariance")
    tau = opts.tau or 0.4
    n = opts.n or 2
    cases = []
    if opts.backend in (None, "euclidean"):
        A = rng.normal(size=(n, n))
        phi = PolyField.quadratic(A @ A.T + np.eye(n)) + PolyField.from_terms(
            n, [(tuple(4 * e), 0.02) for e in np.eye(n, dtype=int)]
        )
        cases.append(("euclidean", Backend.euclidean(n), phi, opts.quad_order or 24))
    if opts.backend in (None, "torus"):
        cases.append(("torus", Backend.torus(n), TrigField.random(n, rng), _torus_grid(opts, n)))
    for name, b, phi, order in cases:
        for cfac in (0.5, 2.0, 5.0):
            for k in ([opts.k] if opts.k else [1, 2, 3, 4]):
                lhs = w_eval(k, DensityConfig(b.scale_metric(cfac), phi, tau, order=order))
                rhs = w_eval(k, DensityConfig(b, phi, tau / cfac, order=order))
                c.add(f"scale.{name}.c{cfac:g}.k{k}", "scale-invariance", lhs, rhs,
                      abs(lhs - rhs), 1e-10 * (1 + abs(lhs)))
    return c.records


# ---------------------------------------------------------------------------------------
# criterion 8: gradients
# ---------------------------------------------------------------------------------------


def gradient_checks(opts: RunOptions) -> list[Record]:
    c = _Collector("variation", opts)
    rng = _rng(opts, "gradient_checks")
    cases = []
    tau = opts.tau or 0.5
    if opts.backend in (None, "torus"):
        for n in ([opts.n] if opts.n else [2]):
            phi = TrigField.random(n, rng)
            cases.append((f"torus.n{n}", DensityConfig(Backend.torus(n), phi, tau,
                          order=_torus_grid(opts, n)), lambda r, n=n: TrigField.random(n, r), 4))
    if opts.backend in (None, "euclidean"):
        n = opts.n or 2
        phi = PolyField.quadratic(np.eye(n) / (2 * tau)) + PolyField.from_terms(
            n, [(tuple(4 * e), 0.01) for e in np.eye(n, dtype=int)]
        )
        cases.append((f"euclidean.n{n}", DensityConfig(Backend.euclidean(n), phi, tau,
                      order=opts.quad_order or 30), lambda r, n=n: random_poly(n, 2, r, 0.5), 4))
    if opts.backend in (None, "sphere"):
        n = opts.n or 2
        phi = SphereField(random_poly(n + 1, 2, rng, 0.3))
        cases.append((f"sphere.n{n}", DensityConfig(Backend.sphere(n), phi, tau,
                      order=opts.quad_order or 12),
                      lambda r, n=n: SphereField(random_poly(n + 1, 2, r)), 2))
    for name, cfg, make, kmax in cases:
        for k in range(1, kmax + 1):
            if opts.k and k != opts.k:
                continue
            psi = make(rng)
            exact = first_variation_phi(k, cfg, psi)
            fd = fd_first_variation(lambda q: w_eval(k, q), cfg, psi)
            c.add(f"first_variation.{name}.k{k}", "first-variation-potential", exact, fd,
                  abs(exact - fd) / (1 + abs(exact)), 1e-6)
            if cfg.backend.flat or k <= 2:
                exact = hat_w_gradient(k, cfg, psi)
                fd = fd_first_variation(lambda q: hat_w_eval(k, q), cfg, psi)
                c.add(f"hat_gradient.{name}.k{k}", "shifted-combination-gradient", exact, fd,
                      abs(exact - fd) / (1 + abs(exact)), 1e-6)
    return c.records


# ---------------------------------------------------------------------------------------
# criterion 9: second variations at solitons
# ---------------------------------------------------------------------------------------


def second_variations(opts: RunOptions) -> list[Record]:
    c = _Collector("variation", opts)
    rng = _rng(opts, "second_variations")
    count = opts.samples // 100 if opts.samples else 100
    ks = [opts.k] if opts.k else [1, 2, 3, 4]

    # worked value
    cfg = gaussian_config(1, 0.5, 20)
    x2 = PolyField.from_terms(1, [((2,), 1.0)])
    val = second_variation(2, cfg, VariationPath(x2), functional="hat")
    c.add("gaussian.worked_value", "gaussian-second-variation", val, -0.5, abs(val + 0.5) / 0.5, 1e-6)

    if opts.model in (None, "gaussian"):
        dims = [opts.n] if opts.n else [1, 2]
        taus = [opts.tau] if opts.tau else [0.25, 0.5]
        for n in dims:
            for tau in taus:
                cfg = gaussian_config(n, tau, opts.quad_order or 20)
                for k in ks:
                    tag = f"gaussian.n{n}.tau{tau:g}.k{k}"
                    worst_sign = worst_rel = worst_lin = 0.0
                    for _ in range(count):
                        psi = random_poly(n, 3, rng, 0.5, min_degree=1)
                        sv = second_variation(k, cfg, VariationPath(psi), functional="hat")
                        cf = gaussian_second_variation(k, cfg, psi)
                        worst_sign = max(worst_sign, (-1) ** k * sv)
                        worst_rel = max(worst_rel, abs(sv - cf) / max(abs(cf), 1e-12))
                        lin = PolyField.linear(rng.normal(size=n), rng.normal())
                        worst_lin = max(worst_lin, abs(second_variation(k, cfg, VariationPath(lin),
                                                                        functional="hat")))
                    c.bound(f"sign.{tag}", "local-extremality-shifted", worst_sign, 0.0, 1e-6)
                    c.add(f"closed_form.{tag}", "gaussian-second-variation", worst_rel, 0,
                          worst_rel, 1e-6)
                    c.add(f"linear_kernel.{tag}", "gaussian-translation-kernel", worst_lin, 0,
                          worst_lin, 1e-6)

    if opts.model in (None, "sphere"):
        cfg = sphere_soliton_config(2, opts.quad_order or 10)
        worst1 = math.inf
        worst2 = -math.inf
        for _ in range(count):
            a = rng.normal(size=3)
            A = rng.normal(size=(3, 3))
            A = A + A.T - 2 * np.trace(A) / 3 * np.eye(3)
            psi = SphereField(PolyField.linear(a) + PolyField.quadratic(A))
            worst1 = min(worst1, second_variation(1, cfg, VariationPath(psi)))
            worst2 = max(worst2, second_variation(2, cfg, VariationPath(psi)))
        c.add("sphere.n2.k1.sign", "local-minimum-w1", worst1, 0, max(-worst1, 0), 1e-6)
        c.bound("sphere.n2.k2.sign", "local-maximum-w2", worst2, 0.0, 1e-6)
    return c.records


# ---------------------------------------------------------------------------------------
# criterion 10: spectral gap
# ---------------------------------------------------------------------------------------


def spectral_gaps(opts: RunOptions) -> list[Record]:
    c = _Collector("spectrum", opts)
    for tau in ([opts.tau] if opts.tau else [0.25, 0.5, 1.0]):
        cfg = gaussian_config(1, tau, opts.quad_order or 24)
        for m in (6, 12):
            gap = spectral_gap(cfg, m)
            ref = 1 / (2 * tau)
            c.add(f"gap.tau{tau:g}.m{m}", "weighted-lichnerowicz", gap, ref, abs(gap - ref), 1e-10)
    return c.records


# ---------------------------------------------------------------------------------------
# criterion 11: contraction identity behind the uniqueness arguments
# ---------------------------------------------------------------------------------------


def obata_engine(opts: RunOptions) -> list[Record]:
    c = _Collector("identities", opts)
    rng = _rng(opts, "obata_engine")
    tau = opts.tau or 0.5
    cases = []
    kinds = [opts.backend] if opts.backend else ["euclidean", "torus", "sphere"]
    for kind in kinds:
        for n in ([opts.n] if opts.n else [2, 3]):
            if kind == "euclidean":
                phi = PolyField.quadratic(np.eye(n) / (2 * tau)) + PolyField.from_terms(
                    n, [(tuple(4 * e), 0.01) for e in np.eye(n, dtype=int)]
                )
                cases.append((f"euclidean.n{n}", DensityConfig(Backend.euclidean(n), phi, tau,
                              order=opts.quad_order or 16)))
                cases.append((f"gaussian.n{n}", gaussian_config(n, tau)))
            elif kind == "torus":
                cases.append((f"torus.n{n}", DensityConfig(Backend.torus(n), TrigField.random(n, rng),
                              tau, order=_torus_grid(opts, n) if n == 2 else 12)))
            else:
                phi = SphereField(random_poly(n + 1, 2, rng, 0.5))
                cases.append((f"sphere.n{n}", DensityConfig(Backend.sphere(n), phi, tau,
                              order=opts.quad_order or 10)))
    for name, cfg in cases:
        for k in ([opts.k] if opts.k else [1, 2, 3, 4]):
            rep = obata_identity_residual(k, cfg)
            c.add(f"contraction.{name}.k{k}", "contraction-identity", rep.residual, 0, rep.residual,
                  1e-9 * rep.scale)
            c.add(f"bracket_sign.{name}.k{k}", "cone-bracket-sign", rep.sign_violation, 0,
                  rep.sign_violation, 1e-10 * rep.scale, passed=(
                      rep.sign_violation <= 1e-10 * rep.scale * opts.tol_scale
                      and rep.strict_failures == 0))
    return c.records


# ---------------------------------------------------------------------------------------


GROUPS: dict[int, tuple[str, Callable[[RunOptions], list[Record]]]] = {
    1: ("algebra", algebra_oracles),
    2: ("algebra", newton_inequality),
    3: ("algebra", newton_transform_identities),
    4: ("identities", conservation_laws),
    5: ("identities", self_adjointness),
    6: ("soliton", soliton_closed_forms),
    7: ("variation", scale_invariance),
    8: ("variation", gradient_checks),
    9: ("variation", second_variations),
    10: ("spectrum", spectral_gaps),
    11: ("identities", obata_engine),
}

SUITES = ("algebra", "identities", "soliton", "variation", "spectrum")


def run_group(number: int, opts: RunOptions) -> list[Record]:
    return GROUPS[number][1](opts)


def run_suite(name: str, opts: RunOptions) -> list[Record]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    out = []
    for number in sorted(GROUPS):
        if GROUPS[number][0] == name:
            out.extend(run_group(number, opts))
    return out


def option_names() -> list[str]:
    return [f.name for f in fields(RunOptions)]
