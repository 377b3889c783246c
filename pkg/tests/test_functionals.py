import math
from fractions import Fraction

import numpy as np
import pytest

from sigma_forge.functionals import (
    DensityConfig,
    NonVariationalError,
    VariationPath,
    critical_point_residual,
    d_operator,
    divergence_residuals,
    dsigma_identity_residual,
    evaluate,
    field_scale,
    first_variation_phi,
    gaussian_second_variation,
    hat_sigma,
    hat_w_coeffs,
    hat_w_eval,
    hat_w_gradient,
    normalize_c1,
    obata_identity_residual,
    second_variation,
    selfadjoint_residual,
    sigma1_field,
    sigma_field,
    soliton_suite,
    spectral_gap,
    w_eval,
    weighted_volume,
)
from sigma_forge.geom import Backend, PolyField, SphereField, TrigField, random_poly, sphere_volume
from sigma_forge.suites import gaussian_config, sphere_soliton_config


def torus_cfg(n=2, seed=0, **kw):
    phi = TrigField.random(n, np.random.default_rng(seed))
    kw.setdefault("tau", 0.5)
    return DensityConfig(Backend.torus(n), phi, **kw)


def quartic_cfg(n=2, tau=0.5, order=24):
    phi = PolyField.quadratic(np.eye(n) / (2 * tau)) + PolyField.from_terms(
        n, [(tuple(4 * e), 0.01) for e in np.eye(n, dtype=int)]
    )
    return DensityConfig(Backend.euclidean(n), phi, tau, order=order)


# -- configuration ------------------------------------------------------------


def test_config_validation():
    phi = TrigField.constant(2, 0.0)
    with pytest.raises(ValueError):
        DensityConfig(Backend.torus(2), phi, 0.0)
    with pytest.raises(ValueError):
        DensityConfig(Backend.torus(2), phi, 1.0, mode="ancient")
    with pytest.raises(ValueError):
        DensityConfig(Backend.torus(2), phi, 1.0, mode="explicit")
    with pytest.raises(ValueError):
        DensityConfig(Backend.torus(2), phi, 1.0, lam_override=0.3)
    with pytest.raises(TypeError):
        DensityConfig(Backend.torus(2), PolyField.constant(2, 0.0), 1.0)


@pytest.mark.parametrize("mode, lam", [("shrinking", 1.0), ("steady", 0.0), ("expanding", -1.0)])
def test_mode_lambda(mode, lam):
    cfg = DensityConfig(Backend.torus(1), TrigField.constant(1, 0.0), 0.5, mode=mode)
    assert cfg.lam == lam
    assert cfg.with_lambda(0.3).lam == 0.3


# -- invariants at models -----------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gaussian_sigma_vanishes(n):
    cfg = gaussian_config(n, 0.25)
    sig = evaluate(cfg, 5).sig
    assert np.abs(sig[:, 1:]).max() < 1e-12
    for k in range(1, 5):
        assert abs(w_eval(k, cfg)) < 1e-12


def test_sphere_sigma1_value():
    cfg = sphere_soliton_config(2)
    assert cfg.tau == 0.5
    np.testing.assert_allclose(sigma_field(1, cfg), math.log(2) - 1, atol=1e-14)


def test_torus_zero_potential_steady():
    cfg = DensityConfig(Backend.torus(2), TrigField.constant(2, 0.0), 1.0, mode="steady")
    assert not evaluate(cfg, 4).sig[:, 1:].any()


def test_w0_is_volume():
    cfg = gaussian_config(2, 0.5)
    assert w_eval(0, cfg) == pytest.approx(1.0, rel=1e-13)
    assert weighted_volume(cfg) == pytest.approx(1.0, rel=1e-13)


def test_normalize_examples():
    g = gaussian_config(2, 0.3)
    assert weighted_volume(normalize_c1(g)) == pytest.approx(1.0, rel=1e-13)
    assert normalize_c1(g).phi(np.zeros((1, 2)))[0] == pytest.approx(0.0, abs=1e-13)
    s = DensityConfig(Backend.sphere(2), SphereField.constant(2, 0.0), 0.5)
    phi = normalize_c1(s).phi
    assert phi(np.array([[0, 0, 1.0]]))[0] == pytest.approx(math.log(2), rel=1e-14)


def test_normalize_rejects_bad_volume():
    cfg = DensityConfig(Backend.torus(1), TrigField.constant(1, 1e4), 1.0)
    with pytest.raises(ValueError):
        normalize_c1(cfg)


def test_sigma1_field_matches_nodes():
    cfg = torus_cfg(2, seed=3, mode="explicit", lam_override=0.7)
    x = cfg.quadrature().points
    np.testing.assert_allclose(sigma1_field(cfg)(x), sigma_field(1, cfg), atol=1e-13)
    s = DensityConfig(Backend.sphere(3), SphereField(random_poly(4, 2, np.random.default_rng(1))), 0.4)
    y = s.quadrature().points
    np.testing.assert_allclose(sigma1_field(s)(y), sigma_field(1, s), atol=1e-12)


# -- first variation and the linearised operator --------------------------------


def test_first_variation_zero_direction():
    cfg = torus_cfg()
    assert first_variation_phi(2, cfg, TrigField.constant(2, 0.0)) == 0


def test_first_variation_refused_on_sphere():
    cfg = sphere_soliton_config(2)
    with pytest.raises(NonVariationalError):
        first_variation_phi(3, cfg, SphereField.constant(2, 1.0))


def test_d_operator_on_constants():
    cfg = torus_cfg(mode="explicit", lam_override=0.7)
    st = evaluate(cfg, 3)
    for k in (1, 2, 3):
        d = d_operator(k, cfg, TrigField.constant(2, 1.0))
        np.testing.assert_allclose(d, 0.7 * st.sig[:, k - 1], atol=1e-14)


def test_d_operator_is_linearisation():
    cfg = torus_cfg(seed=4)
    psi = TrigField.random(2, np.random.default_rng(9))
    h = 1e-6
    for k in (1, 2, 3):
        plus = sigma_field(k, cfg.with_phi(cfg.phi + h * psi))
        minus = sigma_field(k, cfg.with_phi(cfg.phi - h * psi))
        np.testing.assert_allclose((plus - minus) / (2 * h), d_operator(k, cfg, psi), atol=1e-7)


def test_selfadjoint_trivial_and_flat():
    cfg = torus_cfg(seed=5)
    rng = np.random.default_rng(6)
    eta, omega = TrigField.random(2, rng), TrigField.random(2, rng)
    assert selfadjoint_residual(4, cfg, eta, eta) == 0
    scl = field_scale(evaluate(cfg, 4), 4)
    assert abs(selfadjoint_residual(4, cfg, eta, omega)) < 1e-8 * scl


def test_selfadjoint_sphere_low_order_and_obstruction():
    rng = np.random.default_rng(7)
    cfg = DensityConfig(Backend.sphere(2), SphereField(random_poly(3, 2, rng, 0.3)), 0.5, order=12)
    eta, omega = SphereField(random_poly(3, 2, rng)), SphereField(random_poly(3, 2, rng))
    scl = field_scale(evaluate(cfg, 3), 3)
    assert abs(selfadjoint_residual(2, cfg, eta, omega)) < 1e-8 * scl
    assert abs(selfadjoint_residual(3, cfg, eta, omega)) > 1e-6


# -- conservation laws ----------------------------------------------------------


def test_divergence_zero_potential():
    cfg = DensityConfig(Backend.torus(2), TrigField.constant(2, 0.0), 0.5, order=8)
    assert tuple(divergence_residuals(3, cfg)) == (0.0, 0.0)


def test_divergence_worked_case():
    phi = TrigField.from_terms(2, [((1, 0), 0.3, 0.0), ((1, 1), 0.0, 0.2)])
    cfg = DensityConfig(Backend.torus(2), phi, 0.5, mode="explicit", lam_override=0.7, order=16)
    rep = divergence_residuals(3, cfg)
    assert rep.newton < 1e-8 * rep.scale
    assert rep.trace_adjusted < 1e-8 * rep.scale


def test_divergence_refused_on_sphere():
    with pytest.raises(ValueError):
        divergence_residuals(2, sphere_soliton_config(2))
    with pytest.raises(ValueError):
        dsigma_identity_residual(2, sphere_soliton_config(2))


@pytest.mark.parametrize("k", [1, 4])
def test_dsigma_torus(k):
    cfg = torus_cfg(seed=8, order=16)
    assert dsigma_identity_residual(k, cfg) < 1e-8 * field_scale(evaluate(cfg, k), k)


def test_dsigma_euclidean_quartic():
    cfg = quartic_cfg(order=10)
    assert dsigma_identity_residual(3, cfg) < 1e-8 * field_scale(evaluate(cfg, 3), 3)


# -- the shifted combination ------------------------------------------------------


def test_hat_coefficients():
    assert hat_w_coeffs(1).exact == (Fraction(0), Fraction(1))
    assert hat_w_coeffs(2).exact == (Fraction(1, 8), Fraction(0), Fraction(1))
    for k in range(1, 8):
        c = list(hat_w_coeffs(k).exact) + [Fraction(0)]
        assert c[k] == 1
        for m in range(k):
            assert c[m] - c[m + 1] / 2 == Fraction(-1, 2) ** (k - m) / math.factorial(k - m)


def test_hat_requires_shrinking():
    cfg = torus_cfg(mode="steady")
    with pytest.raises(ValueError):
        hat_w_eval(2, cfg)
    with pytest.raises(ValueError):
        hat_w_gradient(2, cfg, TrigField.constant(2, 1.0))


def test_hat_sigma_k1_gradient():
    cfg = torus_cfg(seed=2)
    psi = TrigField.random(2, np.random.default_rng(3))
    st = evaluate(cfg, 1)
    x = st.points
    ref = -st.integrate((cfg.tau * st.sig[:, 1] - 0.5) * psi(x))
    assert hat_w_gradient(1, cfg, psi) == pytest.approx(ref, rel=1e-13)
    np.testing.assert_allclose(hat_sigma(1, cfg), st.sig[:, 1] - cfg.lam, atol=1e-14)


# -- solitons -----------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gaussian_soliton_report(n):
    rep = soliton_suite(gaussian_config(n, 0.25))
    assert rep.ricci_residual == 0
    assert rep.potential_sq_integral == pytest.approx(n / 2, abs=1e-8)
    assert rep.potential_eigen_residual < 1e-9
    assert rep.sigma1_integral == pytest.approx(rep.sigma1_reference, rel=1e-9)
    assert rep.sigma2_integral == pytest.approx(rep.sigma2_reference, rel=1e-9)
    assert len(rep.rows()) == 5 + 5


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sphere_soliton_report(n):
    cfg = sphere_soliton_config(n)
    rep = soliton_suite(cfg)
    tau = cfg.tau
    assert rep.ricci_residual < 1e-13
    assert rep.sigma1_max < 0
    assert rep.potential_sq_integral < 1e-20
    assert rep.sigma1_integral == pytest.approx(n / (4 * tau), rel=1e-9)
    ref2 = n * (n - 4) / (32 * tau**2)
    assert rep.sigma2_integral == pytest.approx(ref2, rel=1e-9, abs=1e-9)
    phi_c = math.log(sphere_volume(n)) - n / 2 * math.log(4 * math.pi * tau)
    np.testing.assert_allclose(sigma_field(1, cfg), (n - 1) * (phi_c - n / 2), rtol=1e-12)


def test_soliton_suite_requires_shrinking():
    with pytest.raises(ValueError):
        soliton_suite(torus_cfg(mode="steady"))


# -- contraction identity and critical points -------------------------------------------


def test_obata_gaussian_trivial():
    rep = obata_identity_residual(2, gaussian_config(2, 0.5))
    assert rep.residual == 0 and rep.sign_violation == 0 and rep.strict_failures == 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_obata_quartic(k):
    rep = obata_identity_residual(k, quartic_cfg(order=16))
    assert rep.residual < 1e-9 * rep.scale
    assert rep.cone_nodes > 0
    assert rep.sign_violation == 0 and rep.strict_failures == 0


def test_critical_points():
    g = gaussian_config(2, 0.5)
    for k in (1, 2):
        rep = critical_point_residual(k, g)
        assert rep.spread < 1e-12 and abs(rep.trace_integral) < 1e-12
    s = critical_point_residual(1, sphere_soliton_config(3))
    assert s.spread < 1e-12 and abs(s.trace_integral) < 1e-12
    t = critical_point_residual(1, torus_cfg(seed=1))
    assert t.spread > 1e-3
    with pytest.raises(ValueError):
        critical_point_residual(2, sphere_soliton_config(2))
    with pytest.raises(ValueError):
        critical_point_residual(3, g)


# -- second variation and spectral gap -----------------------------------------------------


def test_second_variation_worked_value():
    cfg = gaussian_config(1, 0.5, 20)
    x2 = PolyField.from_terms(1, [((2,), 1.0)])
    assert second_variation(2, cfg, VariationPath(x2), functional="hat") == pytest.approx(-0.5, rel=1e-9)
    assert gaussian_second_variation(2, cfg, x2) == pytest.approx(-0.5, rel=1e-12)


@pytest.mark.parametrize("a", [0.3, -2.0])
def test_second_variation_linear_kernel(a):
    cfg = gaussian_config(1, 0.5, 20)
    for k in (1, 2, 3):
        val = second_variation(k, cfg, VariationPath(PolyField.linear([a])), functional="hat")
        assert abs(val) < 1e-9


def test_second_variation_methods_agree():
    cfg = gaussian_config(1, 0.25, 20)
    psi = PolyField.from_terms(1, [((2,), 0.4), ((3,), 0.1)])
    for k in (1, 2):
        a = second_variation(k, cfg, VariationPath(psi), functional="hat")
        b = second_variation(k, cfg, VariationPath(psi), functional="hat", method="fd")
        assert a == pytest.approx(b, rel=1e-6)


def test_second_variation_sphere_signs():
    cfg = sphere_soliton_config(2, 10)
    psi = SphereField(PolyField.linear([1.0, 0.0, 0.0]))
    assert second_variation(1, cfg, VariationPath(psi)) > 0
    assert second_variation(2, cfg, VariationPath(psi)) < 0


def test_second_variation_refusals():
    sphere = sphere_soliton_config(2)
    psi = SphereField.constant(2, 1.0)
    with pytest.raises(NonVariationalError):
        second_variation(3, sphere, VariationPath(psi))
    not_soliton = quartic_cfg()
    with pytest.raises(ValueError):
        second_variation(1, not_soliton, VariationPath(PolyField.linear([1.0, 0.0])))
    with pytest.raises(ValueError):
        second_variation(1, gaussian_config(1, 0.5), VariationPath(PolyField.linear([1.0])),
                         method="spline")


def test_renormalized_path_stays_normalized():
    cfg = gaussian_config(1, 0.5)
    psi = PolyField.from_terms(1, [((2,), 0.2)])
    c = normalize_c1(cfg.frozen().with_phi(cfg.phi + 0.1 * psi))
    assert weighted_volume(c) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("tau", [0.25, 0.5, 1.0])
def test_spectral_gap(tau):
    assert spectral_gap(gaussian_config(1, tau, 24), 8) == pytest.approx(1 / (2 * tau), rel=1e-10)


def test_spectral_gap_errors():
    with pytest.raises(ValueError):
        spectral_gap(gaussian_config(1, 0.5), 1)
    with pytest.raises(ValueError):
        spectral_gap(gaussian_config(2, 0.5), 4)


# -- scale invariance ----------------------------------------------------------------------


@pytest.mark.parametrize("c", [0.5, 2.0, 5.0])
def test_scale_invariance_euclidean(c):
    cfg = quartic_cfg()
    for k in range(1, 5):
        lhs = w_eval(k, cfg.with_backend(cfg.backend.scale_metric(c)))
        rhs = w_eval(k, DensityConfig(cfg.backend, cfg.phi, cfg.tau / c, order=cfg.order))
        assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(lhs)))
