import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigma_forge import wsym
from sigma_forge.wsym import SymPair, WeightedSpectrum

finite = st.floats(-4, 4, allow_nan=False, allow_infinity=False)
spectra = st.builds(WeightedSpectrum, finite, st.lists(finite, max_size=6).map(tuple))
orders = st.integers(0, 8)


def ws(mu0, *mu):
    return WeightedSpectrum(mu0, mu)


# -- worked values -------------------------------------------------------------


@pytest.mark.parametrize(
    "k, spectrum, expected",
    [
        (1, ws(1, 2, 3), 6),
        (2, ws(0, 1, 2, 3), 11),
        (2, ws(1, 1, 2), 5.5),
        (3, ws(2, 0, 0), 4 / 3),
        (0, ws(7, 1), 1),
    ],
)
def test_weighted_sigma_values(k, spectrum, expected):
    assert wsym.weighted_sigma(k, spectrum) == pytest.approx(expected, rel=1e-15)


def test_weighted_sigma_rejects_negative_order():
    with pytest.raises(ValueError):
        wsym.weighted_sigma(-1, ws(1, 2))


@pytest.mark.parametrize(
    "k, spectrum, s, expected",
    [(2, ws(0, 1, 2), 1, 5.5), (1, ws(-1, 4), 1, 4)],
)
def test_shifted_values(k, spectrum, s, expected):
    assert wsym.weighted_sigma_shifted(k, spectrum, s) == pytest.approx(expected, rel=1e-15)


def test_shifted_rejects_negative_order():
    with pytest.raises(ValueError):
        wsym.weighted_sigma_shifted(-1, ws(0, 1), 1.0)


@pytest.mark.parametrize(
    "spectrum, K, expected",
    [
        (ws(0, 1), 2, [1, 1, 0]),
        (ws(1), 3, [1, 1, 0.5, 1 / 6]),
        (ws(1, 1, 2), 2, [1, 4, 5.5]),
    ],
)
def test_generating_coeffs_values(spectrum, K, expected):
    assert wsym.generating_coeffs(spectrum, K) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "k, spectrum, expected",
    [(1, ws(0, 0, 0, 0), 0), (1, ws(0, 1, 1), 1), (2, ws(0, 5, 0, 0), 0)],
)
def test_newton_gap_values(k, spectrum, expected):
    assert wsym.newton_gap(k, spectrum) == pytest.approx(expected, abs=1e-15)


def test_newton_equality_detector():
    assert wsym.is_newton_equality(2, ws(0, 5, 0, 0))
    assert wsym.is_newton_equality(3, ws(2.5, 0, 0))
    assert not wsym.is_newton_equality(1, ws(0, 1, 1))


def test_cone_report_exponential_case():
    rep = wsym.cone_report(ws(-1, 0, 0, 0), 5)
    assert rep.max_k == 5
    assert rep.margins == pytest.approx([1 / math.factorial(j) for j in range(1, 6)], rel=1e-15)
    assert rep.contains(5)


def test_cone_report_positive_spectrum_is_outside():
    assert wsym.cone_report(ws(0, 1, 2, 3), 3).max_k == 0


def test_cone_report_shifted_gaussian_data():
    tau = 0.5
    rep = wsym.cone_report(ws(-1 / (2 * tau), 0, 0), 4)
    assert rep.max_k == 4
    assert rep.margins == pytest.approx([1 / math.factorial(j) for j in range(1, 5)])


def test_cone_report_rejects_bad_kmax():
    with pytest.raises(ValueError):
        wsym.cone_report(ws(0), 0)


def test_newton_cor_gap_values():
    assert wsym.newton_cor_gap(2, ws(-1, 0, 0)) == pytest.approx(0, abs=1e-15)
    assert wsym.newton_cor_gap(1, ws(-1, -0.1, -0.2)) > 0
    assert wsym.newton_cor_gap(3, ws(-2, -0.5)) > 0


def test_newton_cor_gap_outside_cone_raises():
    with pytest.raises(wsym.OutsideConeError):
        wsym.newton_cor_gap(1, ws(1, 1))


def test_remove_coordinate_example():
    spectrum = ws(1, 1, 2)
    reduced = wsym.remove_coordinate(spectrum, 1)
    assert reduced == ws(1, 2)
    assert wsym.weighted_sigma(2, reduced) == pytest.approx(2.5)
    assert wsym.weighted_sigma(2, spectrum) == pytest.approx(
        wsym.weighted_sigma(2, reduced) + 1 * wsym.weighted_sigma(1, reduced)
    )


def test_remove_coordinate_base_case():
    assert wsym.remove_coordinate(ws(0.3, 9.0), 1) == ws(0.3)


@pytest.mark.parametrize("i", [0, 3, -1, True])
def test_remove_coordinate_index_errors(i):
    with pytest.raises(IndexError):
        wsym.remove_coordinate(ws(0, 1, 2), i)


def test_newton_transform_values():
    sp = SymPair(1.0, np.diag([1.0, 2.0]))
    np.testing.assert_array_equal(wsym.newton_transform(0, sp), np.eye(2))
    np.testing.assert_allclose(wsym.newton_transform(1, sp), np.diag([3.0, 2.0]), atol=1e-15)


def test_definiteness_examples():
    assert wsym.definiteness(0, SymPair(3.0, np.diag([5.0, -1.0]))).positive
    assert wsym.definiteness(1, SymPair(-1.0, np.diag([-0.1, -0.2]))).positive
    d = wsym.definiteness(2, SymPair(-1.0, np.zeros((2, 2))))
    assert d.eigenvalues == pytest.approx([0.5, 0.5])
    assert d.verdict == "positive definite"


def test_definiteness_verdicts():
    assert wsym.definiteness(1, SymPair(0.0, np.diag([1.0, -1.0]))).verdict == "indefinite"
    assert wsym.definiteness(1, SymPair(5.0, np.zeros((2, 2)))).verdict == "negative definite"


def test_sympair_symmetrizes_exactly():
    sp = SymPair(0.0, np.array([[0.0, 1.0], [0.3, 2.0]]))
    assert np.array_equal(sp.P, sp.P.T)
    with pytest.raises(ValueError):
        SymPair(0.0, np.zeros((2, 3)))


def test_sympair_spectrum_reproduces_sigma():
    P = np.array([[1.0, 0.5], [0.5, -2.0]])
    sp = SymPair(0.7, P)
    s1 = 0.7 + np.trace(P)
    s2 = 0.7**2 / 2 + 0.7 * np.trace(P) + np.linalg.det(P)
    assert wsym.weighted_sigma(1, sp.spectrum()) == pytest.approx(s1, rel=1e-14)
    assert wsym.weighted_sigma(2, sp.spectrum()) == pytest.approx(s2, rel=1e-14)


def test_spectrum_rejects_nonfinite():
    with pytest.raises(ValueError):
        WeightedSpectrum(math.nan, ())


# -- properties -------------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(spectra, orders, finite)
def test_shift_formula_matches_recursion(spectrum, k, s):
    q = lambda v: float(round(v * 2**20) / 2**20)  # noqa: E731 - exact sums
    spectrum = WeightedSpectrum(q(spectrum.mu0), spectrum.mu)
    s = q(s)
    direct = wsym.weighted_sigma(k, spectrum.shifted(s))
    assert wsym.weighted_sigma_shifted(k, spectrum, s) == pytest.approx(
        direct, rel=1e-12, abs=1e-12 * wsym.scale(spectrum, k)
    )


@settings(max_examples=200, deadline=None)
@given(spectra)
def test_generating_function_matches_table(spectrum):
    table = wsym.weighted_sigma_table(8, spectrum)
    assert wsym.generating_coeffs(spectrum, 8) == pytest.approx(table, rel=1e-10, abs=1e-10)


@settings(max_examples=300, deadline=None)
@given(spectra, st.integers(1, 8))
def test_newton_inequality(spectrum, k):
    assert wsym.newton_gap(k, spectrum) >= -1e-12 * wsym.scale(spectrum, k)


@settings(max_examples=200, deadline=None)
@given(spectra, orders, st.randoms(use_true_random=False))
def test_symmetric_in_eigenvalues(spectrum, k, rnd):
    mu = list(spectrum.mu)
    rnd.shuffle(mu)
    assert wsym.weighted_sigma(k, WeightedSpectrum(spectrum.mu0, tuple(mu))) == wsym.weighted_sigma(k, spectrum)


@settings(max_examples=200, deadline=None)
@given(spectra.filter(lambda s: s.n > 0), st.integers(1, 7), st.data())
def test_remove_one_identity(spectrum, k, data):
    i = data.draw(st.integers(1, spectrum.n))
    red = wsym.remove_coordinate(spectrum, i)
    rhs = wsym.weighted_sigma(k, red) + spectrum.mu[i - 1] * wsym.weighted_sigma(k - 1, red)
    assert wsym.weighted_sigma(k, spectrum) == pytest.approx(rhs, abs=1e-12 * wsym.scale(spectrum, k))


@settings(max_examples=200, deadline=None)
@given(spectra, orders, st.floats(0.1, 3))
def test_homogeneity(spectrum, k, c):
    scaled = WeightedSpectrum(c * spectrum.mu0, tuple(c * m for m in spectrum.mu))
    assert wsym.weighted_sigma(k, scaled) == pytest.approx(
        c**k * wsym.weighted_sigma(k, spectrum), abs=1e-11 * wsym.scale(scaled, k)
    )


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 6), st.integers(0, 2**31))
def test_batched_routes_agree(n, seed):
    rng = np.random.default_rng(seed)
    mu0 = rng.uniform(-2, 2, 5)
    A = rng.normal(size=(5, n, n))
    P = A + np.swapaxes(A, -1, -2)
    eig = np.linalg.eigvalsh(P) if n else np.zeros((5, 0))
    table = wsym.sigma_table(6, mu0, eig)
    via_power = wsym.sigma_from_power_sums(6, mu0, wsym.power_sums(6, P))
    scl = (np.abs(mu0) + np.abs(eig).sum(-1) + 1)[:, None] ** np.arange(7)
    assert np.all(np.abs(table - via_power) <= 1e-11 * scl)
    for i in range(5):
        ref = wsym.weighted_sigma_table(6, WeightedSpectrum(mu0[i], eig[i]))
        assert np.all(np.abs(table[i] - ref) <= 1e-12 * scl[i])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.integers(0, 6), st.integers(0, 2**31))
def test_newton_transform_eigenvalues(n, k, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    P = A + A.T
    mu0 = rng.normal()
    T = wsym.newton_transform(k, SymPair(mu0, P))
    lam, Q = np.linalg.eigh(P)
    D = Q.T @ T @ Q
    full = WeightedSpectrum(mu0, lam)
    expected = [wsym.weighted_sigma(k, wsym.remove_coordinate(full, i + 1)) for i in range(n)]
    np.testing.assert_allclose(D, np.diag(expected), atol=1e-9 * wsym.scale(full, k))
    batch = wsym.newton_transform_batch(wsym.sigma_table(k, mu0, lam), P, k)[k]
    np.testing.assert_allclose(batch, T, atol=1e-10 * wsym.scale(full, k))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31))
def test_definite_inside_cone(n, k, seed):
    rng = np.random.default_rng(seed)
    for _ in range(50):
        spectrum = WeightedSpectrum(-rng.uniform(0.1, 2), rng.uniform(-1, 0.3, n))
        if wsym.cone_report(spectrum, k + 1).contains(k + 1):
            Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
            P = Q @ np.diag(spectrum.mu) @ Q.T
            assert wsym.definiteness(k, SymPair(spectrum.mu0, 0.5 * (P + P.T))).min_eigenvalue > 0


def test_exact_table_is_rational():
    table = wsym._exact_table(3, 0.5, (0.25,))
    assert all(isinstance(v, Fraction) for v in table)
    assert table[2] == Fraction(1, 8) + Fraction(1, 8)
