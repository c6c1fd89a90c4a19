"""Extreme-range Edgeworth expansion against an FFT convolution oracle."""

import numpy as np
import pytest
from scipy.stats import norm

from exdev import (
    DomainError,
    GridSpec,
    MassLeak,
    NormalizedTiltedDensity,
    convolve_oracle,
    edgeworth_density,
    tilt_to_mean,
    z1_centered,
    z1_raw,
)

from helpers import simpson_integral


@pytest.fixture(scope="module")
def td20(weibull3):
    return tilt_to_mean(weibull3, 20.0)


@pytest.fixture(scope="module")
def ntd20(td20):
    return NormalizedTiltedDensity(td20)


# --- standardized single-step density ----------------------------------------

def test_normalized_density_mean_zero_var_one(ntd20):
    lo = -ntd20.a / ntd20.s  # left edge of the support after standardizing
    mass = simpson_integral(ntd20.pdf, lo, 12.0, points=400_001)
    mean = simpson_integral(lambda y: y * ntd20.pdf(y), lo, 12.0, points=400_001)
    var = simpson_integral(lambda y: y * y * ntd20.pdf(y), lo, 12.0, points=400_001)
    assert mass == pytest.approx(1.0, abs=1e-9)
    assert mean == pytest.approx(0.0, abs=1e-9)
    assert var == pytest.approx(1.0, abs=1e-8)


def test_normalized_density_vanishes_below_support(ntd20):
    y = np.array([-ntd20.a / ntd20.s - 1.0, -50.0])
    np.testing.assert_array_equal(ntd20.pdf(y), 0.0)


# --- convolution oracle --------------------------------------------------------

def test_oracle_n1_reproduces_density(td20, ntd20):
    table = convolve_oracle(td20, 1)
    sel = np.abs(table.x) <= 4.0  # compare at the nodes; interp adds O(dx^2)
    np.testing.assert_allclose(table.density[sel], ntd20.pdf(table.x[sel]),
                               rtol=0, atol=1e-10)
    x = np.linspace(-4.0, 4.0, 81)
    np.testing.assert_allclose(table(x), ntd20.pdf(x), rtol=0, atol=1e-5)


def test_oracle_preserves_moments(td20):
    table = convolve_oracle(td20, 8)
    x, f = table.x, table.density
    mass = np.trapezoid(f, x)
    mean = np.trapezoid(x * f, x)
    var = np.trapezoid(x * x * f, x)
    assert mass == pytest.approx(1.0, abs=1e-9)
    assert mean == pytest.approx(0.0, abs=1e-9)
    assert var == pytest.approx(1.0, abs=1e-7)


def test_oracle_approaches_gaussian(td20):
    x = np.linspace(-4.0, 4.0, 161)
    sup = []
    for n in (4, 16, 64):
        table = convolve_oracle(td20, n)
        sup.append(np.max(np.abs(table(x) - norm.pdf(x))))
    assert sup[2] < sup[1] < sup[0]


def test_oracle_narrow_grid_raises_mass_leak(td20):
    with pytest.raises(MassLeak):
        convolve_oracle(td20, 4, GridSpec(half_width=1.0, points=256))


def test_oracle_rejects_bad_n(td20):
    for n in (0, -3, 2000):
        with pytest.raises(DomainError):
            convolve_oracle(td20, n)


def test_grid_spec_validation():
    with pytest.raises(DomainError):
        GridSpec(points=255)
    with pytest.raises(DomainError):
        GridSpec(points=128)
    with pytest.raises(DomainError):
        GridSpec(half_width=-1.0)


# --- skew-corrected expansion ---------------------------------------------------

def test_edgeworth_formula_decomposition(td20):
    x = np.linspace(-3.0, 3.0, 25)
    ev = edgeworth_density(td20, 16, x)
    gauss = norm.pdf(x)
    herm3 = x ** 3 - 3.0 * x
    expected = gauss * (1.0 + ev.skew_coeff * herm3)
    np.testing.assert_allclose(ev.value, expected, rtol=1e-12)
    np.testing.assert_allclose(ev.gaussian, gauss, rtol=1e-12)
    # skew_coeff folds in the 1/sqrt(n) factor
    assert ev.skew_coeff == pytest.approx(
        td20.mu3 / (6.0 * np.sqrt(16.0) * td20.s ** 3), rel=1e-12)


def test_edgeworth_beats_gaussian_at_moderate_skew(weibull2):
    # lower tilt keeps the single-step skew visible
    td = tilt_to_mean(weibull2, 2.0)
    x = np.linspace(-3.0, 3.0, 121)
    for n in (4, 16):
        table = convolve_oracle(td, n)
        ref = table(x)
        ev = edgeworth_density(td, n, x)
        err_edge = np.max(np.abs(ev.value - ref))
        err_gauss = np.max(np.abs(ev.gaussian - ref))
        assert err_edge < err_gauss


def test_edgeworth_error_shrinks_with_n(td20):
    # compare at table nodes so linear-interp error cannot floor the decay;
    # the residual is the n^{-1} kurtosis term, so each 4x in n gains ~4x
    errs = []
    for n in (4, 16, 64):
        table = convolve_oracle(td20, n)
        sel = np.abs(table.x) <= 3.0
        ev = edgeworth_density(td20, n, table.x[sel])
        errs.append(np.max(np.abs(ev.value - table.density[sel])))
    assert errs[1] < errs[0] / 1.5
    assert errs[2] < errs[1] / 1.5


# --- first-coordinate standardization helpers -----------------------------------

def test_z1_identities(td20):
    n, y1, a, s = 16, 22.0, td20.m, td20.s
    raw = z1_raw(n, a, y1, s)
    cent = z1_centered(n, a, y1, s)
    denom = s * np.sqrt(n - 1.0)
    assert raw == pytest.approx((n * a - y1) / denom, rel=1e-12)
    assert cent == pytest.approx((a - y1) / denom, rel=1e-12)
    # the two scores differ by the deterministic shift (n-1) a / (s sqrt(n-1))
    assert raw - cent == pytest.approx(np.sqrt(n - 1.0) * a / s, rel=1e-12)


def test_z1_rejects_small_n(td20):
    with pytest.raises(DomainError):
        z1_raw(1, td20.m, 5.0, td20.s)
    with pytest.raises(DomainError):
        z1_centered(1, td20.m, 5.0, td20.s)
