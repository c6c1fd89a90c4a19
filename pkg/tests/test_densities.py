"""Density model: normalizers against brute-force quadrature, h/psi identities,
class diagnostics."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import exp1

import exdev
from exdev import (
    ClassTag,
    DomainError,
    ExpTerm,
    LogTerm,
    OutOfRange,
    PowerTerm,
    PsiFunction,
    ValidationError,
    class_epsilon,
    density_from_terms,
    psi,
    verify_class,
    weibull,
)

from helpers import simpson_integral


# --- normalization oracles -------------------------------------------------

def _mass(d, hi, points=400_001):
    return simpson_integral(lambda x: d.pdf(np.maximum(x, 0.0)), 0.0, hi, points)


@pytest.mark.parametrize("k", [1.5, 2.0, 2.5, 3.0])
def test_weibull_normalizer_closed_form(k):
    # exp(-(x^k - (k-1) log x)) = x^{k-1} e^{-x^k} integrates to 1/k
    d = weibull(k)
    assert d.log_c == pytest.approx(math.log(k), rel=1e-12)


@pytest.mark.parametrize("k,hi", [(2.0, 8.0), (3.0, 4.0)])
def test_weibull_density_integrates_to_one(k, hi):
    d = weibull(k)
    assert _mass(d, hi) == pytest.approx(1.0, abs=1e-9)


def test_double_exp_normalizer_closed_form(dexp):
    # int_0^inf exp(-e^{x-1}) dx = E_1(1/e) by u = e^{x-1}
    assert dexp.log_c == pytest.approx(-math.log(exp1(math.exp(-1.0))), rel=1e-10)
    assert _mass(dexp, 6.0) == pytest.approx(1.0, abs=1e-9)


def test_custom_terms_integrate_to_one():
    terms = (PowerTerm(0.5, 3.0), PowerTerm(1.0, 1.5), LogTerm(-0.5))
    d = density_from_terms(terms, class_tag=ClassTag("beta", beta=2.0))
    # substitute x = u^2 so the fractional power at the origin stays smooth
    mass = simpson_integral(lambda u: 2.0 * u * d.pdf(u ** 2), 0.0, np.sqrt(5.0))
    assert mass == pytest.approx(1.0, abs=1e-9)


def test_perturbed_density_normalized(weibull2):
    q = lambda x: 0.2 * np.cos(x) / (1.0 + x)
    d = weibull(2.0, q=q)
    assert _mass(d, 8.0) == pytest.approx(1.0, abs=1e-9)
    # q shifts the normalizer away from the clean value
    assert abs(d.log_c - weibull2.log_c) > 1e-3


# --- h / psi ----------------------------------------------------------------

def test_h_matches_term_derivatives(weibull3):
    x = np.linspace(0.5, 5.0, 41)
    expected = 3.0 * x ** 2 - 2.0 / x
    np.testing.assert_allclose(weibull3.h(x), expected, rtol=1e-12)
    np.testing.assert_allclose(weibull3.h_prime(x), 6.0 * x + 2.0 / x ** 2, rtol=1e-12)


def test_psi_inverts_h(weibull25):
    x = np.linspace(1.0, 40.0, 25)
    u = weibull25.h(x)
    np.testing.assert_allclose(psi(weibull25, u), x, rtol=1e-9)


def test_psi_closed_form_double_exp(dexp):
    u = np.geomspace(1.0, 1e5, 20)
    np.testing.assert_allclose(psi(dexp, u), 1.0 + np.log(u), rtol=1e-9)


@given(st.floats(min_value=1.05, max_value=60.0))
def test_psi_round_trip_property(x):
    d = weibull(2.0)
    u = float(d.h(x))
    assert psi(d, u) == pytest.approx(x, rel=1e-8)


def test_psi_function_derivatives(weibull2):
    pf = PsiFunction(weibull2)
    u = np.linspace(4.0, 50.0, 12)
    # psi' = 1/h'(psi)
    np.testing.assert_allclose(pf.prime(u), 1.0 / weibull2.h_prime(psi(weibull2, u)),
                               rtol=1e-8)
    du = 1e-4 * u
    fd = (pf(u + du) - pf(u - du)) / (2.0 * du)
    np.testing.assert_allclose(pf.prime(u), fd, rtol=1e-6)
    fd2 = (pf.prime(u + du) - pf.prime(u - du)) / (2.0 * du)
    np.testing.assert_allclose(pf.second(u), fd2, rtol=1e-5)


def test_psi_below_range_raises(weibull2):
    lo = float(weibull2.h(weibull2.x_min_regular))
    with pytest.raises(OutOfRange):
        psi(weibull2, lo - 0.5)


# --- class diagnostics -------------------------------------------------------

def test_class_epsilon_weibull_closed_form(weibull3):
    # h = k x^{k-1} - (k-1)/x, beta = k-1:
    # eps(x) = x h'/h - beta = k(k-1)/(k x^k - (k-1))
    k = 3.0
    x = np.linspace(1.0, 30.0, 50)
    expected = k * (k - 1.0) / (k * x ** k - (k - 1.0))
    np.testing.assert_allclose(class_epsilon(weibull3, x), expected, rtol=1e-10)


def test_class_epsilon_infinity_closed_form(dexp):
    # psi = 1 + log u, so the slow-variation index is 1/(1 + log u)
    u = np.geomspace(10.0, 1e6, 8)
    eps = class_epsilon(dexp, u)
    np.testing.assert_allclose(eps, 1.0 / (1.0 + np.log(u)), rtol=1e-7)
    assert np.all(np.diff(np.abs(eps)) < 0.0)


def test_verify_class_passes_builtins(weibull2, weibull3, dexp):
    for d, grid in ((weibull2, np.geomspace(2.0, 200.0, 24)),
                    (weibull3, np.geomspace(2.0, 200.0, 24)),
                    (dexp, np.geomspace(5.0, 5e4, 24))):
        report = verify_class(d, grid)
        assert report.passed, [c.name for c in report.checks if not c.passed]


def test_verify_class_flags_linear_exponent():
    # g(x) = x is not superlinear; the class checks must flag it
    d = density_from_terms((PowerTerm(1.0, 1.0),), class_tag=ClassTag("beta", beta=0.0))
    report = verify_class(d, np.geomspace(2.0, 500.0, 24))
    assert not report.passed
    assert report.flagged_violations >= 1


def test_verify_class_flags_oversized_perturbation():
    # decays too slowly: the admissible envelope is 1/sqrt(x h(x)) ~ x^{-1}
    d = weibull(2.0, q=lambda x: 0.3 * (1.0 + x) ** -0.25)
    report = verify_class(d, np.geomspace(2.0, 200.0, 24))
    assert not report.passed
    bad = {c.name for c in report.checks if not c.passed}
    assert "perturbation_bound" in bad


# --- validation ---------------------------------------------------------------

def test_weibull_requires_k_above_one():
    for k in (1.0, 0.5, -2.0):
        with pytest.raises(ValidationError):
            weibull(k)


def test_log_pdf_rejects_negative_axis(weibull2):
    with pytest.raises(DomainError):
        weibull2.log_pdf(np.array([0.5, -0.1]))


def test_class_tag_validation():
    with pytest.raises(ValidationError):
        ClassTag("gamma")
    with pytest.raises(ValidationError):
        ClassTag("beta", beta=-1.0)


def test_exp_term_requires_positive_rate():
    with pytest.raises(ValidationError):
        ExpTerm(1.0, -0.5)


def test_empty_terms_rejected():
    with pytest.raises(ValidationError):
        density_from_terms((), class_tag=ClassTag("infinity"))


def test_version_string():
    assert exdev.__version__ == "0.1.0"
