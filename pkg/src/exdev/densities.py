"""Light-tailed densities on the half line.

A density here is p(x) = c * exp(-(g(x) - q(x))) for x >= 0, with g smooth,
superlinear (g(x)/x -> infinity) and eventually convex, and q a bounded
perturbation (|q(v)| <= 1/sqrt(x*h(x)) for v near x, h = g').  Two regularity
classes are supported and checked numerically:

  * Beta(beta):  h(x) = x^beta * l(x) with l slowly varying;
  * Infinity:    h grows faster than any power; the inverse psi = h^{-1} is
                 slowly varying with index-0 representation.

Construction is factory-based: the normalizer c is always computed by
peak-centered quadrature, never taken on trust, so closed-form cases double
as accuracy anchors for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import quadrature
from .errors import (
    DomainError,
    NonMonotone,
    OutOfRange,
    ValidationError,
)

__all__ = [
    "ClassTag", "GTerm", "PowerTerm", "LogTerm", "ExpTerm",
    "LightTailDensity", "PsiFunction", "ClassCheck", "ClassReport",
    "make_density", "density_from_terms", "weibull", "double_exp",
    "psi", "verify_class", "class_epsilon",
]


@dataclass(frozen=True)
class ClassTag:
    """Declared regularity class: kind 'beta' with an index, or 'infinity'."""

    kind: str
    beta: Optional[float] = None
    eta: float = 0.1  # exponent for the infinity-class lower-bound check

    def __post_init__(self) -> None:
        if self.kind not in ("beta", "infinity"):
            raise ValidationError(f"unknown class kind {self.kind!r}")
        if self.kind == "beta":
            if self.beta is None:
                raise ValidationError("beta class requires an index")
            if self.beta < 0.0:
                raise ValidationError("beta class index must be nonnegative")
        if not 0.0 < self.eta < 0.25:
            raise ValidationError("eta must lie in (0, 1/4)")


# ---------------------------------------------------------------------------
# exponent catalog: g as a sum of power, log and exponential terms


@dataclass(frozen=True)
class GTerm:
    def value(self, x): raise NotImplementedError
    def d1(self, x): raise NotImplementedError
    def d2(self, x): raise NotImplementedError
    def d3(self, x): raise NotImplementedError


@dataclass(frozen=True)
class PowerTerm(GTerm):
    """coef * x**exponent, exponent > 0."""

    coef: float
    exponent: float

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValidationError("power term needs a positive exponent")

    def value(self, x): return self.coef * x ** self.exponent
    def d1(self, x): return self.coef * self.exponent * x ** (self.exponent - 1.0)

    def d2(self, x):
        p = self.exponent
        return self.coef * p * (p - 1.0) * x ** (p - 2.0)

    def d3(self, x):
        p = self.exponent
        return self.coef * p * (p - 1.0) * (p - 2.0) * x ** (p - 3.0)


@dataclass(frozen=True)
class LogTerm(GTerm):
    """coef * log(x)."""

    coef: float

    def value(self, x):
        with np.errstate(divide="ignore"):
            return self.coef * np.log(x)

    def d1(self, x):
        with np.errstate(divide="ignore"):
            return self.coef / x

    def d2(self, x):
        with np.errstate(divide="ignore"):
            return -self.coef / x ** 2

    def d3(self, x):
        with np.errstate(divide="ignore"):
            return 2.0 * self.coef / x ** 3


@dataclass(frozen=True)
class ExpTerm(GTerm):
    """coef * exp(rate * x), coef > 0, rate > 0."""

    coef: float
    rate: float

    def __post_init__(self):
        if self.coef <= 0 or self.rate <= 0:
            raise ValidationError("exp term needs positive coef and rate")

    def value(self, x): return self.coef * np.exp(self.rate * x)
    def d1(self, x): return self.coef * self.rate * np.exp(self.rate * x)
    def d2(self, x): return self.coef * self.rate ** 2 * np.exp(self.rate * x)
    def d3(self, x): return self.coef * self.rate ** 3 * np.exp(self.rate * x)


def _sum_terms(terms: Sequence[GTerm], order: int):
    pick = {0: "value", 1: "d1", 2: "d2", 3: "d3"}[order]

    def f(x):
        x = np.asarray(x, dtype=float)
        out = getattr(terms[0], pick)(x)
        for t in terms[1:]:
            out = out + getattr(t, pick)(x)
        return out

    return f


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LightTailDensity:
    """Immutable density model; safe to share across threads.

    g, g_prime, g_second (and optionally g_third) are vectorized callables on
    x > 0.  log_c is the quadrature-computed log normalizer.  q, when present,
    is the bounded perturbation (checked by verify_class, not enforced here).
    """

    g: Callable
    g_prime: Callable
    g_second: Callable
    log_c: float
    class_tag: ClassTag
    q: Optional[Callable] = None
    g_third: Optional[Callable] = None
    x_min_regular: float = 1.0
    psi_seed: Optional[Callable] = None
    psi_closed: Optional[Callable] = None
    terms: Optional[tuple[GTerm, ...]] = None
    name: str = "custom"

    # h is the name the tilting layer uses for the exponent slope: h := g'
    def h(self, x):
        return self.g_prime(x)

    def h_prime(self, x):
        return self.g_second(x)

    def h_second(self, x):
        if self.g_third is None:
            return None
        return self.g_third(x)

    def exponent(self, x):
        """-(g(x) - q(x)), the log density without the normalizer."""
        val = -self.g(x)
        if self.q is not None:
            val = val + self.q(x)
        return val

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0):
            raise DomainError("density is supported on x >= 0")
        with np.errstate(invalid="ignore"):
            out = self.log_c + self.exponent(x)
        out = np.where(np.isnan(out), -np.inf, out)
        return out[()] if out.ndim == 0 else out

    def pdf(self, x):
        out = np.exp(self.log_pdf(x))
        return out

    def __repr__(self) -> str:  # keep reprs short in test output
        return f"LightTailDensity({self.name}, class={self.class_tag.kind})"


def make_density(g, g_prime, g_second, *, class_tag: ClassTag, q=None,
                 g_third=None, x_min_regular: float = 1.0, psi_seed=None,
                 psi_closed=None, terms=None, name: str = "custom",
                 ) -> LightTailDensity:
    """Build a density, computing the normalizer by quadrature."""

    def q_scalar(x: float) -> float:
        return float(q(x)) if q is not None else 0.0

    def L(x: float) -> float:
        v = -float(g(x)) + q_scalar(x)
        return v if math.isfinite(v) else -math.inf

    def h_scalar(x: float) -> float:
        return float(g_prime(x))

    peak = quadrature.exponent_peak(h_scalar, 0.0, max(x_min_regular, 1.0))
    log_mass = quadrature.log_integral(L, peak, lo=0.0)
    return LightTailDensity(
        g=g, g_prime=g_prime, g_second=g_second, log_c=-log_mass,
        class_tag=class_tag, q=q, g_third=g_third,
        x_min_regular=x_min_regular, psi_seed=psi_seed,
        psi_closed=psi_closed,
        terms=tuple(terms) if terms is not None else None, name=name)


def density_from_terms(terms: Sequence[GTerm], *, class_tag: ClassTag,
                       q=None, x_min_regular: float = 1.0, psi_seed=None,
                       psi_closed=None, name: str = "custom") -> LightTailDensity:
    terms = tuple(terms)
    if not terms:
        raise ValidationError("empty exponent catalog")
    return make_density(
        _sum_terms(terms, 0), _sum_terms(terms, 1), _sum_terms(terms, 2),
        class_tag=class_tag, q=q, g_third=_sum_terms(terms, 3),
        x_min_regular=x_min_regular, psi_seed=psi_seed,
        psi_closed=psi_closed, terms=terms, name=name)


def weibull(k: float, q=None) -> LightTailDensity:
    """p(x) = k x^(k-1) exp(-x^k): exponent g(x) = x^k - (k-1) log x.

    h(x) = k x^(k-1) - (k-1)/x is increasing on (0, inf) for k > 1, so the
    tilt equation h(x) = t has a root for every real t.  Class Beta(k-1).
    """
    if not k > 1.0:
        raise ValidationError("weibull shape must exceed 1")
    km1 = k - 1.0
    terms = (PowerTerm(1.0, k), LogTerm(-km1))

    def seed(u: float) -> float:
        return (max(u, 1e-300) / k) ** (1.0 / km1)

    return density_from_terms(
        terms, class_tag=ClassTag("beta", beta=km1), q=q,
        psi_seed=seed, name=f"weibull_k{k:g}")


def double_exp(q=None) -> LightTailDensity:
    """p(x) = c exp(-e^(x-1)): g = h = e^(x-1), rapidly varying class.

    The inverse of h is exact: psi(u) = 1 + log u for u >= h(0) = e^{-1}.
    """
    terms = (ExpTerm(math.exp(-1.0), 1.0),)

    def closed(u):
        return 1.0 + np.log(u)

    return density_from_terms(
        terms, class_tag=ClassTag("infinity"), q=q,
        psi_closed=closed, name="double_exp")


# ---------------------------------------------------------------------------
# inverse of h


def _psi_scalar(d: LightTailDensity, u: float, rel_tol: float) -> float:
    h = lambda x: float(d.g_prime(x))
    lo = d.x_min_regular
    h_lo = h(lo)
    if u < h_lo - abs(h_lo) * 1e-12 - 1e-300:
        raise OutOfRange(
            f"u={u!r} below h(x_min_regular)={h_lo!r}; psi is defined on the "
            "regular region only")
    if u <= h_lo:
        return lo

    if d.psi_seed is not None:
        hi = max(float(d.psi_seed(u)), lo * (1.0 + 1e-9))
    else:
        hi = 2.0 * lo
    prev = lo
    for _ in range(200):
        v = h(hi)
        if v >= u:
            break
        if v < h(prev) - abs(v) * 1e-9:
            raise NonMonotone("h decreased while expanding the psi bracket")
        prev = hi
        hi *= 2.0
        if hi > 1e15:
            raise NonMonotone("psi bracket expansion failed")
    else:
        raise NonMonotone("psi bracket expansion failed")
    root = brentq(lambda x: h(x) - u, prev, hi, xtol=1e-300, rtol=8.9e-16)
    root = float(root)
    if abs(h(root) - u) > rel_tol * max(abs(u), 1.0):
        raise NonMonotone("psi root did not meet the residual tolerance")
    return root


def psi(d: LightTailDensity, u, *, rel_tol: float = 1e-10):
    """Generalized inverse of h on the regular region: inf{x : h(x) >= u}.

    Uses the closed form when the density carries one, otherwise bracketed
    root finding seeded by the density's leading-order inverse.
    """
    u_arr = np.asarray(u, dtype=float)
    if d.psi_closed is not None:
        h0 = float(d.g_prime(d.x_min_regular * 1e-12))  # support edge value
        if np.any(u_arr < h0):
            raise OutOfRange("u below the range of h")
        out = np.asarray(d.psi_closed(u_arr), dtype=float)
        return out[()] if out.ndim == 0 else out
    out = np.empty(u_arr.shape, dtype=float)
    for idx, val in np.ndenumerate(u_arr):
        out[idx] = _psi_scalar(d, float(val), rel_tol)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class PsiFunction:
    """psi = h^{-1} with first and second derivatives.

    psi'(u) = 1/h'(psi(u)); psi''(u) = -h''(psi(u))/h'(psi(u))^3.  When the
    density has no analytic third derivative the second derivative falls back
    to a central difference of psi'.
    """

    density: LightTailDensity

    def __call__(self, u):
        return psi(self.density, u)

    def prime(self, u):
        x = psi(self.density, u)
        return 1.0 / np.asarray(self.density.g_second(x), dtype=float)[()]

    def second(self, u):
        d = self.density
        x = psi(d, u)
        if d.g_third is not None:
            h1 = np.asarray(d.g_second(x), dtype=float)
            h2 = np.asarray(d.g_third(x), dtype=float)
            out = -h2 / h1 ** 3
            return out[()] if out.ndim == 0 else out
        u_arr = np.asarray(u, dtype=float)
        step = np.maximum(1e-5 * np.abs(u_arr), 1e-8)
        return (self.prime(u_arr + step) - self.prime(u_arr - step)) / (2.0 * step)


# ---------------------------------------------------------------------------
# numerical class verification


@dataclass(frozen=True)
class ClassCheck:
    name: str
    passed: bool
    detail: dict


@dataclass(frozen=True)
class ClassReport:
    density: str
    kind: str
    checks: tuple[ClassCheck, ...]

    @property
    def flagged_violations(self) -> int:
        return sum(1 for c in self.checks if not c.passed)

    @property
    def passed(self) -> bool:
        return self.flagged_violations == 0


def class_epsilon(d: LightTailDensity, x):
    """Slow-variation rate of the class representation.

    Beta class: the index of l(x) = h(x) x^{-beta}, i.e.
    eps(x) = x l'(x)/l(x) = x h'(x)/h(x) - beta (analytic, no differencing).
    Infinity class: the index of l = psi, eps(u) = u psi'(u)/psi(u).
    """
    x = np.asarray(x, dtype=float)
    tag = d.class_tag
    if tag.kind == "beta":
        out = x * np.asarray(d.g_second(x), dtype=float) \
            / np.asarray(d.g_prime(x), dtype=float) - tag.beta
        return out[()] if out.ndim == 0 else out
    pf = PsiFunction(d)
    out = x * np.asarray(pf.prime(x), dtype=float) / np.asarray(pf(x), dtype=float)
    return out[()] if out.ndim == 0 else out


def _fd(f, x, rel_step: float):
    hstep = np.maximum(np.abs(x) * rel_step, 1e-12)
    return (f(x + hstep) - f(x - hstep)) / (2.0 * hstep)


def _fd2(f, x, rel_step: float):
    hstep = np.maximum(np.abs(x) * rel_step, 1e-12)
    return (f(x + hstep) - 2.0 * f(x) + f(x - hstep)) / hstep ** 2


def verify_class(d: LightTailDensity, grid, *, theta: float = 0.1,
                 fd_rel_step: float = 1e-5, deriv_bound: float = 100.0,
                 eps_floor: float = 0.01) -> ClassReport:
    """Numerical proxies for the declared regularity class; report-only.

    grid: increasing points inside the regular region.  For the beta class
    these are x values; for the infinity class they are arguments of psi (so
    they must sit above h(x_min_regular)).  Violations are flagged in the
    report, never raised.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 8:
        raise ValidationError("class verification needs a 1-d grid of >= 8 points")
    if np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be strictly increasing")

    checks: list[ClassCheck] = []

    # g-based checks live in x space; for the infinity class the grid holds
    # psi arguments, so map it back through psi first
    if d.class_tag.kind == "beta":
        x_grid = grid
    else:
        x_grid = np.asarray(psi(d, grid), dtype=float)

    # superlinearity: g(x)/x eventually increasing (checked on the top half)
    gx = np.asarray(d.g(x_grid), dtype=float)
    ratio = gx / x_grid
    top = ratio[x_grid.size // 2:]
    super_ok = bool(np.all(np.diff(top) > 0))
    checks.append(ClassCheck("superlinear_exponent", super_ok,
                             {"ratio_first": float(ratio[0]),
                              "ratio_last": float(ratio[-1])}))

    # eventual convexity of g on the grid
    conv = np.asarray(d.g_second(x_grid), dtype=float)
    checks.append(ClassCheck("convex_exponent", bool(np.all(conv > 0)),
                             {"min_g_second": float(conv.min())}))

    eps = lambda x: np.asarray(class_epsilon(d, x), dtype=float)
    e = eps(grid)
    e1 = _fd(eps, grid, fd_rel_step)
    e2 = _fd2(eps, grid, fd_rel_step)

    if d.class_tag.kind == "beta":
        v1 = np.abs(grid * e1)
        v2 = np.abs(grid ** 2 * e2)
        checks.append(ClassCheck(
            "slow_variation_eps_to_zero",
            bool(abs(e[-1]) <= abs(e[0]) + 1e-12 and abs(e[-1]) < 0.5),
            {"eps_first": float(e[0]), "eps_last": float(e[-1])}))
        checks.append(ClassCheck(
            "x_eps_prime_bounded", bool(np.all(np.isfinite(v1)) and v1.max() <= deriv_bound),
            {"max_x_eps_prime": float(v1.max())}))
        checks.append(ClassCheck(
            "x2_eps_second_bounded", bool(np.all(np.isfinite(v2)) and v2.max() <= deriv_bound),
            {"max_x2_eps_second": float(v2.max())}))
    else:
        pf = PsiFunction(d)
        l_vals = np.asarray(pf(grid), dtype=float)
        checks.append(ClassCheck(
            "psi_to_infinity", bool(l_vals[-1] > l_vals[0] and l_vals[-1] > 1.0),
            {"psi_first": float(l_vals[0]), "psi_last": float(l_vals[-1])}))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = grid * e1 / e
            r2 = grid ** 2 * e2 / e
        checks.append(ClassCheck(
            "index_ratio1_to_zero",
            bool(abs(r1[-1]) <= abs(r1[0]) + 1e-12 and abs(r1[-1]) < 0.5),
            {"first": float(r1[0]), "last": float(r1[-1])}))
        checks.append(ClassCheck(
            "index_ratio2_to_zero",
            bool(abs(r2[-1]) <= abs(r2[0]) + 1e-12 and abs(r2[-1]) < 0.5),
            {"first": float(r2[0]), "last": float(r2[-1])}))
        floor_vals = grid ** d.class_tag.eta * e
        checks.append(ClassCheck(
            "eps_power_lower_bound", bool(floor_vals.min() > eps_floor),
            {"min": float(floor_vals.min()), "eta": d.class_tag.eta}))

    if d.q is not None:
        worst = 0.0
        for x in x_grid:
            bound = 1.0 / math.sqrt(x * float(d.g_prime(x)))
            for v in np.linspace(x * (1.0 - theta) + 1e-12, x * (1.0 + theta), 7):
                worst = max(worst, abs(float(d.q(v))) / bound)
        checks.append(ClassCheck("perturbation_bound", worst <= 1.0 + 1e-9,
                                 {"worst_ratio": worst, "theta": theta}))

    return ClassReport(density=d.name, kind=d.class_tag.kind, checks=tuple(checks))
