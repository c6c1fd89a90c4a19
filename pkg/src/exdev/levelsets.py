"""Scalar-constraint tilting in product ambient spaces: laws of f(X) for a
small catalog of f, the tilted law e^{t f(x)} p(x)/phi_f(t), a random-walk
Metropolis sampler for it, and level-set / concentration experiments.

Everything reduces to scalar machinery: for each supported (f, ambient)
pairing the law of Z = f(X) is rebuilt as a one-dimensional light-tailed
density (possibly iid-summed over coordinates), so the tilt parameter comes
from the same m(t) = a inversion used on the line.  No multivariate cumulant
work is done anywhere.

The signed square-root marginal is the even density |x| q(x^2) on R whose
square has law q; with f(x) = sum x_j^2 this is the setting where the tilted
coordinates pile up near +-sqrt(a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .densities import (ClassTag, LightTailDensity, LogTerm, PowerTerm,
                        density_from_terms)
from .errors import DomainError, NotSolvable, PushforwardUnsolvable
from .tilting import cumulants, invert_m
from .conditional import DLPWindow, epsilon_schedule

__all__ = [
    "Marginal1D", "AmbientLaw", "FSpec", "FTiltedLaw", "PushforwardModel",
    "LevelSetResult", "SquareConcentrationReport", "signed_sqrt_marginal",
    "positive_marginal", "product_ambient", "f_catalog", "pushforward_model",
    "f_tilted_density", "mh_sample", "level_set_sampler",
    "square_concentration_check",
]


# ---------------------------------------------------------------------------
# ambient laws

@dataclass(frozen=True, eq=False)
class Marginal1D:
    """One coordinate's law: the base density on R+, or its signed square
    root |x| q(x^2) on R (even, normalized for free)."""

    kind: str  # "positive" | "signed_sqrt"
    base: LightTailDensity

    def __post_init__(self):
        if self.kind not in ("positive", "signed_sqrt"):
            raise DomainError(f"unknown marginal kind {self.kind!r}")

    @property
    def even(self) -> bool:
        return self.kind == "signed_sqrt"

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "positive":
            return self.base.log_pdf(x)
        ax = np.abs(x)
        with np.errstate(divide="ignore"):
            out = np.log(ax) + self.base.log_pdf(ax * ax)
        return out

    def pdf(self, x):
        return np.exp(self.log_pdf(x))


def positive_marginal(base: LightTailDensity) -> Marginal1D:
    return Marginal1D("positive", base)


def signed_sqrt_marginal(base: LightTailDensity) -> Marginal1D:
    return Marginal1D("signed_sqrt", base)


@dataclass(frozen=True, eq=False)
class AmbientLaw:
    """Product of iid-or-not one-dimensional marginals."""

    marginals: tuple

    @property
    def dim(self) -> int:
        return len(self.marginals)

    @property
    def all_even(self) -> bool:
        return all(m.even for m in self.marginals)

    @property
    def iid(self) -> bool:
        return all(m is self.marginals[0] for m in self.marginals)

    def log_pdf(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(points.shape[0])
        for j, marg in enumerate(self.marginals):
            out += marg.log_pdf(points[:, j])
        return out


def product_ambient(marginal: Marginal1D, dim: int) -> AmbientLaw:
    if dim < 1:
        raise DomainError("ambient dimension must be >= 1")
    return AmbientLaw(marginals=(marginal,) * dim)


# ---------------------------------------------------------------------------
# constraint catalog

@dataclass(frozen=True)
class FSpec:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]  # (N, dim) -> (N,)
    coefs: Optional[np.ndarray] = None      # linear only


def f_catalog(name: str, dim: int,
              coefs: Optional[Sequence[float]] = None) -> FSpec:
    """identity | sumsq | norm2 | linear (linear takes positive coefs,
    default all ones)."""
    if name == "identity":
        if dim != 1:
            raise DomainError("identity constraint is one-dimensional")
        return FSpec("identity", lambda pts: pts[:, 0])
    if name == "sumsq":
        return FSpec("sumsq", lambda pts: (pts * pts).sum(axis=1))
    if name == "norm2":
        return FSpec("norm2", lambda pts: np.sqrt((pts * pts).sum(axis=1)))
    if name == "linear":
        c = np.ones(dim) if coefs is None else np.asarray(coefs, dtype=float)
        if c.shape != (dim,) or np.any(c <= 0.0):
            raise DomainError("linear constraint needs dim positive coefs")
        return FSpec("linear", lambda pts, c=c: pts @ c, coefs=c)
    raise DomainError(f"unknown constraint {name!r}")


# ---------------------------------------------------------------------------
# pushforward of the ambient law through f, reduced to scalar densities

def _square_law(base: LightTailDensity) -> LightTailDensity:
    """Law of Y^2 when Y ~ base, via term surgery on the exponent."""
    if base.terms is None or base.q is not None:
        raise PushforwardUnsolvable(
            "square law needs an explicit power/log term representation")
    terms = []
    log_coef = 0.5  # from the 1/(2 sqrt(z)) Jacobian
    for t in base.terms:
        if isinstance(t, PowerTerm):
            terms.append(PowerTerm(t.coef, t.exponent / 2.0))
        elif isinstance(t, LogTerm):
            log_coef += 0.5 * t.coef
        else:
            raise PushforwardUnsolvable(
                "square law undefined for exponential exponent terms")
    if not terms or max(t.exponent for t in terms) <= 1.0:
        raise PushforwardUnsolvable(
            "squared law is not light-tailed: leading exponent <= 1")
    if log_coef:
        terms.append(LogTerm(log_coef))
    beta = max(t.exponent for t in terms if isinstance(t, PowerTerm)) - 1.0
    return density_from_terms(terms, class_tag=ClassTag("beta", beta),
                              name=f"square_of_{base.name}")


def _sqrt_law(base: LightTailDensity) -> LightTailDensity:
    """Law of sqrt(Y) when Y ~ base: density 2 z p(z^2)."""
    if base.terms is None or base.q is not None:
        raise PushforwardUnsolvable(
            "sqrt law needs an explicit power/log term representation")
    terms = []
    log_coef = -1.0  # from the 2 z Jacobian
    for t in base.terms:
        if isinstance(t, PowerTerm):
            terms.append(PowerTerm(t.coef, 2.0 * t.exponent))
        elif isinstance(t, LogTerm):
            log_coef += 2.0 * t.coef
        else:
            raise PushforwardUnsolvable(
                "sqrt law undefined for exponential exponent terms")
    if not terms:
        raise PushforwardUnsolvable("sqrt law lost every power term")
    if log_coef:
        terms.append(LogTerm(log_coef))
    beta = max(t.exponent for t in terms if isinstance(t, PowerTerm)) - 1.0
    return density_from_terms(terms, class_tag=ClassTag("beta", beta),
                              name=f"sqrt_of_{base.name}")


@dataclass(frozen=True, eq=False)
class PushforwardModel:
    """Scalar reduction of the law of f(X): Z = sum of `mult` iid copies of
    `scalar`, or a positive combination with per-coordinate coefs."""

    scalar: LightTailDensity
    mult: int = 1
    coefs: Optional[np.ndarray] = None

    def log_phi(self, t: float) -> float:
        if self.coefs is None:
            return self.mult * cumulants(self.scalar, t).log_phi
        return sum(cumulants(self.scalar, float(c * t)).log_phi
                   for c in self.coefs)

    def m(self, t: float) -> float:
        if self.coefs is None:
            return self.mult * cumulants(self.scalar, t).m
        return sum(float(c) * cumulants(self.scalar, float(c * t)).m
                   for c in self.coefs)

    def s2(self, t: float) -> float:
        if self.coefs is None:
            return self.mult * cumulants(self.scalar, t).s2
        return sum(float(c) ** 2 * cumulants(self.scalar, float(c * t)).s2
                   for c in self.coefs)

    def solve(self, a: float) -> float:
        """t with m(t) = a."""
        if self.coefs is None:
            return invert_m(self.scalar, a / self.mult).t
        if a <= self.m(0.0):
            raise NotSolvable("target below the unconstrained mean")
        scale = float(self.coefs.sum())
        t0 = invert_m(self.scalar, a / scale).t / float(self.coefs.max())
        lo, hi = 0.0, max(t0, 1e-6)
        for _ in range(200):
            if self.m(hi) >= a:
                break
            lo, hi = hi, hi * 2.0
        else:
            raise NotSolvable("no bracket for the combination tilt")
        t = 0.5 * (lo + hi)
        for _ in range(100):
            mv = self.m(t)
            if mv > a:
                hi = t
            else:
                lo = t
            step = t + (a - mv) / max(self.s2(t), 1e-300)
            t = step if lo < step < hi else 0.5 * (lo + hi)
            if abs(mv - a) <= 1e-12 * (abs(a) + 1.0):
                return t
        if abs(self.m(t) - a) <= 1e-9 * (abs(a) + 1.0):
            return t
        raise NotSolvable("combination tilt did not converge")


def pushforward_model(ambient: AmbientLaw, f: FSpec) -> PushforwardModel:
    """Scalar model of the law of f(X) under the ambient product law.

    Supported pairings and their reductions:
      identity on one positive coordinate  -> the base law itself;
      sumsq over signed-sqrt coordinates   -> sum of iid base laws;
      sumsq over positive coordinates      -> sum of iid squared laws;
      norm2 on one coordinate              -> sqrt law (signed-sqrt: base on
                                              |x|, i.e. sqrt of base);
      linear over positive coordinates     -> coef-weighted combination.
    Anything else raises PushforwardUnsolvable.
    """
    if not ambient.iid:
        raise PushforwardUnsolvable("only iid product ambients are reduced")
    marg = ambient.marginals[0]
    d = ambient.dim
    if f.name == "identity":
        if marg.kind != "positive":
            raise PushforwardUnsolvable(
                "identity on a signed marginal has a two-sided law")
        return PushforwardModel(scalar=marg.base, mult=1)
    if f.name == "sumsq":
        if marg.kind == "signed_sqrt":
            return PushforwardModel(scalar=marg.base, mult=d)
        return PushforwardModel(scalar=_square_law(marg.base), mult=d)
    if f.name == "norm2":
        if d != 1:
            raise PushforwardUnsolvable(
                "norm2 reduces to one dimension only; use sumsq and take "
                "square roots downstream")
        if marg.kind == "signed_sqrt":
            return PushforwardModel(scalar=_sqrt_law(marg.base), mult=1)
        # norm of one positive coordinate is the coordinate itself
        return PushforwardModel(scalar=marg.base, mult=1)
    if f.name == "linear":
        if marg.kind != "positive":
            raise PushforwardUnsolvable(
                "linear combinations of signed marginals are two-sided")
        coefs = f.coefs if f.coefs is not None else np.ones(d)
        if np.all(coefs == coefs[0]):
            scaled = marg.base if coefs[0] == 1.0 else None
            if scaled is not None:
                return PushforwardModel(scalar=scaled, mult=d)
        return PushforwardModel(scalar=marg.base, coefs=coefs)
    raise PushforwardUnsolvable(f"no reduction for constraint {f.name!r}")


# ---------------------------------------------------------------------------
# the f-tilted law and its sampler

@dataclass(frozen=True, eq=False)
class FTiltedLaw:
    """x -> e^{t f(x)} p(x) / phi_f(t), with m_f(t) = a."""

    ambient: AmbientLaw
    f: FSpec
    a: float
    t: float
    log_phi_f: float
    model: PushforwardModel

    @property
    def s2_f(self) -> float:
        return self.model.s2(self.t)

    def log_density(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return (self.t * self.f.fn(points) + self.ambient.log_pdf(points)
                - self.log_phi_f)


def f_tilted_density(ambient, f, a: float) -> FTiltedLaw:
    """Tilt the ambient law so that the mean of f(X) equals a.

    ambient may be an AmbientLaw or a bare LightTailDensity (wrapped as a
    one-dimensional positive marginal); f may be an FSpec or a catalog name.
    """
    if isinstance(ambient, LightTailDensity):
        ambient = product_ambient(positive_marginal(ambient), 1)
    if isinstance(f, str):
        f = f_catalog(f, ambient.dim)
    model = pushforward_model(ambient, f)
    try:
        t = model.solve(a)
    except NotSolvable as exc:
        raise PushforwardUnsolvable(f"tilt level unreachable: {exc}") from exc
    return FTiltedLaw(ambient=ambient, f=f, a=a, t=t,
                      log_phi_f=model.log_phi(t), model=model)


def _init_state(law: FTiltedLaw, chains: int,
                rng: np.random.Generator) -> np.ndarray:
    """Start on (or near) the level set {f = a}, split evenly over axes."""
    d = law.ambient.dim
    a = law.a
    if law.f.name == "identity":
        base = np.full((chains, 1), a)
    elif law.f.name == "sumsq":
        base = np.full((chains, d), math.sqrt(a / d))
    elif law.f.name == "norm2":
        base = np.full((chains, d), a / math.sqrt(d))
    else:
        c = law.f.coefs
        base = np.tile(a * c / (c @ c), (chains, 1))
    if law.ambient.all_even:
        signs = rng.integers(0, 2, size=base.shape) * 2 - 1
        base = base * signs
    return base


def mh_sample(law: FTiltedLaw, count: int, seed: int = 0, chains: int = 256,
              burn: int = 2000, thin: int = 5, sign_flip_prob: float = 0.2):
    """Random-walk Metropolis draws from the f-tilted law.

    Step size adapts toward 0.234 acceptance during burn-in.  For even
    product marginals a coordinate sign-flip move is mixed in, which hops
    between the mirrored modes without touching the radial profile.
    Returns (points (count, dim), f_values, acceptance_rate).
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    d = law.ambient.dim
    x = _init_state(law, chains, rng)
    lp = law.log_density(x)
    scale = 0.5 * math.sqrt(law.s2_f) / (1.0 + math.sqrt(abs(law.a)))
    scale = max(scale, 1e-3)
    even = law.ambient.all_even
    accepted = 0
    proposed = 0
    keep = []
    needed = max(1, math.ceil(count / chains))
    total = burn + needed * thin
    for step in range(total):
        if even and rng.random() < sign_flip_prob:
            j = int(rng.integers(d))
            prop = x.copy()
            prop[:, j] = -prop[:, j]
        else:
            prop = x + scale * rng.standard_normal(x.shape)
        lp_prop = law.log_density(prop)
        logu = np.log(rng.random(chains))
        acc = logu < (lp_prop - lp)
        x[acc] = prop[acc]
        lp[acc] = lp_prop[acc]
        accepted += int(acc.sum())
        proposed += chains
        if step < burn and (step + 1) % 50 == 0:
            rate = accepted / proposed
            scale *= math.exp(1.0 * (rate - 0.234))
            scale = min(max(scale, 1e-6), 1e3)
            accepted = 0
            proposed = 0
        if step >= burn and (step - burn + 1) % thin == 0:
            keep.append(x.copy())
    pts = np.concatenate(keep, axis=0)[:count]
    fv = law.f.fn(pts)
    rate = accepted / max(proposed, 1)
    return pts, fv, rate


# ---------------------------------------------------------------------------
# level-set experiment

@dataclass(frozen=True, eq=False)
class LevelSetResult:
    points: np.ndarray
    f_values: np.ndarray
    hit_fraction: float
    window: Optional[DLPWindow]
    t: float
    acceptance: float


def level_set_sampler(ambient, f, a: float, count: int, seed: int = 0,
                      window: Optional[DLPWindow] = None,
                      chains: int = 256) -> LevelSetResult:
    """Stochastic level-set approximation: draws from the f-tilted law and
    the fraction landing inside the localization window around a.

    The default window comes from epsilon_schedule on the pushforward class
    (tail index = leading exponent of the reduced scalar law), with the
    ambient dimension standing in for n.
    """
    law = f_tilted_density(ambient, f, a)
    if window is None and a > math.e:
        tag = law.model.scalar.class_tag
        if tag is not None and tag.kind == "beta":
            k_push = tag.beta + 1.0
            n_proxy = max(2, law.ambient.dim)
            window = epsilon_schedule(k_push, n_proxy, a)
    pts, fv, rate = mh_sample(law, count, seed=seed, chains=chains)
    if window is not None:
        lo, hi = window.window
        hit = float(np.mean((fv > lo) & (fv < hi)))
    else:
        hit = float("nan")
    return LevelSetResult(points=pts, f_values=fv, hit_fraction=hit,
                          window=window, t=law.t, acceptance=rate)


# ---------------------------------------------------------------------------
# plus/minus sqrt(a) concentration

@dataclass(frozen=True, eq=False)
class SquareConcentrationReport:
    a: np.ndarray
    spread: np.ndarray          # std of |x| - sqrt(a)
    predicted: np.ndarray       # s_Y(t) / (2 sqrt(a))
    sign_balance: np.ndarray    # fraction of positive-coordinate draws
    t: np.ndarray

    @property
    def spread_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.spread) < 0.0))


def square_concentration_check(base: LightTailDensity, a_list,
                               count: int = 60000, seed: int = 0,
                               chains: int = 256) -> SquareConcentrationReport:
    """Tilt f(x) = x^2 on the signed-sqrt ambient of `base` at each level.

    |X| should pile up at sqrt(a) with spread ~ s_Y(t)/(2 sqrt(a)), and the
    signs should stay balanced (the even sampler hops modes freely).
    """
    a_arr = np.atleast_1d(np.asarray(a_list, dtype=float))
    ambient = product_ambient(signed_sqrt_marginal(base), 1)
    spreads, preds, balances, ts = [], [], [], []
    for i, a in enumerate(a_arr):
        law = f_tilted_density(ambient, "sumsq", float(a))
        pts, fv, _ = mh_sample(law, count, seed=seed + 977 * i, chains=chains)
        dev = np.abs(pts[:, 0]) - math.sqrt(a)
        spreads.append(float(dev.std()))
        preds.append(math.sqrt(law.s2_f) / (2.0 * math.sqrt(a)))
        balances.append(float(np.mean(pts[:, 0] > 0.0)))
        ts.append(law.t)
    return SquareConcentrationReport(a=a_arr, spread=np.array(spreads),
                                     predicted=np.array(preds),
                                     sign_balance=np.array(balances),
                                     t=np.array(ts))
