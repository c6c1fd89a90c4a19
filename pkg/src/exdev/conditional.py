"""Exact conditional Monte Carlo for the point constraint (sum = n a) and the
exceedance constraint (sum >= n a), plus the empirical checks built on them:
marginal total variation against the tilted law, local density ratios,
democratic localization, the tilted location law, and exceedance/point
equivalence.

Point constraint: a pairwise-Gibbs chain on the simplex slice
{x in R_+^n : sum x = n a}.  Each step picks a pair (i, j), holds c = x_i +
x_j fixed, and redraws x_i from the exact conditional density proportional to
p(u) p(c - u) on (0, c) by inverse CDF on a fixed relative grid v = u/c.  The
grid nests extra resolution around v = 1/2 because the conditional is always
symmetric about c/2 and concentrates there once the tilt is strong.  All
chains advance in lockstep (one shared pair schedule, independent heat-bath
draws), which turns every update into a handful of vectorized passes over a
(chains x grid) matrix.

Exceedance constraint: iid blocks from the a-tilted product law, accepted
when the block sum clears n a, reweighted by exp(-t (sum - n a)) to undo the
tilt on the overshoot.  Weights lie in (0, 1], so the effective sample size
is reported rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .densities import LightTailDensity, LogTerm, PowerTerm
from .errors import (DomainError, InfeasibleStart, LowAcceptance,
                     MassTooSmall, ScheduleInfeasible, TooFewSamples)
from .quadrature import log_integral
from .tilting import tilt_to_mean
from .tails import sampler_tilted

__all__ = [
    "ConditionDescriptor", "ConditionalSample", "TVEstimate", "DLPWindow",
    "DLPEstimate", "SecondOrderReference", "GibbsLocalReport",
    "LocationLawReport", "EquivalenceRow", "EquivalenceReport",
    "sample_point_conditional", "sample_exceedance_conditional",
    "marginal_tv", "gibbs_local_check", "second_order_reference",
    "epsilon_schedule", "dlp_check", "location_law_check",
    "exceedance_vs_point_equivalence",
]


# ---------------------------------------------------------------------------
# descriptors and sample container

@dataclass(frozen=True)
class ConditionDescriptor:
    """What we condition on: S_n = n a (point) or S_n >= n a (exceedance)."""

    kind: str
    n: int
    a_n: float

    def __post_init__(self):
        if self.kind not in ("point", "exceedance"):
            raise DomainError(f"unknown condition kind {self.kind!r}")
        if self.n < 2:
            raise DomainError("conditioning needs n >= 2")
        if not (math.isfinite(self.a_n) and self.a_n > 0.0):
            raise DomainError("a_n must be positive and finite")

    @property
    def level(self) -> float:
        return self.n * self.a_n


@dataclass(frozen=True, eq=False)
class ConditionalSample:
    """Retained conditional draws plus the diagnostics the checks need.

    coords holds the leading coordinates of each retained state (point case:
    one row per chain per retained time).  For the point sampler, pooled
    optionally carries every coordinate of every retained state grouped by
    chain, shape (chains, retained*n); exchangeability makes all coordinates
    share the first-coordinate marginal, so pooling buys sample size for
    histogram work while chain grouping keeps an honest bootstrap unit.
    """

    descriptor: Optional[ConditionDescriptor]
    coords: np.ndarray
    sums: np.ndarray
    weights: Optional[np.ndarray] = None
    pooled: Optional[np.ndarray] = None
    mins: Optional[np.ndarray] = None
    maxs: Optional[np.ndarray] = None
    acceptance: Optional[float] = None
    ess: float = 0.0
    residual: float = 0.0
    seed: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def first_coordinate(self) -> np.ndarray:
        return self.coords[:, 0]

    def tv_blocks(self):
        """(values grouped by resampling unit, per-unit weights or None)."""
        if self.pooled is not None:
            return self.pooled, None
        if self.weights is not None:
            return self.coords[:, :1], self.weights
        return self.coords[:, :1], None

    @classmethod
    def from_values(cls, values, descriptor=None, weights=None, seed=0):
        """Wrap externally drawn values (e.g. iid reference draws) so they
        can ride through marginal_tv."""
        values = np.asarray(values, dtype=float).reshape(-1, 1)
        w = None if weights is None else np.asarray(weights, dtype=float)
        ess = float(values.shape[0]) if w is None else float(
            w.sum() ** 2 / (w ** 2).sum())
        return cls(descriptor=descriptor, coords=values,
                   sums=values[:, 0].copy(), weights=w, ess=ess, seed=seed)


# ---------------------------------------------------------------------------
# pairwise-Gibbs point-conditional sampler

# relative grid on (0,1) for the pair conditional; symmetric, refined at 1/2
def _pair_grid() -> np.ndarray:
    outer = np.linspace(1e-9, 1.0 - 1e-9, 97)
    mid = 0.5 + 0.15 * np.linspace(-1.0, 1.0, 161)
    inner = 0.5 + 0.03 * np.linspace(-1.0, 1.0, 129)
    return np.unique(np.concatenate([outer, mid, inner]))


_V_GRID = _pair_grid()
_V_DIFF = np.diff(_V_GRID)


class _PairKernel:
    """Per-density precomputation for the pair heat-bath exponent.

    Separable path: when g is a sum of pure power and log terms with no
    perturbation, g(c v) + g(c (1-v)) splits into per-term products of a
    c-profile and a fixed v-profile, so each step is one outer product per
    term instead of a full exponent evaluation on the (chains x grid) matrix.
    """

    def __init__(self, d: LightTailDensity):
        self.d = d
        v = _V_GRID
        self.v = v
        separable = d.q is None and d.terms is not None and all(
            isinstance(t, (PowerTerm, LogTerm)) for t in d.terms)
        self.separable = separable
        if separable:
            self.powers = [(t.coef, t.exponent,
                            v ** t.exponent + (1.0 - v) ** t.exponent)
                           for t in d.terms if isinstance(t, PowerTerm)]
            log_coef = sum(t.coef for t in d.terms if isinstance(t, LogTerm))
            self.log_coef = log_coef
            self.log_profile = np.log(v) + np.log1p(-v)

    def log_density(self, c: np.ndarray) -> np.ndarray:
        """(chains x grid) log of the pair conditional, up to row constants."""
        if self.separable:
            W = np.zeros((c.size, self.v.size))
            for coef, p, prof in self.powers:
                W -= np.multiply.outer(coef * c ** p, prof)
            if self.log_coef:
                W -= self.log_coef * self.log_profile
            return W
        u = np.multiply.outer(c, self.v)
        return self.d.exponent(u) + self.d.exponent(c[:, None] - u)


def _heat_bath_draw(kernel: _PairKernel, c: np.ndarray,
                    rng: np.random.Generator) -> np.ndarray:
    """Draw u ~ p(u) p(c-u) on (0, c) for every chain at once."""
    W = kernel.log_density(c)
    W -= W.max(axis=1, keepdims=True)
    F = np.exp(W)
    seg = 0.5 * (F[:, 1:] + F[:, :-1]) * _V_DIFF
    cum = np.cumsum(seg, axis=1)
    total = cum[:, -1]
    target = rng.random(c.size) * total
    idx = np.minimum((cum < target[:, None]).sum(axis=1), seg.shape[1] - 1)
    left = np.where(idx > 0,
                    np.take_along_axis(cum, np.maximum(idx - 1, 0)[:, None],
                                       axis=1)[:, 0], 0.0)
    into = target - left
    rows = np.arange(c.size)
    f0 = F[rows, idx]
    f1 = F[rows, idx + 1]
    dv = _V_DIFF[idx]
    # invert the quadratic CDF piece of the trapezoid: 0.5 df tau^2 + f0 tau = into/dv
    df = f1 - f0
    lin = into / np.maximum(f0 * dv, 1e-300)
    disc = f0 * f0 + 2.0 * df * into / np.maximum(dv, 1e-300)
    quad = (np.sqrt(np.maximum(disc, 0.0)) - f0) / np.where(df == 0.0, 1.0, df)
    tau = np.where(np.abs(df) < 1e-12 * np.maximum(f0, f1), lin, quad)
    tau = np.clip(tau, 0.0, 1.0)
    v_star = _V_GRID[idx] + dv * tau
    return c * v_star


def sample_point_conditional(d: LightTailDensity, cond: ConditionDescriptor,
                             chains: int = 256, steps: Optional[int] = None,
                             burn_in: Optional[int] = None,
                             stride: Optional[int] = None, seed: int = 0,
                             pool_all: bool = False,
                             keep_coords: int = 1) -> ConditionalSample:
    """Pairwise-Gibbs draws from the law of (X_1..X_n) given sum = n a_n.

    Counts are in pair-steps (one step updates one pair in every chain).
    Defaults: burn-in of 1000 n pair updates, retained states one sweep (n
    steps) apart, 40 retained states.  Every chain starts at the constant
    configuration x_i = a_n, which satisfies the constraint exactly; pair
    moves preserve it to float rounding.
    """
    if cond.kind != "point":
        raise DomainError("point sampler needs a point descriptor")
    n, a = cond.n, cond.a_n
    if not (0.0 < a < float("inf")):
        raise InfeasibleStart("a_n must sit inside the support")
    if d.log_pdf(a) == -math.inf:
        raise InfeasibleStart("density vanishes at the starting level a_n")
    if stride is None:
        stride = n
    if steps is None:
        steps = 40 * stride
    if burn_in is None:
        burn_in = 1000 * n
    if chains < 1 or steps < stride:
        raise DomainError("need at least one chain and one retained state")

    kernel = _PairKernel(d)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    x = np.full((chains, n), float(a))
    keep = max(1, min(keep_coords, n))
    level = n * a

    coords = []
    sums = []
    pooled = [] if pool_all else None
    for step in range(burn_in + steps):
        i = int(rng.integers(n))
        j = (i + 1 + int(rng.integers(n - 1))) % n
        c = x[:, i] + x[:, j]
        u = _heat_bath_draw(kernel, c, rng)
        x[:, i] = u
        x[:, j] = c - u
        k = step - burn_in + 1
        if k > 0 and k % stride == 0:
            coords.append(x[:, :keep].copy())
            sums.append(x.sum(axis=1))
            if pooled is not None:
                pooled.append(x.copy())

    coords_arr = np.concatenate(coords, axis=0)
    sums_arr = np.concatenate(sums)
    residual = float(np.max(np.abs(sums_arr - level)) / level)
    pooled_arr = None
    if pooled is not None:
        # (retained, chains, n) -> (chains, retained*n): chain = bootstrap unit
        stack = np.stack(pooled, axis=0)
        pooled_arr = np.ascontiguousarray(
            stack.transpose(1, 0, 2).reshape(chains, -1))
    return ConditionalSample(
        descriptor=cond, coords=coords_arr, sums=sums_arr,
        pooled=pooled_arr, ess=float(coords_arr.shape[0]),
        residual=residual, seed=seed,
        meta={"chains": chains, "steps": steps, "burn_in": burn_in,
              "stride": stride, "retained_states": len(coords)})


# ---------------------------------------------------------------------------
# exceedance sampler

def sample_exceedance_conditional(d: LightTailDensity,
                                  cond: ConditionDescriptor, count: int,
                                  seed: int = 0, keep_coords: int = 1,
                                  block_rows: int = 65536,
                                  max_proposals: int = 400_000_000
                                  ) -> ConditionalSample:
    """Weighted iid draws from the law of (X_1..X_n) given sum >= n a_n.

    Proposes iid rows from the a_n-tilted product law, keeps rows whose sum
    clears the level, and weights each kept row by exp(-t (sum - level)).
    Acceptance should sit near 1/2 (the tilted sum is centered exactly at
    the boundary); below 1e-4 the tilt is wrong or the budget hopeless and
    LowAcceptance is raised.  Stores per-row min and max so window checks
    over all coordinates need no full states.
    """
    if cond.kind != "exceedance":
        raise DomainError("exceedance sampler needs an exceedance descriptor")
    n, a = cond.n, cond.a_n
    td = tilt_to_mean(d, a)
    table = sampler_tilted(td)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    level = n * a
    keep = max(1, min(keep_coords, n))

    got = 0
    proposed = 0
    parts_c, parts_s, parts_mn, parts_mx = [], [], [], []
    rows = max(1024, min(block_rows, 4 * count))
    while got < count:
        if proposed > max_proposals:
            raise LowAcceptance(
                f"still {count - got} rows short after {proposed} proposals")
        block = table.sample(rows * n, rng).reshape(rows, n)
        s = block.sum(axis=1)
        hit = s >= level
        proposed += rows
        if hit.any():
            kept = block[hit]
            parts_c.append(kept[:, :keep].copy())
            parts_s.append(s[hit])
            parts_mn.append(kept.min(axis=1))
            parts_mx.append(kept.max(axis=1))
            got += int(hit.sum())
        if proposed >= 200_000 and got / proposed < 1e-4:
            raise LowAcceptance(
                f"acceptance {got / proposed:.2e} after {proposed} proposals")

    coords = np.concatenate(parts_c, axis=0)[:count]
    sums = np.concatenate(parts_s)[:count]
    mins = np.concatenate(parts_mn)[:count]
    maxs = np.concatenate(parts_mx)[:count]
    w = np.exp(-td.t * (sums - level))
    ess = float(w.sum() ** 2 / (w ** 2).sum())
    return ConditionalSample(
        descriptor=cond, coords=coords, sums=sums, weights=w, mins=mins,
        maxs=maxs, acceptance=got / proposed, ess=ess, seed=seed,
        meta={"t": td.t, "proposals": proposed, "requested": count})


# ---------------------------------------------------------------------------
# marginal total variation

@dataclass(frozen=True)
class TVEstimate:
    tv: float
    ci_low: float
    ci_high: float
    bins: int
    sample_size: int

    def __post_init__(self):
        if not (0.0 <= self.ci_low <= self.tv <= self.ci_high <= 1.0):
            raise DomainError("TV interval must satisfy 0<=lo<=tv<=hi<=1")


def _fd_bin_count(values: np.ndarray, lo: float, hi: float) -> int:
    q75, q25 = np.percentile(values, [75.0, 25.0])
    iqr = q75 - q25
    if iqr <= 0.0:
        return 10
    width = 2.0 * iqr / values.size ** (1.0 / 3.0)
    bins = int(np.ceil((hi - lo) / width)) if width > 0 else 400
    return int(min(400, max(10, bins)))


def _reference_bin_masses(pdf: Callable, edges: np.ndarray) -> np.ndarray:
    """Composite Simpson (8 panels per bin) of pdf over each bin."""
    nb = edges.size - 1
    sub = np.linspace(0.0, 1.0, 9)
    pts = edges[:-1, None] + np.diff(edges)[:, None] * sub[None, :]
    vals = np.asarray(pdf(pts.ravel()), dtype=float).reshape(nb, 9)
    h = np.diff(edges) / 8.0
    w = np.array([1, 4, 2, 4, 2, 4, 2, 4, 1], dtype=float) / 3.0
    return (vals * w[None, :]).sum(axis=1) * h


def marginal_tv(sample: ConditionalSample, reference, bins: Optional[int] = None,
                bootstrap: int = 200, seed: int = 7) -> TVEstimate:
    """Total variation between the sample's coordinate marginal and a
    reference law with a vectorized .pdf (tilted density or the second-order
    reference).

    Binned estimate: Freedman-Diaconis width capped to [10, 400] bins,
    reference bin masses by per-bin Simpson quadrature; reference mass
    falling outside the binned range counts in full.  The interval is a
    percentile bootstrap over resampling units (chains for pooled Gibbs
    output, rows for weighted iid output), clamped to bracket the point
    estimate.
    """
    ref_pdf = reference.pdf if hasattr(reference, "pdf") else reference
    blocks, weights = sample.tv_blocks()
    flat = blocks.ravel()
    if flat.size < 1000:
        raise TooFewSamples(f"{flat.size} draws < 1000")
    lo_q, hi_q = np.percentile(flat, [0.01, 99.99])
    pad = 0.05 * (hi_q - lo_q) + 1e-12
    lo, hi = max(0.0, lo_q - pad), hi_q + pad
    nb = bins if bins is not None else _fd_bin_count(flat, lo, hi)
    edges = np.linspace(lo, hi, nb + 1)
    ref_mass = _reference_bin_masses(ref_pdf, edges)
    ref_out = max(0.0, 1.0 - ref_mass.sum())

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    if weights is None and blocks.shape[1] == 1:
        # iid scalar draws: bootstrap = multinomial resample of the histogram
        counts, _ = np.histogram(blocks[:, 0], bins=edges)
        size = flat.size
        out_count = size - counts.sum()
        probs = np.append(counts, out_count) / size

        def tv_of(cnt, outc, total):
            emp = cnt / total
            return 0.5 * (np.abs(emp - ref_mass).sum()
                          + outc / total + ref_out)

        tv = tv_of(counts, out_count, size)
        draws = np.empty(bootstrap)
        for b in range(bootstrap):
            resampled = rng.multinomial(size, probs)
            draws[b] = tv_of(resampled[:nb], resampled[nb], size)
    elif weights is None:
        # pooled Gibbs output: one histogram per chain, bootstrap over chains
        units = blocks.shape[0]
        per_unit = np.empty((units, nb))
        out_unit = np.empty(units)
        for r in range(units):
            per_unit[r], _ = np.histogram(blocks[r], bins=edges)
            out_unit[r] = blocks[r].size - per_unit[r].sum()
        totals = per_unit.sum(axis=0)
        emp_out = out_unit.sum()
        size = flat.size

        def tv_of(counts, out_count, total):
            emp = counts / total
            return 0.5 * (np.abs(emp - ref_mass).sum()
                          + out_count / total + ref_out)

        tv = tv_of(totals, emp_out, size)
        draws = np.empty(bootstrap)
        for b in range(bootstrap):
            pick = rng.integers(0, units, units)
            cnt = per_unit[pick].sum(axis=0)
            outc = out_unit[pick].sum()
            draws[b] = tv_of(cnt, outc, cnt.sum() + outc)
    else:
        vals = blocks[:, 0]
        size = vals.size
        idx = np.searchsorted(edges, vals, side="right") - 1
        inside = (idx >= 0) & (idx < nb)
        bin_of = np.where(inside, idx, nb)  # overflow bucket nb

        def tv_w(sel_bins, sel_w):
            tot = sel_w.sum()
            hist = np.bincount(sel_bins, weights=sel_w, minlength=nb + 1)
            emp = hist[:nb] / tot
            emp_out = hist[nb] / tot
            return 0.5 * (np.abs(emp - ref_mass).sum() + emp_out + ref_out)

        tv = tv_w(bin_of, weights)
        draws = np.empty(bootstrap)
        for b in range(bootstrap):
            pick = rng.integers(0, size, size)
            draws[b] = tv_w(bin_of[pick], weights[pick])

    lo_ci, hi_ci = np.percentile(draws, [2.5, 97.5])
    return TVEstimate(tv=float(tv), ci_low=float(min(lo_ci, tv)),
                      ci_high=float(min(max(hi_ci, tv), 1.0)), bins=nb,
                      sample_size=int(flat.size))


# ---------------------------------------------------------------------------
# local Gibbs ratio

@dataclass(frozen=True, eq=False)
class GibbsLocalReport:
    y: np.ndarray
    ratio: np.ndarray
    band_low: np.ndarray
    band_high: np.ndarray
    kde: np.ndarray
    reference: np.ndarray
    bandwidth: float
    sample_size: int


def gibbs_local_check(d: LightTailDensity, cond: ConditionDescriptor,
                      y_grid, sample: Optional[ConditionalSample] = None,
                      chains: int = 256, steps: Optional[int] = None,
                      burn_in: Optional[int] = None, seed: int = 0,
                      max_kde_points: int = 400_000) -> GibbsLocalReport:
    """KDE of the point-conditional first-coordinate marginal divided by the
    tilted density on y_grid, with rough normal-approximation bands.

    Bands use an effective sample size of one fifth of the pooled count to
    absorb within-state correlation; they are diagnostics, not tests.
    """
    y = np.atleast_1d(np.asarray(y_grid, dtype=float))
    td = tilt_to_mean(d, cond.a_n)
    if sample is None:
        sample = sample_point_conditional(d, cond, chains=chains, steps=steps,
                                          burn_in=burn_in, seed=seed,
                                          pool_all=True)
    blocks, _ = sample.tv_blocks()
    vals = blocks.ravel()
    if vals.size > max_kde_points:
        stride = vals.size // max_kde_points + 1
        vals = vals[::stride]
    m = vals.size
    sd = vals.std()
    q75, q25 = np.percentile(vals, [75.0, 25.0])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    bw = 0.9 * spread * m ** (-0.2)
    if bw <= 0.0:
        raise DomainError("degenerate sample: zero bandwidth")
    z = (y[:, None] - vals[None, :]) / bw
    kde = np.exp(-0.5 * z * z).sum(axis=1) / (m * bw * math.sqrt(2 * math.pi))
    ref = td.pdf(y)
    n_eff = m / 5.0
    kde_se = np.sqrt(np.maximum(kde, 1e-300) / (2.0 * math.sqrt(math.pi)
                                                * n_eff * bw))
    ratio = kde / ref
    return GibbsLocalReport(y=y, ratio=ratio,
                            band_low=(kde - 1.96 * kde_se) / ref,
                            band_high=(kde + 1.96 * kde_se) / ref,
                            kde=kde, reference=ref, bandwidth=float(bw),
                            sample_size=m)


# ---------------------------------------------------------------------------
# second-order reference density

@dataclass(frozen=True, eq=False)
class SecondOrderReference:
    """y -> C pi_t(y) N(a_n, s^2(t)(n-1))(y), normalized by quadrature.

    Exact factorization of the point-conditional marginal: p(y) rho_{n-1}(n a - y)
    / rho_n(n a) with the leave-one-out sum written through its tilted CLT is
    pi_t(y) times a Gaussian in (y - a_n) of variance s^2 (n-1), up to
    normalization.  The Gaussian factor flattens at rate 1/(n-1) on the tilted
    bulk, which is what drives reference -> tilted as n grows.
    """

    density: LightTailDensity
    n: int
    a_n: float
    t: float
    log_phi: float
    sigma2: float
    log_norm: float  # log of the unnormalized integral

    @property
    def log_C(self) -> float:
        return -self.log_norm

    def log_pdf(self, y):
        y = np.asarray(y, dtype=float)
        gauss = -0.5 * (y - self.a_n) ** 2 / self.sigma2 \
            - 0.5 * math.log(2.0 * math.pi * self.sigma2)
        tilted = self.t * y + self.density.log_pdf(y) - self.log_phi
        return tilted + gauss - self.log_norm

    def pdf(self, y):
        out = np.exp(self.log_pdf(y))
        return out[()] if np.ndim(y) == 0 else out


def second_order_reference(d: LightTailDensity, n: int,
                           a_n: float) -> SecondOrderReference:
    """Gaussian-corrected marginal reference: C pi_t(y) N(a_n, s^2(t_n)(n-1))."""
    if n < 2:
        raise DomainError("second-order reference needs n >= 2")
    td = tilt_to_mean(d, a_n)
    sigma2 = td.s2 * (n - 1)
    log_phi = td.log_phi

    def L(y):
        y = np.asarray(y, dtype=float)
        return (td.t * y + d.exponent(y) + d.log_c - log_phi
                - 0.5 * (y - a_n) ** 2 / sigma2
                - 0.5 * math.log(2.0 * math.pi * sigma2))

    def Lp(y):
        return td.t - d.h(y) - (y - a_n) / sigma2

    # Lp decreases (h increasing plus the linear pull); peak sits near a_n
    lo = 1e-12
    hi = a_n + 2.0 * sigma2 * (td.t + 1.0)
    if Lp(lo) <= 0.0:
        peak = lo
    elif Lp(hi) >= 0.0:
        peak = hi
    else:
        peak = brentq(Lp, lo, hi, xtol=1e-14, rtol=8.9e-16)
    log_z = log_integral(L, x_peak=float(peak), lo=0.0)
    return SecondOrderReference(density=d, n=n, a_n=a_n, t=td.t,
                                log_phi=log_phi, sigma2=sigma2, log_norm=log_z)


# ---------------------------------------------------------------------------
# democratic localization

@dataclass(frozen=True)
class DLPWindow:
    """Window (a_n - eps_n, a_n + eps_n) for the all-coordinates check.

    criterion_value is n log(a_n) / (a_n^(k-2) eps_n^2); the schedule keeps
    it at n^(-0.2) by construction.  feasible records whether the window is
    narrower than the level itself; an infeasible window still defines a
    valid (if weak) event.
    """

    epsilon_n: float
    window: tuple
    criterion_value: float
    k: float
    n: int
    a_n: float
    feasible: bool


def epsilon_schedule(k: float, n: int, a_n: float,
                     strict: bool = False) -> DLPWindow:
    """eps_n = n^0.1 sqrt(n log a_n / a_n^(k-2)).

    The n^0.1 slack forces the localization criterion value to n^(-0.2) -> 0
    for every (k, a_n).  When eps_n >= a_n the window swallows the whole
    lower range; that is flagged (feasible=False) and raises
    ScheduleInfeasible only in strict mode.
    """
    if k <= 1.0:
        raise DomainError("schedule defined for tail index k > 1")
    if a_n <= math.e:
        raise DomainError("schedule needs a_n > e so log a_n > 1")
    if n < 2:
        raise DomainError("schedule needs n >= 2")
    core = n * math.log(a_n) / a_n ** (k - 2.0)
    eps = n ** 0.1 * math.sqrt(core)
    crit = core / eps ** 2
    feasible = eps / a_n < 1.0
    if strict and not feasible:
        raise ScheduleInfeasible(
            f"eps_n/a_n = {eps / a_n:.3g} >= 1 at n={n}, k={k:g}")
    return DLPWindow(epsilon_n=eps, window=(a_n - eps, a_n + eps),
                     criterion_value=crit, k=k, n=n, a_n=a_n,
                     feasible=feasible)


@dataclass(frozen=True)
class DLPEstimate:
    estimate: float
    se: float
    window: DLPWindow
    sample_size: int
    ess: float
    precondition_value: float


def dlp_check(d: LightTailDensity, cond: ConditionDescriptor,
              window: DLPWindow, count: int = 20000, seed: int = 0,
              delta: float = 0.1,
              sample: Optional[ConditionalSample] = None) -> DLPEstimate:
    """Weighted probability that every coordinate of an exceedance-conditional
    state lies inside the window.

    Precondition proxy: log g(a_n) / log n must exceed delta, which keeps the
    level genuinely extreme relative to n.
    """
    g_an = d.g(cond.a_n)
    if g_an <= 0.0 or math.log(g_an) / math.log(cond.n) <= delta:
        raise DomainError(
            "level not extreme enough: log g(a_n)/log n <= delta")
    if sample is None:
        sample = sample_exceedance_conditional(d, cond, count, seed=seed)
    if sample.mins is None or sample.maxs is None:
        raise DomainError("need an exceedance sample with min/max tracking")
    lo, hi = window.window
    ind = ((sample.mins > lo) & (sample.maxs < hi)).astype(float)
    w = sample.weights
    wn = w / w.sum()
    est = float(np.dot(wn, ind))
    se = float(np.sqrt(np.sum(wn ** 2 * (ind - est) ** 2)))
    return DLPEstimate(estimate=est, se=se, window=window,
                       sample_size=int(ind.size), ess=sample.ess,
                       precondition_value=float(math.log(g_an)
                                                / math.log(cond.n)))


# ---------------------------------------------------------------------------
# tilted location law

@dataclass(frozen=True, eq=False)
class LocationLawReport:
    a: np.ndarray
    t: np.ndarray
    s: np.ndarray
    ks: np.ndarray
    draws: int

    @property
    def ks_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.ks) < 0.0))

    @property
    def s_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.s) < 0.0))


def location_law_check(d: LightTailDensity, a_grid,
                       draws: int = 200_000, seed: int = 0) -> LocationLawReport:
    """KS distance between the standardized tilted law (X - a)/s and the
    standard normal, for each level in a_grid."""
    a_grid = np.atleast_1d(np.asarray(a_grid, dtype=float))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    ts, ss, kss = [], [], []
    for a in a_grid:
        td = tilt_to_mean(d, float(a))
        table = sampler_tilted(td)
        x = np.sort(table.sample(draws, rng))
        z = (x - a) / td.s
        ecdf_hi = np.arange(1, draws + 1) / draws
        cdf = norm.cdf(z)
        ks = float(max(np.max(ecdf_hi - cdf), np.max(cdf - (ecdf_hi - 1.0 / draws))))
        ts.append(td.t)
        ss.append(td.s)
        kss.append(ks)
    return LocationLawReport(a=a_grid, t=np.array(ts), s=np.array(ss),
                             ks=np.array(kss), draws=draws)


# ---------------------------------------------------------------------------
# exceedance vs point equivalence

@dataclass(frozen=True)
class EquivalenceRow:
    lo: float
    hi: float
    p_exceedance: float
    se: float
    ref_mass: float
    ratio: float
    ratio_low: float
    ratio_high: float


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    n: int
    a_n: float
    rows: tuple
    ess: float
    acceptance: float


def exceedance_vs_point_equivalence(d: LightTailDensity, n: int, a_n: float,
                                    B: Sequence, count: int = 40000,
                                    seed: int = 0) -> EquivalenceReport:
    """P(X_1 in B | S_n >= n a_n) against the tilted mass of B, per interval.

    Raises MassTooSmall when an interval's empirical exceedance mass has
    lower confidence bound under 0.01: ratios on starved sets say nothing.
    """
    cond = ConditionDescriptor("exceedance", n, a_n)
    sample = sample_exceedance_conditional(d, cond, count, seed=seed)
    td = tilt_to_mean(d, a_n)
    x1 = sample.coords[:, 0]
    w = sample.weights
    wn = w / w.sum()
    rows = []
    for (lo, hi) in B:
        if not lo < hi:
            raise DomainError("interval bounds must satisfy lo < hi")
        ind = ((x1 > lo) & (x1 < hi)).astype(float)
        p = float(np.dot(wn, ind))
        se = float(np.sqrt(np.sum(wn ** 2 * (ind - p) ** 2)))
        if p - 2.0 * se < 0.01:
            raise MassTooSmall(
                f"interval ({lo:g},{hi:g}): empirical mass {p:.4f} "
                f"(lower bound {p - 2 * se:.4f}) below 0.01")
        # subdivide so wide intervals resolve the tilted bump (width ~ s)
        panels = max(1, min(2000, int(math.ceil((hi - max(lo, 0.0))
                                                / (0.1 * td.s)))))
        edges = np.linspace(max(lo, 0.0), hi, panels + 1)
        ref = float(_reference_bin_masses(td.pdf, edges).sum())
        rows.append(EquivalenceRow(
            lo=lo, hi=hi, p_exceedance=p, se=se, ref_mass=ref,
            ratio=p / ref, ratio_low=(p - 2 * se) / ref,
            ratio_high=(p + 2 * se) / ref))
    return EquivalenceReport(n=n, a_n=a_n, rows=tuple(rows), ess=sample.ess,
                             acceptance=sample.acceptance)
