"""Oracle helpers shared across test modules, independent of library quadrature."""

import numpy as np


def simpson_integral(fn, lo, hi, points=200_001):
    """Composite Simpson rule on a uniform grid."""
    if points % 2 == 0:
        points += 1
    x = np.linspace(lo, hi, points)
    y = fn(x)
    h = (hi - lo) / (points - 1)
    w = np.ones(points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(h / 3.0 * np.sum(w * y))


def golden_max(fn, lo, hi, tol=1e-12, max_iter=300):
    """Golden-section maximizer on [lo, hi]; derivative-free."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a < tol * (1.0 + abs(a) + abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    xm = 0.5 * (a + b)
    return xm, fn(xm)


def ks_statistic(sample, cdf):
    """Two-sided Kolmogorov-Smirnov distance of a sample against a cdf callable."""
    s = np.sort(np.asarray(sample, dtype=float))
    n = s.size
    f = cdf(s)
    up = np.max(np.arange(1, n + 1) / n - f)
    down = np.max(f - np.arange(0, n) / n)
    return float(max(up, down))
