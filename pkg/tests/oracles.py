"""Independent reference computations used by the tests.

None of these call into noisestab; they use brute-force grids, bisection or
mpmath at elevated precision.
"""
import math

import mpmath as mp
import numpy as np


def trapezoid_cdf(x, n=400_001, lower=-40.0):
    """Phi(x) by a dense composite trapezoid rule on [lower, x] with the
    first Euler-Maclaurin end correction (phi' = -x phi)."""
    t = np.linspace(lower, x, n)
    y = np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    h = (x - lower) / (n - 1)
    dy = -t * y
    return float(h * (math.fsum(y) - 0.5 * (y[0] + y[-1])) - h * h / 12.0 * (dy[-1] - dy[0]))


def bisection_quantile(p, iters=200):
    lo, hi = -40.0, 40.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mp.ncdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mp_gauss_integral(f, a, b, dps=30):
    """int_a^b f(x) phi(x) dx in mpmath."""
    with mp.workdps(dps):
        g = lambda x: f(x) * mp.npdf(x)
        return float(mp.quad(g, [mp.mpf(a), mp.mpf(b)] if math.isfinite(a) and math.isfinite(b)
                             else [a if math.isfinite(a) else -mp.inf,
                                   b if math.isfinite(b) else mp.inf]))


def mp_bvn_lower(h, k, rho, dps=30):
    """P(X <= h, Y <= k), correlation rho, by a 1D mpmath integral."""
    with mp.workdps(dps):
        s = mp.sqrt(1 - mp.mpf(rho) ** 2)
        f = lambda x: mp.npdf(x) * mp.ncdf((mp.mpf(k) - rho * x) / s)
        lim = h if math.isfinite(h) else mp.inf
        if h == -math.inf:
            return 0.0
        return float(mp.quad(f, [-mp.inf, 0, lim] if lim != mp.inf and lim > 0 else [-mp.inf, lim]))


def tensor_quadrant(rho, n=300, lower=-12.0):
    """P(X <= 0, Y <= 0) by a dense Gauss-Legendre tensor grid on [lower, 0]^2."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (0.0 - lower)
    nodes = half * x + 0.5 * lower
    weights = half * w
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    det = 1.0 - rho * rho
    dens = np.exp(-(X * X - 2 * rho * X * Y + Y * Y) / (2 * det)) / (2 * math.pi * math.sqrt(det))
    return float(weights @ dens @ weights)


def mp_stability(intervals, rho, dps=25):
    """S_rho(A) = int over A of P(rho x + sqrt(1-rho^2) Z in A) dgamma, in mpmath."""
    with mp.workdps(dps):
        s = mp.sqrt(1 - mp.mpf(rho) ** 2)

        def hit(x):
            tot = mp.mpf(0)
            for lo, hi in intervals:
                a = -mp.inf if lo == -math.inf else (mp.mpf(lo) - rho * x) / s
                b = mp.inf if hi == math.inf else (mp.mpf(hi) - rho * x) / s
                tot += mp.ncdf(b) - mp.ncdf(a)
            return tot

        total = mp.mpf(0)
        for lo, hi in intervals:
            a = -mp.inf if lo == -math.inf else mp.mpf(lo)
            b = mp.inf if hi == math.inf else mp.mpf(hi)
            total += mp.quad(lambda x: hit(x) * mp.npdf(x), [a, b])
        return float(total)


def finite_eps_perimeter(intervals, eps):
    """gamma(A_eps minus A) / eps with A_eps the eps-neighbourhood (mpmath)."""
    with mp.workdps(40):
        grown = 0
        for lo, hi in intervals:
            grown += mp.ncdf(hi + eps) - mp.ncdf(lo - eps) - (mp.ncdf(hi) - mp.ncdf(lo))
        return grown / eps
