"""Scalar special functions of the standard Gaussian.

Every function accepts a float or a numpy array and returns the same shape
(a plain ``float`` for scalar input).  ``math.inf`` / ``-math.inf`` are the
infinity sentinels; they map to the exact limits.

    Phi(x)   = P(Z <= x)                 std_normal_cdf
    Psi(p)   = Phi^{-1}(p)               std_normal_quantile
    q(s)     = phi(Psi(s))               isoperimetric_profile
    xi(s)    = -Psi(s) q(s)              = int_{-inf}^{Psi(s)} (u^2 - 1) dgamma(u)
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import CorrelationOutOfRange, DegenerateProbability, DegreeTooLarge

NEG_INF = -math.inf
POS_INF = math.inf

SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI
TWO_PI = 2.0 * math.pi

HERMITE_MAX_DEGREE = 200


def _result(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def std_normal_cdf(x):
    """Phi(x); relative accuracy in the lower tail, exact 0/1 at -inf/+inf."""
    return _result(special.ndtr(np.asarray(x, dtype=float)))


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return _result(INV_SQRT_2PI * np.exp(-0.5 * x * x))


def _lower_quantile(p):
    # p <= 1/2: rational guess from Cephes ndtri, then one Halley step on Phi.
    x = special.ndtri(p)
    err = special.ndtr(x) - p
    with np.errstate(over="ignore", invalid="ignore"):
        u = err * SQRT_2PI * np.exp(0.5 * x * x)
        refined = x - u / (1.0 + 0.5 * x * u)
    return np.where(np.isfinite(refined), refined, x)


def std_normal_quantile(p):
    """Psi(p) = Phi^{-1}(p) for 0 < p < 1.

    The upper half is obtained by reflection, ``Psi(p) = -Psi(1 - p)``, which is
    exact because ``1 - p`` is representable for ``p >= 1/2``.
    """
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0.0)) or np.any(~(p < 1.0)):
        raise DegenerateProbability("quantile requires 0 < p < 1")
    upper = p > 0.5
    lo = np.where(upper, 1.0 - p, p)
    x = _lower_quantile(lo)
    return _result(np.where(upper, -x, x))


def isoperimetric_profile(s):
    """q(s) = phi(Psi(s)); q(0) = q(1) = 0 by continuity."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > 1.0) or np.any(np.isnan(s)):
        raise DegenerateProbability("profile requires 0 <= s <= 1")
    lo = np.minimum(s, 1.0 - s)
    inside = lo > 0.0
    safe = np.where(inside, lo, 0.5)
    # folding onto s <= 1/2 makes q(s) = q(1 - s) hold bitwise
    val = std_normal_pdf(_lower_quantile(safe))
    return _result(np.where(inside, val, 0.0))


def _open_unit(s):
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0.0)) or np.any(~(s < 1.0)):
        raise DegenerateProbability("argument must lie in the open interval (0, 1)")
    return s


def profile_derivative(s):
    """q'(s) = -Psi(s)."""
    s = _open_unit(s)
    return _result(-np.asarray(std_normal_quantile(s)))


def profile_second_derivative(s):
    """q''(s) = -sqrt(2 pi) exp(Psi(s)^2 / 2) = -1 / q(s)."""
    s = _open_unit(s)
    psi = np.asarray(std_normal_quantile(s))
    with np.errstate(over="ignore"):
        return _result(-SQRT_2PI * np.exp(0.5 * psi * psi))


def xi(s):
    """xi(s) = int_{-inf}^{Psi(s)} (u^2 - 1) dgamma(u) = -Psi(s) q(s)."""
    s = _open_unit(s)
    psi = np.asarray(std_normal_quantile(s))
    return _result(-psi * std_normal_pdf(psi))


# --- bivariate normal -------------------------------------------------------

_GL6 = (
    np.array([0.1713244923791705, 0.3607615730481384, 0.4679139345726904]),
    np.array([0.9324695142031522, 0.6612093864662647, 0.2386191860831970]),
)
_GL12 = (
    np.array([0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
              0.2031674267230659, 0.2334925365383547, 0.2491470458134029]),
    np.array([0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
              0.5873179542866171, 0.3678314989981802, 0.1252334085114692]),
)
_GL20 = (
    np.array([0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
              0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
              0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
              0.1527533871307259]),
    np.array([0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
              0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
              0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
              0.07652652113349733]),
)


def _gl_nodes(r):
    if abs(r) < 0.3:
        w, x = _GL6
    elif abs(r) < 0.75:
        w, x = _GL12
    else:
        w, x = _GL20
    return np.concatenate([w, w]), np.concatenate([1.0 - x, 1.0 + x])


def _bvnu_finite(h, k, r):
    """Genz's BVNU for finite h, k arrays and scalar r, |r| < 1."""
    ndtr = special.ndtr
    w, x = _gl_nodes(r)
    hk = h * k
    if abs(r) < 0.925:
        hs = 0.5 * (h * h + k * k)
        asr = 0.5 * math.asin(r)
        sn = np.sin(asr * x)
        expo = (sn * hk[..., None] - hs[..., None]) / (1.0 - sn * sn)
        bvn = np.exp(expo) @ w
        return bvn * asr / TWO_PI + ndtr(-h) * ndtr(-k)

    if r < 0:
        k = -k
        hk = -hk
    a_s = 1.0 - r * r
    a = math.sqrt(a_s)
    bs = (h - k) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 80.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        asr = -0.5 * (bs / a_s + hk)
        bvn = np.where(asr > -100.0,
                       a * np.exp(asr) * (1.0 - c * (bs - a_s) * (1.0 - d * bs) / 3.0 + c * d * a_s * a_s),
                       0.0)
        b = np.sqrt(bs)
        sp = SQRT_2PI * ndtr(-b / a)
        tail = np.exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0)
        bvn = np.where(hk > -100.0, bvn - np.where(hk > -100.0, tail, 0.0), bvn)
        a2 = 0.5 * a
        xs = (a2 * x) ** 2
        asr = -0.5 * (bs[..., None] / xs + hk[..., None])
        keep = asr > -100.0
        sp = 1.0 + c[..., None] * xs * (1.0 + 5.0 * d[..., None] * xs)
        rs = np.sqrt(1.0 - xs)
        ep = np.exp(-(hk[..., None] / 2.0) * xs / (1.0 + rs) ** 2) / rs
        terms = np.where(keep, np.exp(np.where(keep, asr, 0.0)) * (sp - ep), 0.0)
    bvn = (a2 * (terms @ w) - bvn) / TWO_PI
    if r > 0:
        return bvn + ndtr(-np.maximum(h, k))
    band = np.where(h < 0, ndtr(k) - ndtr(h), ndtr(-h) - ndtr(-k))
    return np.where(h >= k, -bvn, band - bvn)


def bvn_upper(h, k, rho):
    """P(U >= h, V >= k) for a standard bivariate normal pair with correlation rho."""
    if not abs(rho) < 1.0:
        raise CorrelationOutOfRange(f"|rho| must be < 1, got {rho}")
    h, k = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(k, dtype=float))
    h_fin = np.where(np.isfinite(h), h, 0.0)
    k_fin = np.where(np.isfinite(k), k, 0.0)
    if rho == 0.0:
        out = special.ndtr(-h_fin) * special.ndtr(-k_fin)
    else:
        out = _bvnu_finite(h_fin, k_fin, float(rho))
    out = np.where(np.isneginf(h) & np.isfinite(k), special.ndtr(-k_fin), out)
    out = np.where(np.isneginf(k) & np.isfinite(h), special.ndtr(-h_fin), out)
    out = np.where(np.isneginf(h) & np.isneginf(k), 1.0, out)
    out = np.where(np.isposinf(h) | np.isposinf(k), 0.0, out)
    return _result(np.clip(out, 0.0, 1.0))


def bvn_rectangle(x_lo, x_hi, y_lo, y_hi, rho):
    """P(x_lo <= U <= x_hi, y_lo <= V <= y_hi), corr(U, V) = rho; broadcasts."""
    if not abs(rho) < 1.0:
        raise CorrelationOutOfRange(f"|rho| must be < 1, got {rho}")
    x_lo, x_hi, y_lo, y_hi = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (x_lo, x_hi, y_lo, y_hi)))
    if np.any(x_lo > x_hi) or np.any(y_lo > y_hi):
        raise ValueError("rectangle bounds must satisfy lo <= hi")
    h = np.stack([x_lo, x_hi, x_lo, x_hi])
    k = np.stack([y_lo, y_lo, y_hi, y_hi])
    u = np.asarray(bvn_upper(h, k, rho))
    val = (u[0] - u[1]) - (u[2] - u[3])
    return _result(np.clip(val, 0.0, 1.0))


# --- Hermite polynomials ----------------------------------------------------

def _check_degree(degree):
    if degree < 0 or int(degree) != degree:
        raise ValueError("degree must be a nonnegative integer")
    if degree > HERMITE_MAX_DEGREE:
        raise DegreeTooLarge(f"degree {degree} exceeds guard {HERMITE_MAX_DEGREE}")


def hermite_eval(degree, x):
    """Probabilists' He_degree(x) by He_{l+1} = x He_l - l He_{l-1}."""
    _check_degree(degree)
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if degree == 0:
        return _result(prev)
    for ell in range(1, degree):
        prev, cur = cur, x * cur - ell * prev
    return _result(cur)


def hermite_eval_normalized(degree, x):
    """He_degree(x) / sqrt(degree!), evaluated by the orthonormal recurrence."""
    _check_degree(degree)
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if degree == 0:
        return _result(prev)
    for ell in range(1, degree):
        prev, cur = cur, (x * cur - math.sqrt(ell) * prev) / math.sqrt(ell + 1)
    return _result(cur)


def hermite_weighted_table(max_degree, x):
    """Rows l = 0..max_degree of (He_l(x) / sqrt(l!)) * phi(x).

    The weight is folded into the recurrence so nothing overflows for large
    |x|; at +-inf every entry is 0.
    """
    _check_degree(max_degree)
    x = np.asarray(x, dtype=float)
    fin = np.isfinite(x)
    xf = np.where(fin, x, 0.0)
    out = np.empty((max_degree + 1,) + x.shape)
    out[0] = np.where(fin, INV_SQRT_2PI * np.exp(-0.5 * xf * xf), 0.0)
    if max_degree >= 1:
        out[1] = xf * out[0]
    for ell in range(1, max_degree):
        out[ell + 1] = (xf * out[ell] - math.sqrt(ell) * out[ell - 1]) / math.sqrt(ell + 1)
    return out
