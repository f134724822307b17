"""Noise stability and the deficit metrics of one-dimensional sets.

Correlated pair convention: ``U = sqrt(rho) X + sqrt(1-rho) Y`` and
``V = sqrt(rho) X + sqrt(1-rho) Y'`` have correlation ``rho``, so

    S_rho(A) = P(U in A, V in A) = int_A P_rho(1_A) dgamma,
    P_rho(f)(x) = E f(rho x + sqrt(1 - rho^2) Z).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Union

import numpy as np
from scipy import special

from .errors import BadExponent, CorrelationOutOfRange, DegenerateEpsilon, DegenerateMeasure
from .gaussian_core import bvn_rectangle, isoperimetric_profile, std_normal_pdf
from .interval_sets import (
    IntervalUnion,
    _as_union,
    difference,
    first_moment_magnitude,
    gaussian_measure,
    halfspace_round,
    oriented,
    surface_area,
    symmetric_difference,
)
from .quadrature import QuadratureConfig, integrate_gaussian, integrate_line

METHODS = ("bvn_sum", "quadrature", "spectral", "monte_carlo")
_ALIASES = {"bvn": "bvn_sum", "quad": "quadrature"}

_BVN_ABS_ERR = 1e-13


@dataclass(frozen=True)
class StabilityResult:
    value: float
    method: str
    error_estimate: float
    converged: bool = True

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class DeficitReport:
    rho: float
    gamma: float
    epsilon: float
    delta: float
    epsilon_tilde: float
    deficit: float
    lower_expr: float
    upper_expr: float
    lower_ratio: float
    upper_ratio: float
    upper_I: float
    hypothesis_ok: bool

    def to_dict(self):
        return asdict(self)


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 <= rho < 1.0:
        raise CorrelationOutOfRange(f"rho must satisfy 0 <= rho < 1, got {rho}")
    return rho


def _nondegenerate(A) -> float:
    g = gaussian_measure(A)
    if not 0.0 < g < 1.0:
        raise DegenerateMeasure(f"gaussian measure {g} is not in (0, 1)")
    return g


def _phi_diff(a, b):
    """Phi(b) - Phi(a) for a <= b, using upper tails when both are positive."""
    return np.where(a > 0, special.ndtr(-a) - special.ndtr(-b), special.ndtr(b) - special.ndtr(a))


def _hit_probability(A: IntervalUnion, center, scale):
    """sum_i Phi((hi_i - c)/scale) - Phi((lo_i - c)/scale), broadcast over c."""
    c = np.asarray(center, dtype=float)
    out = np.zeros_like(c)
    for lo, hi in A.intervals:
        out = out + _phi_diff((lo - c) / scale, (hi - c) / scale)
    return np.clip(out, 0.0, 1.0)


def ou_apply(A, rho: float, x):
    """P_rho(1_A)(x) in closed form; vectorized in x."""
    rho = _check_rho(rho)
    A = _as_union(A)
    r = _hit_probability(A, rho * np.asarray(x, dtype=float), math.sqrt(1.0 - rho * rho))
    return float(r) if np.ndim(r) == 0 else r


def _bvn_cross(A: IntervalUnion, B: IntervalUnion, rho: float) -> float:
    if A.is_empty or B.is_empty:
        return 0.0
    alo, ahi, blo, bhi = A.lows, A.highs, B.lows, B.highs
    vals = bvn_rectangle(alo[:, None], ahi[:, None], blo[None, :], bhi[None, :], rho)
    return math.fsum(np.ravel(vals))


def _normalize_method(method: str) -> str:
    method = _ALIASES.get(method, method)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    return method


def noise_stability(A, rho: float, method: str = "bvn_sum",
                    cfg: QuadratureConfig = QuadratureConfig(), **kw) -> StabilityResult:
    """S_rho(A) by rectangle sums, by quadrature of P_rho(A) over A, or spectrally."""
    rho = _check_rho(rho)
    A = _as_union(A)
    method = _normalize_method(method)
    if method == "bvn_sum":
        k = len(A)
        return StabilityResult(_bvn_cross(A, A, rho), method, 4 * k * k * _BVN_ABS_ERR)
    if method == "quadrature":
        res = integrate_gaussian(lambda x: ou_apply(A, rho, x), A, cfg)
        return StabilityResult(res.value, method, res.error_estimate, res.converged)
    if method == "spectral":
        from .spectral import spectral_stability

        return spectral_stability(A, rho, **kw)
    raise ValueError("monte_carlo stability lives in noisestab.sde_lab.mc_stability")


def cross_stability(A, B, rho: float, method: str = "bvn_sum",
                    cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """K_rho(A, B) = int 1_A P_rho(1_B) dgamma."""
    rho = _check_rho(rho)
    A, B = _as_union(A), _as_union(B)
    if _normalize_method(method) == "quadrature":
        return integrate_gaussian(lambda x: ou_apply(B, rho, x), A, cfg).value
    return _bvn_cross(A, B, rho)


def _conditional_hit(A: IntervalUnion, rho: float, x):
    """P(sqrt(rho) x + sqrt(1 - rho) Y in A)."""
    return _hit_probability(A, math.sqrt(rho) * x, math.sqrt(1.0 - rho))


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def _phi_callable(phi: Union[str, Callable], q=None) -> Callable:
    if callable(phi):
        return phi
    if phi == "xlogx":
        return _xlogx
    if phi == "power":
        if q is None or not q > 1:
            raise BadExponent("power(q) requires q > 1")
        return lambda p: np.power(p, q)
    raise ValueError(f"unknown phi {phi!r}")


def phi_stability(A, rho: float, phi: Union[str, Callable] = "xlogx", q=None,
                  cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """E[phi(P(U in A | X))] for phi = x log x, power(q) or a callable."""
    rho = _check_rho(rho)
    A = _as_union(A)
    fn = _phi_callable(phi, q)
    if rho == 0.0:
        return float(fn(np.array(gaussian_measure(A))))
    return integrate_line(lambda x: fn(_conditional_hit(A, rho, x)), cfg).value


def q_stability(A, rho: float, q: float,
                cfg: QuadratureConfig = QuadratureConfig()) -> StabilityResult:
    """S^q_rho(A) = E[P(U in A | X)^q] by quadrature over X."""
    rho = _check_rho(rho)
    if not q > 1:
        raise BadExponent(f"q must exceed 1, got {q}")
    A = _as_union(A)
    if rho == 0.0:
        return StabilityResult(gaussian_measure(A) ** q, "quadrature", 0.0)
    res = integrate_line(lambda x: np.power(_conditional_hit(A, rho, x), q), cfg)
    return StabilityResult(res.value, "quadrature", res.error_estimate, res.converged)


# --- metrics ----------------------------------------------------------------

def epsilon_metric(A) -> float:
    """eps(A) = q(gamma(A))^2 - q(A)^2."""
    g = _nondegenerate(A)
    qh = isoperimetric_profile(g)
    qa = first_moment_magnitude(A)
    return (qh - qa) * (qh + qa)


def delta_metric(A) -> float:
    """delta(A) = gamma(A symmetric-difference H(A))."""
    _nondegenerate(A)
    H = halfspace_round(A).as_union()
    return gaussian_measure(symmetric_difference(_as_union(A), H))


def epsilon_tilde(A, rho: float, cfg: QuadratureConfig = QuadratureConfig(abs_tol=1e-13)) -> float:
    """|int Phi((rho x - alpha)/sqrt(1-rho^2)) (g - f) dgamma| on the oriented axis."""
    rho = _check_rho(rho)
    _nondegenerate(A)
    Ao, alpha = oriented(A)
    H = IntervalUnion(((alpha, math.inf),))
    s = math.sqrt(1.0 - rho * rho)
    weight = lambda x: special.ndtr((rho * x - alpha) / s)
    gain = integrate_gaussian(weight, difference(H, Ao), cfg).value
    loss = integrate_gaussian(weight, difference(Ao, H), cfg).value
    return abs(gain - loss)


def deficit(A, rho: float, q: float = 2.0, method: str = None,
            cfg: QuadratureConfig = QuadratureConfig(abs_tol=1e-12)) -> float:
    """S^q_rho(H(A)) - S^q_rho(A), both terms by the same method.

    q = 2 defaults to rectangle sums; other exponents use quadrature.  For
    1 < q < 2 the functional is fine even though the martingale integrand
    S^{q-2} is singular at 0.
    """
    rho = _check_rho(rho)
    _nondegenerate(A)
    A = _as_union(A)
    H = halfspace_round(A).as_union()
    if method is None:
        method = "bvn_sum" if q == 2 else "quadrature"
    method = _normalize_method(method)
    if q == 2 and method != "quadrature":
        return noise_stability(H, rho, method).value - noise_stability(A, rho, method).value
    return q_stability(H, rho, q, cfg).value - q_stability(A, rho, q, cfg).value


def upper_integral(A, rho: float) -> float:
    """I = K_rho(H, H) - K_rho(H, A)."""
    A = _as_union(A)
    H = halfspace_round(A).as_union()
    return cross_stability(H, H, rho) - cross_stability(H, A, rho)


def deficit_bounds_report(A, rho: float) -> DeficitReport:
    rho = _check_rho(rho)
    g = _nondegenerate(A)
    A = _as_union(A)
    eps = epsilon_metric(A)
    if eps <= 1e-14:
        raise DegenerateEpsilon(f"epsilon {eps:.3e} too small for bound ratios")
    d = deficit(A, rho)
    log_eps = abs(math.log(eps))
    lower_expr = eps / log_eps * math.sqrt(1.0 - rho)
    upper_expr = eps / math.sqrt(1.0 - rho)
    return DeficitReport(
        rho=rho,
        gamma=g,
        epsilon=eps,
        delta=delta_metric(A),
        epsilon_tilde=epsilon_tilde(A, rho),
        deficit=d,
        lower_expr=lower_expr,
        upper_expr=upper_expr,
        lower_ratio=d / lower_expr,
        upper_ratio=d / upper_expr,
        upper_I=upper_integral(A, rho),
        hypothesis_ok=rho > 0 and eps < math.exp(-1.0 / rho),
    )


def isoperimetric_deficit(A) -> float:
    """Gaussian perimeter of A minus that of its half-line rounding."""
    g = _nondegenerate(A)
    return surface_area(A) - isoperimetric_profile(g)


def _second_moment(A: IntervalUnion) -> float:
    # int_S (x^2 - 1) dgamma = sum lo phi(lo) - hi phi(hi), with x phi(x) -> 0 at +-inf
    total = []
    for lo, hi in A.intervals:
        a = lo * std_normal_pdf(lo) if math.isfinite(lo) else 0.0
        b = hi * std_normal_pdf(hi) if math.isfinite(hi) else 0.0
        total.append(a - b)
    return math.fsum(total)


def second_moment_gap(A) -> float:
    """b(H(A)) - b(A) with b(S) = int_S (x^2 - 1) dgamma on the oriented axis."""
    _nondegenerate(A)
    Ao, alpha = oriented(A)
    return _second_moment(IntervalUnion(((alpha, math.inf),))) - _second_moment(Ao)
