"""Fourier-Hermite spectra of interval-union indicators.

With the orthonormal basis h_l = He_l / sqrt(l!) and the identity
d/dx (He_l phi) = -He_{l+1} phi, each coefficient is a finite endpoint sum:

    C_0 = gamma(A),
    C_l = l^{-1/2} sum_i [h_{l-1}(lo_i) phi(lo_i) - h_{l-1}(hi_i) phi(hi_i)],  l >= 1,

and the noise stability is S_rho(A) = sum_l rho^l C_l^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DegenerateMeasure, DegreeTooLarge
from .gaussian_core import HERMITE_MAX_DEGREE, hermite_weighted_table, isoperimetric_profile
from .interval_sets import _as_union, gaussian_measure
from .stability import StabilityResult, _check_rho


@dataclass(frozen=True)
class HermiteSpectrum:
    coefficients: Tuple[float, ...]
    truncation_degree: int
    tail_energy_bound: float


def _coefficients(A, max_degree: int) -> np.ndarray:
    A = _as_union(A)
    if max_degree > HERMITE_MAX_DEGREE:
        raise DegreeTooLarge(f"degree {max_degree} exceeds guard {HERMITE_MAX_DEGREE}")
    out = np.zeros(max_degree + 1)
    if A.is_empty:
        return out
    out[0] = gaussian_measure(A)
    if max_degree == 0:
        return out
    lo = hermite_weighted_table(max_degree - 1, A.lows)
    hi = hermite_weighted_table(max_degree - 1, A.highs)
    ell = np.arange(1, max_degree + 1)
    out[1:] = np.sum(lo - hi, axis=1) / np.sqrt(ell)
    return out


def hermite_coefficient(A, degree: int) -> float:
    """C_degree(1_A) in the orthonormal Hermite basis."""
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    return float(_coefficients(A, degree)[degree])


def spectrum(A, max_degree: int) -> HermiteSpectrum:
    c = _coefficients(A, max_degree)
    tail = gaussian_measure(A) - math.fsum(c * c)
    return HermiteSpectrum(tuple(float(v) for v in c), max_degree, tail)


def spectral_stability(A, rho: float, abs_tol: float = 1e-10) -> StabilityResult:
    """Truncated sum of rho^l C_l^2 with the exact tail bound rho^(L+1) (gamma - sum C_l^2).

    Raises DegreeTooLarge (carrying the partial result) when the guard degree
    cannot meet ``abs_tol``.
    """
    rho = _check_rho(rho)
    A = _as_union(A)
    g = gaussian_measure(A)
    c = _coefficients(A, HERMITE_MAX_DEGREE)
    energy = np.cumsum(c * c)
    powers = rho ** np.arange(HERMITE_MAX_DEGREE + 2, dtype=float)
    tails = powers[1:] * np.maximum(g - energy, 0.0)
    ok = np.nonzero(tails <= abs_tol)[0]
    L = int(ok[0]) if ok.size else HERMITE_MAX_DEGREE
    value = math.fsum(powers[: L + 1] * c[: L + 1] ** 2)
    result = StabilityResult(value, "spectral", float(tails[L]), bool(ok.size))
    if not ok.size:
        raise DegreeTooLarge(
            f"rho={rho} needs more than {HERMITE_MAX_DEGREE} Hermite degrees for tol {abs_tol}",
            partial=result)
    return result


def first_order_energy_deficit(A) -> float:
    """C_1(H(A))^2 - C_1(A)^2; C_1 of a half-line of measure s is q(s)."""
    g = gaussian_measure(A)
    if not 0.0 < g < 1.0:
        raise DegenerateMeasure(f"gaussian measure {g} is not in (0, 1)")
    c1 = hermite_coefficient(A, 1)
    qh = isoperimetric_profile(g)
    return (qh - abs(c1)) * (qh + abs(c1))
