import math

import pytest

from noisestab.errors import DegenerateMeasure, DegreeTooLarge
from noisestab.experiments import random_sets
from noisestab.gaussian_core import HERMITE_MAX_DEGREE, hermite_eval_normalized, isoperimetric_profile
from noisestab.interval_sets import IntervalUnion, gaussian_measure
from noisestab.quadrature import QuadratureConfig, integrate_gaussian
from noisestab.spectral import (
    first_order_energy_deficit,
    hermite_coefficient,
    spectral_stability,
    spectrum,
)
from noisestab.stability import epsilon_metric, noise_stability

INF = math.inf
PHI0 = 0.3989422804014327
RIGHT = IntervalUnion.of((0.0, INF))


def quad_coefficient(A, ell):
    cfg = QuadratureConfig(abs_tol=1e-13)
    return integrate_gaussian(lambda x: hermite_eval_normalized(ell, x), A, cfg).value


def test_degree_zero_is_measure():
    A = IntervalUnion.of((-0.3, 1.2))
    assert hermite_coefficient(A, 0) == gaussian_measure(A)


def test_degree_one_of_ray():
    for a in (-1.5, 0.0, 2.2):
        A = IntervalUnion.of((a, INF))
        assert hermite_coefficient(A, 1) == pytest.approx(quad_coefficient(A, 1), abs=1e-12)


def test_half_line_spectrum_against_quadrature():
    sp = spectrum(RIGHT, 4)
    expected = [0.5, PHI0, 0.0, -PHI0 / math.sqrt(6)]
    for ell, ref in enumerate(expected):
        assert sp.coefficients[ell] == pytest.approx(ref, abs=1e-15)
    for ell in range(5):
        assert abs(sp.coefficients[ell] - quad_coefficient(RIGHT, ell)) <= 1e-10


def test_parity_and_empty():
    sym = IntervalUnion.of((-INF, -0.7), (-0.2, 0.2), (0.7, INF))
    c = spectrum(sym, 31).coefficients
    assert max(abs(v) for v in c[1::2]) <= 1e-13
    assert all(v == 0 for v in spectrum(IntervalUnion.empty(), 10).coefficients)


def test_parseval_tail_bound_decreases():
    A = IntervalUnion.of((-1.0, 0.5), (1.5, 3.0))
    tails = [spectrum(A, L).tail_energy_bound for L in (5, 20, 80, 200)]
    assert all(t >= -1e-15 for t in tails)
    assert tails == sorted(tails, reverse=True)


def test_high_degree_coefficients_against_quadrature():
    A = IntervalUnion.of((-0.4, 1.1))
    c = spectrum(A, 40).coefficients
    for ell in (10, 25, 40):
        assert abs(c[ell] - quad_coefficient(A, ell)) <= 1e-10


def test_guard():
    with pytest.raises(DegreeTooLarge):
        spectrum(RIGHT, HERMITE_MAX_DEGREE + 1)
    with pytest.raises(ValueError):
        hermite_coefficient(RIGHT, -1)


def test_spectral_stability_examples():
    A = IntervalUnion.of((-0.4, 1.1), (2.0, INF))
    g = gaussian_measure(A)
    assert spectral_stability(A, 0.0).value == pytest.approx(g * g, abs=1e-15)
    assert abs(spectral_stability(RIGHT, 0.5).value - 1 / 3) <= 1e-6
    for B in random_sets(11, 20):
        assert abs(spectral_stability(B, 0.7).value - noise_stability(B, 0.7).value) <= 1e-6


def test_spectral_stability_reports_partial_when_guard_too_small():
    A = IntervalUnion.of((-0.4, 1.1))
    with pytest.raises(DegreeTooLarge) as info:
        spectral_stability(A, 0.995, abs_tol=1e-12)
    part = info.value.partial
    assert part is not None and not part.converged
    assert abs(part.value - noise_stability(A, 0.995).value) <= part.error_estimate


def test_first_order_energy_deficit():
    assert first_order_energy_deficit(RIGHT) == pytest.approx(0.0, abs=1e-16)
    sym = IntervalUnion.of((-INF, -0.7), (0.7, INF))
    g = gaussian_measure(sym)
    assert first_order_energy_deficit(sym) == isoperimetric_profile(g) ** 2
    for B in random_sets(5, 30):
        assert abs(first_order_energy_deficit(B) - epsilon_metric(B)) <= 1e-12
    with pytest.raises(DegenerateMeasure):
        first_order_energy_deficit(IntervalUnion.real_line())
