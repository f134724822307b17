import math

import numpy as np
import pytest

from noisestab.errors import NotConverged
from noisestab.gaussian_core import hermite_eval, std_normal_cdf
from noisestab.interval_sets import IntervalUnion
from noisestab.quadrature import QuadratureConfig, integrate_gaussian, integrate_line

PHI0 = 0.3989422804014327


def test_normalization():
    r = integrate_line(lambda x: np.ones_like(x))
    assert abs(r.value - 1.0) <= 1e-12
    assert r.converged


def test_closed_forms():
    assert abs(integrate_gaussian(lambda x: x, IntervalUnion.of((0, math.inf))).value - PHI0) <= 1e-10
    assert abs(integrate_line(lambda x: x * x).value - 1.0) <= 1e-10


def test_hermite_orthogonality():
    assert abs(integrate_line(lambda x: hermite_eval(2, x)).value) <= 1e-10
    assert abs(integrate_line(lambda x: hermite_eval(1, x) ** 2).value - 1.0) <= 1e-10
    assert abs(integrate_line(lambda x: hermite_eval(3, x) * hermite_eval(4, x)).value) <= 1e-10


def test_cdf_integrand_dense_grid_oracle():
    r = integrate_line(std_normal_cdf)
    x = np.linspace(-12, 12, 2_000_001)
    grid = np.trapezoid(std_normal_cdf(x) * np.exp(-x * x / 2) / math.sqrt(2 * math.pi), x)
    assert abs(r.value - 0.5) <= 1e-10
    assert abs(grid - 0.5) <= 1e-10


def test_scalar_only_callable_is_vectorized():
    r = integrate_gaussian(lambda x: math.cos(x), IntervalUnion.of((-1, 2)))
    ref = integrate_gaussian(np.cos, IntervalUnion.of((-1, 2)))
    assert r.value == pytest.approx(ref.value, abs=1e-14)


def test_empty_set_is_zero():
    r = integrate_gaussian(lambda x: x, IntervalUnion.empty())
    assert r.value == 0.0 and r.converged


def test_nonconvergence_reports_best_value():
    cfg = QuadratureConfig(abs_tol=1e-14, max_panels=25)
    f = lambda x: np.sign(np.sin(40 * x))
    r = integrate_line(f, cfg)
    assert not r.converged
    with pytest.raises(NotConverged) as info:
        integrate_line(f, cfg, raise_on_failure=True)
    assert info.value.result.panels_used <= cfg.max_panels


@pytest.mark.parametrize("kw", [{"abs_tol": 1e-16}, {"truncation_radius": 5}, {"max_panels": 0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        QuadratureConfig(**kw)
