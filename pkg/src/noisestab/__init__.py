"""Numerical lab for Gaussian noise stability of one-dimensional interval unions."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .gaussian_core import (  # noqa: E402
    bvn_rectangle,
    isoperimetric_profile,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)
from .interval_sets import (  # noqa: E402
    HalfLine,
    IntervalUnion,
    canonicalize,
    format_set,
    gaussian_measure,
    halfspace_round,
    parse_set,
)
from .stability import (  # noqa: E402
    deficit,
    deficit_bounds_report,
    delta_metric,
    epsilon_metric,
    epsilon_tilde,
    noise_stability,
    q_stability,
)
from .spectral import spectral_stability, spectrum  # noqa: E402
