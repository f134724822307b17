"""Tightness families, seeded random sets, sweeps and the property suite."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from .errors import FamilyDegenerate
from .gaussian_core import isoperimetric_profile, std_normal_quantile
from .interval_sets import (
    IntervalUnion,
    canonicalize,
    complement,
    first_moment_magnitude,
    gaussian_measure,
    halfspace_round,
)
from .spectral import first_order_energy_deficit, spectral_stability
from .stability import (
    cross_stability,
    deficit,
    delta_metric,
    epsilon_metric,
    epsilon_tilde,
    isoperimetric_deficit,
    noise_stability,
    upper_integral,
)

RANDOM_SET_VERSION = "uniform-1to5-[-4,4]-rays25-v1"
FAMILIES = ("F1", "F2", "F3")
RHO_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

# epsilon >= DELTA_SQ_CONSTANT * gamma (1 - gamma) delta^2, from q(H) - q(A) >= delta^2/8
# and q(s) >= 4 s (1 - s) / sqrt(2 pi)
DELTA_SQ_CONSTANT = 1.0 / (2.0 * math.sqrt(2.0 * math.pi))


# --- families ---------------------------------------------------------------

_FAMILY_ALIASES = {"F1_shifted_sliver": "F1", "F2_far_tail": "F2", "F3_near_sliver": "F3"}


def family_set(family_id: str, eps: float) -> IntervalUnion:
    """F1: (-inf, Psi(1/2-e)] U [Psi(3/4), Psi(3/4+e)]
    F2: (-inf, Psi(1/2-e)] U [Psi(1-e), inf)
    F3: (-inf, Psi(1/2-e)] U [Psi(1/2+e), Psi(1/2+2e)]
    """
    fid = _FAMILY_ALIASES.get(family_id, family_id)
    Psi = std_normal_quantile
    limit = {"F1": 0.25, "F2": 0.5, "F3": 0.25}.get(fid)
    if limit is None:
        raise ValueError(f"unknown family {family_id!r}")
    if not 0.0 < eps < limit:
        raise FamilyDegenerate(f"{fid} needs 0 < eps < {limit} for disjoint components, got {eps}")
    left = (-math.inf, Psi(0.5 - eps))
    if fid == "F1":
        right = (Psi(0.75), Psi(0.75 + eps))
    elif fid == "F2":
        right = (Psi(1.0 - eps), math.inf)
    else:
        right = (Psi(0.5 + eps), Psi(0.5 + 2.0 * eps))
    A = canonicalize([left, right])
    if len(A) != 2:
        raise FamilyDegenerate(f"{fid} components merged at eps={eps}")
    return A


@dataclass(frozen=True)
class FamilySpec:
    family_id: str
    eps_grid: Sequence[float]
    rho: float


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    residuals: List[float]


def fit_loglog(x: Sequence[float], y: Sequence[float]) -> LogLogFit:
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return LogLogFit(float(slope), float(intercept), [float(r) for r in resid])


SWEEP_COLUMNS = ("eps", "gamma", "epsilon", "delta", "epsilon_tilde", "deficit",
                 "lower_ratio", "upper_ratio", "isoperimetric_deficit")


def sweep_row(family_id: str, eps: float, rho: float) -> Dict[str, float]:
    A = family_set(family_id, eps)
    e = epsilon_metric(A)
    d = deficit(A, rho)
    return {
        "eps": eps,
        "gamma": gaussian_measure(A),
        "epsilon": e,
        "delta": delta_metric(A),
        "epsilon_tilde": epsilon_tilde(A, rho),
        "deficit": d,
        "lower_ratio": d / (e / abs(math.log(e)) * math.sqrt(1.0 - rho)),
        "upper_ratio": d * math.sqrt(1.0 - rho) / e,
        "isoperimetric_deficit": isoperimetric_deficit(A),
    }


@dataclass
class SweepResult:
    family_id: str
    rho: float
    rows: List[Dict[str, float]]
    fits: Dict[str, object] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])


def run_family_sweep(spec: FamilySpec, threads: int = 1) -> SweepResult:
    fid = _FAMILY_ALIASES.get(spec.family_id, spec.family_id)
    grid = [float(e) for e in spec.eps_grid]
    for e in grid:
        family_set(fid, e)
    work = lambda e: sweep_row(fid, e, spec.rho)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, grid))
    else:
        rows = [work(e) for e in grid]
    res = SweepResult(fid, spec.rho, rows)
    eps = res.column("eps")
    fits: Dict[str, object] = {}
    if len(rows) >= 2:
        fits["epsilon_slope"] = asdict(fit_loglog(eps, res.column("epsilon")))
        fits["deficit_slope"] = asdict(fit_loglog(eps, res.column("deficit")))
        fits["delta_slope"] = asdict(fit_loglog(eps, res.column("delta")))
    if fid == "F2":
        band = res.column("epsilon") / (eps * np.sqrt(np.abs(np.log(eps))))
        fits["epsilon_over_eps_sqrtlog"] = {"min": float(band.min()), "max": float(band.max()),
                                            "spread": float(band.max() / band.min())}
    ratio = res.column("deficit") / eps
    fits["deficit_over_eps"] = {"min": float(ratio.min()), "max": float(ratio.max()),
                                "spread": float(ratio.max() / ratio.min())}
    res.fits = fits
    return res


# --- random sets ------------------------------------------------------------

def random_interval_union(rng: np.random.Generator) -> IntervalUnion:
    """1-5 components, endpoints uniform on [-4, 4], each ray with probability 1/4."""
    k = int(rng.integers(1, 6))
    pts = np.sort(rng.uniform(-4.0, 4.0, size=2 * k))
    left_ray = rng.random() < 0.25
    right_ray = rng.random() < 0.25
    if left_ray:
        pts[0] = -math.inf
    if right_ray:
        pts[-1] = math.inf
    return canonicalize(zip(pts[0::2], pts[1::2]))


def case_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(index),)))


def random_sets(master_seed: int, n: int, gamma_range=None) -> List[IntervalUnion]:
    """Deterministic list of random sets; optionally rejection-sampled on gamma."""
    out, i = [], 0
    while len(out) < n:
        A = random_interval_union(case_rng(master_seed, i))
        i += 1
        g = gaussian_measure(A)
        if gamma_range is not None and not gamma_range[0] <= g <= gamma_range[1]:
            continue
        if 0.0 < g < 1.0:
            out.append(A)
    return out


# --- property suite ---------------------------------------------------------

SUITE_RHOS = (0.1, 0.5, 0.9)


def _case_margins(A: IntervalUnion) -> Dict[str, List[float]]:
    """Signed slack of every suite check (>= 0 means pass)."""
    m: Dict[str, List[float]] = {}
    add = lambda name, v: m.setdefault(name, []).append(float(v))
    g = gaussian_measure(A)
    qg = isoperimetric_profile(g)
    qa = first_moment_magnitude(A)
    eps = epsilon_metric(A)
    dlt = delta_metric(A)
    H = halfspace_round(A).as_union()

    add("centroid_maximality", qg - qa + 1e-12)
    add("halfspace_measure", 1e-13 - abs(gaussian_measure(H) - g))
    add("complement_epsilon", 1e-12 - abs(eps - epsilon_metric(complement(A))))
    add("profile_lower_bound", qg - 4.0 / math.sqrt(2.0 * math.pi) * g * (1.0 - g))
    add("delta_squared_domination", eps - (0.199 * g * (1.0 - g) * dlt * dlt - 1e-10))
    add("energy_deficit_identity", 1e-12 - abs(first_order_energy_deficit(A) - eps))
    iso = isoperimetric_deficit(A)
    add("isoperimetric_nonnegative", iso + 1e-12)
    if dlt >= 0.01:
        add("isoperimetric_strict", iso - 1e-6)

    prev = -math.inf
    for rho in RHO_GRID:
        d = deficit(A, rho)
        I = upper_integral(A, rho)
        add("borell", d + 1e-9)
        if dlt >= 0.01:
            add("borell_strict", d - 1e-8)
        add("deficit_upper_chain", 2.0 * I + 1e-8 - d)
        add("upper_integral_estimate", rho / math.sqrt(1 - rho * rho) * (qg - qa) + 1e-8 - I)
        s = noise_stability(A, rho).value
        add("stability_monotone_in_rho", s - prev + 1e-12)
        prev = s
    for rho in SUITE_RHOS:
        I = upper_integral(A, rho)
        add("epsilon_tilde_matches_I", 1e-10 - abs(epsilon_tilde(A, rho) - I))
        add("self_adjoint", 1e-10 - abs(cross_stability(A, H, rho) - cross_stability(H, A, rho)))
    bvn = noise_stability(A, 0.5).value
    add("bvn_vs_quadrature", 1e-8 - abs(noise_stability(A, 0.5, "quadrature").value - bvn))
    add("spectral_vs_bvn", 1e-6 - abs(spectral_stability(A, 0.5).value - bvn))
    return m


@dataclass
class SuiteReport:
    master_seed: int
    n_cases: int
    generator: str
    checks: Dict[str, Dict[str, float]]

    @property
    def failures(self) -> int:
        return int(sum(c["failed"] for c in self.checks.values()))

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self):
        return {"master_seed": self.master_seed, "n_cases": self.n_cases,
                "generator": self.generator, "failures": self.failures,
                "passed": self.passed, "checks": self.checks}


def run_property_suite(master_seed: int, n_cases: int, threads: int = 1) -> SuiteReport:
    if n_cases < 1:
        raise ValueError("n_cases must be >= 1")
    sets = random_sets(master_seed, n_cases)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            margins = list(pool.map(_case_margins, sets))
    else:
        margins = [_case_margins(A) for A in sets]
    checks: Dict[str, Dict[str, float]] = {}
    for case in margins:
        for name, vals in case.items():
            c = checks.setdefault(name, {"evaluated": 0, "failed": 0, "worst_margin": math.inf})
            c["evaluated"] += len(vals)
            c["failed"] += sum(1 for v in vals if not v >= 0.0)
            c["worst_margin"] = min(c["worst_margin"], min(vals))
    return SuiteReport(int(master_seed), int(n_cases), RANDOM_SET_VERSION, dict(sorted(checks.items())))
