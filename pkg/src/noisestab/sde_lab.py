"""Monte Carlo laboratory for the martingale S_t = P(W_1 in A | F_t).

S_t is an exact function of W_t,

    S_t = gamma(A_t),   A_t = (A - W_t) / sqrt(1 - t),

so only the time integrals (quadratic variation, the q-stability identity and
the coupling clock) carry discretization error.  Every path draws its
Brownian increments from its own Philox counter block keyed by
``(master_seed, path_index)``, so ensembles are identical for any chunking
or thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import special

from .errors import (
    BadExponent,
    CorrelationOutOfRange,
    DegenerateClock,
    DegenerateMeasure,
    InsufficientEnsemble,
    TimeOutOfRange,
)
from .gaussian_core import INV_SQRT_2PI
from .interval_sets import IntervalUnion, _as_union, complement, gaussian_measure
from .stability import StabilityResult

CHUNK_PATHS = 256


@dataclass(frozen=True)
class PathConfig:
    rho: float
    n_steps: int = 2000
    n_paths: int = 10_000
    master_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise CorrelationOutOfRange(f"rho must satisfy 0 <= rho < 1, got {self.rho}")
        if self.n_steps < 100:
            raise ValueError("n_steps must be at least 100")
        if self.n_paths < 1:
            raise ValueError("n_paths must be positive")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.rho, self.n_steps + 1)


@dataclass
class PathSample:
    times: np.ndarray
    w: np.ndarray
    s: np.ndarray
    q_at: np.ndarray
    qv: np.ndarray
    eps: np.ndarray
    # q(S_t), kept for the coupling clock and the QV cross-check
    q_s: np.ndarray = field(repr=False, default=None)


@dataclass
class CouplingReport:
    clock: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    theta1: float
    omega2_at_theta1: float
    lag_ok: bool
    min_gap_increment: float

    @property
    def gap(self) -> np.ndarray:
        return self.omega1 - self.omega2


# --- random streams ---------------------------------------------------------

def path_normals(master_seed: int, path_index: int, n: int) -> np.ndarray:
    """Standard normals for one path from a Philox counter block."""
    bitgen = np.random.Philox(key=int(master_seed) & (2**64 - 1), counter=[0, 0, 0, int(path_index)])
    return np.random.Generator(bitgen).standard_normal(n)


# --- vectorized kernels -----------------------------------------------------

def _pdf(z):
    return INV_SQRT_2PI * np.exp(-0.5 * z * z)


def _profile(s, s_comp):
    """q(s) from both s and 1 - s, each computed without cancellation."""
    lo = np.minimum(s, s_comp)
    inside = lo > 0
    z = special.ndtri(np.where(inside, lo, 0.5))
    return np.where(inside, _pdf(z), 0.0)


def _mass(intervals, tails):
    """Sum of interval masses from per-endpoint (Phi(z), Phi(-z), z) tables."""
    total = 0.0
    for lo, hi in intervals:
        if math.isfinite(lo):
            lower_lo, upper_lo, z_lo = tails[lo]
        else:
            lower_lo, upper_lo, z_lo = 0.0, 1.0, None
        if math.isfinite(hi):
            lower_hi, upper_hi, _ = tails[hi]
        else:
            lower_hi, upper_hi = 1.0, 0.0
        if z_lo is None:
            total = total + lower_hi
        else:
            # upper tails when the interval sits right of 0 keep relative accuracy
            total = total + np.where(z_lo > 0, upper_lo - upper_hi, lower_hi - lower_lo)
    return total


def _evolved_functionals(A: IntervalUnion, Ac: IntervalUnion, w: np.ndarray, times: np.ndarray):
    """S_t, q(S_t), q(A_t) for Brownian values w[..., k] at times[k]."""
    inv_scale = 1.0 / np.sqrt(1.0 - times)
    tails = {}
    v = np.zeros_like(w)
    for lo, hi in A.intervals:
        for e, sign in ((lo, 1.0), (hi, -1.0)):
            if not math.isfinite(e):
                continue
            z = (e - w) * inv_scale
            tails[e] = (special.ndtr(z), special.ndtr(-z), z)
            v += sign * _pdf(z)
    s = np.clip(_mass(A.intervals, tails) + np.zeros_like(w), 0.0, 1.0)
    sc = np.clip(_mass(Ac.intervals, tails) + np.zeros_like(w), 0.0, 1.0)
    return s, _profile(s, sc), np.abs(v)


def _trapezoid_cumulative(y, dt):
    out = np.zeros_like(y)
    out[..., 1:] = np.cumsum(0.5 * (y[..., 1:] + y[..., :-1]) * dt, axis=-1)
    return out


def _paths_from_w(A: IntervalUnion, times: np.ndarray, w: np.ndarray) -> Dict[str, np.ndarray]:
    A = _as_union(A)
    s, q_s, q_at = _evolved_functionals(A, complement(A), w, times)
    dt = times[1] - times[0] if times.size > 1 else 0.0
    rate = q_at ** 2 / (1.0 - times)
    qv = _trapezoid_cumulative(rate, dt)
    eps = q_s ** 2 - q_at ** 2
    return {"w": w, "s": s, "q_s": q_s, "q_at": q_at, "qv": qv, "eps": eps, "rate": rate}


def _chunk_w(cfg: PathConfig, start: int, stop: int, n_steps: int) -> np.ndarray:
    dt = cfg.rho / n_steps
    w = np.zeros((stop - start, n_steps + 1))
    for row, idx in enumerate(range(start, stop)):
        w[row, 1:] = np.cumsum(path_normals(cfg.master_seed, idx, n_steps)) * math.sqrt(dt)
    return w


def _check_set(A) -> IntervalUnion:
    A = _as_union(A)
    g = gaussian_measure(A)
    if not 0.0 < g < 1.0:
        raise DegenerateMeasure(f"gaussian measure {g} is not in (0, 1)")
    return A


def path_from_increments(A, times: Sequence[float], dw: Sequence[float]) -> PathSample:
    """Build a path from explicit Brownian increments (test hook)."""
    A = _check_set(A)
    times = np.asarray(times, dtype=float)
    if times[-1] >= 1.0 or times[0] != 0.0:
        raise TimeOutOfRange("times must start at 0 and stay below 1")
    w = np.concatenate([[0.0], np.cumsum(np.asarray(dw, dtype=float))])
    d = _paths_from_w(A, times, w)
    return PathSample(times, d["w"], d["s"], d["q_at"], d["qv"], d["eps"], d["q_s"])


def sample_s_path(A, cfg: PathConfig, path_index: int) -> PathSample:
    A = _check_set(A)
    times = cfg.times
    w = _chunk_w(cfg, path_index, path_index + 1, cfg.n_steps)[0]
    d = _paths_from_w(A, times, w)
    return PathSample(times, d["w"], d["s"], d["q_at"], d["qv"], d["eps"], d["q_s"])


def sample_ensemble(A, cfg: PathConfig, start: int = 0, count: Optional[int] = None) -> List[PathSample]:
    count = cfg.n_paths if count is None else count
    return [sample_s_path(A, cfg, i) for i in range(start, start + count)]


# --- single-path reports ----------------------------------------------------

@dataclass(frozen=True)
class QVReport:
    realized: float
    analytic: float
    relative_gap: float


def quadratic_variation_check(path: PathSample) -> QVReport:
    realized = float(np.sum(np.diff(path.s) ** 2))
    analytic = float(path.qv[-1])
    gap = (realized - analytic) / analytic if analytic > 0 else (0.0 if realized == 0 else math.inf)
    return QVReport(realized, analytic, gap)


def _coupling_arrays(times, q_at, q_s):
    # omega_2' = q(B)^{-2} dT with dT = q(A_t)^2 / (1 - t) dt, trapezoid in t.
    # q(A_t) <= q(S_t) (centroid maximality) keeps every node of the gap rate nonnegative.
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q_s > 0, (q_at / q_s) ** 2, 1.0)
    rate2 = ratio / (1.0 - times)
    dt = times[1] - times[0]
    omega2 = _trapezoid_cumulative(rate2, dt)
    omega1 = -np.log1p(-times)
    return omega1, omega2


def couple_halfspace(path: PathSample, rho: float) -> CouplingReport:
    """Run the half-space time-change ODE along the path's own clock.

    ``lag_ok`` checks omega_2(Theta_1) <= -log(1 - rho) + 10 / n_steps, the
    pathwise form of [S]_rho <= [Q]_rho.
    """
    if not 0.0 <= rho < 1.0:
        raise CorrelationOutOfRange(f"rho must satisfy 0 <= rho < 1, got {rho}")
    n_steps = path.times.size - 1
    if path.qv[-1] <= 0.0:
        raise DegenerateClock("quadratic variation clock is constant along the path")
    q_s = path.q_s
    if q_s is None:
        q_s = np.sqrt(np.maximum(path.eps + path.q_at ** 2, 0.0))
    omega1, omega2 = _coupling_arrays(path.times, path.q_at, q_s)
    gap = omega1 - omega2
    target = -math.log1p(-rho)
    return CouplingReport(
        clock=path.qv.copy(),
        omega1=omega1,
        omega2=omega2,
        theta1=float(path.qv[-1]),
        omega2_at_theta1=float(omega2[-1]),
        lag_ok=bool(omega2[-1] <= target + 10.0 / n_steps),
        min_gap_increment=float(np.min(np.diff(gap))),
    )


# --- ensemble engine --------------------------------------------------------

@dataclass
class EnsembleSummary:
    """Per-path statistics (arrays indexed by path) plus per-step moments of S."""

    cfg: PathConfig
    gamma: float
    n_steps: int
    s_final: np.ndarray
    realized_qv: np.ndarray
    analytic_qv: np.ndarray
    identity_integrals: Dict[float, np.ndarray]
    lag_ok: np.ndarray
    gap_final: np.ndarray
    min_gap_increment: np.ndarray
    min_eps: np.ndarray
    s_step_sum: np.ndarray
    s_step_sumsq: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.s_final.size

    def martingale_zscores(self) -> np.ndarray:
        """(mean S_{t_k} - gamma) / SE at every grid time (t_0 excluded)."""
        n = self.n_paths
        mean = self.s_step_sum / n
        var = np.maximum(self.s_step_sumsq / n - mean ** 2, 0.0) * n / max(n - 1, 1)
        se = np.sqrt(var / n)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, (mean - self.gamma) / se, 0.0)
        return z[1:]


def _summarize_chunk(A, Ac, cfg, n_steps, qs, start, stop):
    times = np.linspace(0.0, cfg.rho, n_steps + 1)
    w = _chunk_w(cfg, start, stop, cfg.n_steps)[:, :: cfg.n_steps // n_steps]
    s, q_s, q_at = _evolved_functionals(A, Ac, w, times)
    dt = times[1] - times[0]
    rate = q_at ** 2 / (1.0 - times)
    incr = 0.5 * (rate[:, 1:] + rate[:, :-1]) * dt
    analytic = incr.sum(axis=1)
    realized = np.sum(np.diff(s, axis=1) ** 2, axis=1)
    ident = {}
    for q in qs:
        y = np.power(s, q - 2.0) * rate
        ident[q] = np.sum(0.5 * (y[:, 1:] + y[:, :-1]) * dt, axis=1)
    omega1, omega2 = _coupling_arrays(times, q_at, q_s)
    gap = omega1 - omega2
    target = -math.log1p(-cfg.rho)
    return {
        "s_final": s[:, -1],
        "realized": realized,
        "analytic": analytic,
        "ident": ident,
        "lag_ok": omega2[:, -1] <= target + 10.0 / n_steps,
        "gap_final": gap[:, -1],
        "min_gap_inc": np.min(np.diff(gap, axis=1), axis=1),
        "min_eps": np.min(q_s ** 2 - q_at ** 2, axis=1),
        "s_sum": s.sum(axis=0),
        "s_sumsq": (s * s).sum(axis=0),
    }


def simulate_ensemble(A, cfg: PathConfig, qs: Sequence[float] = (2.0,), n_steps: Optional[int] = None,
                      threads: int = 1) -> EnsembleSummary:
    """Stream the ensemble in fixed blocks of CHUNK_PATHS paths and reduce in path order.

    The block size is part of the reduction order, so it is not configurable;
    results are bit-identical for any thread count.

    ``n_steps`` may be any divisor of ``cfg.n_steps``: the coarse grid then
    subsamples the same Brownian paths, which is what grid-refinement
    comparisons need.
    """
    A = _check_set(A)
    Ac = complement(A)
    n_steps = cfg.n_steps if n_steps is None else int(n_steps)
    if n_steps < 1 or cfg.n_steps % n_steps:
        raise ValueError(f"n_steps={n_steps} must divide the base grid of {cfg.n_steps} steps")
    qs = tuple(float(q) for q in qs)
    bounds = [(i, min(i + CHUNK_PATHS, cfg.n_paths)) for i in range(0, cfg.n_paths, CHUNK_PATHS)]
    work = lambda b: _summarize_chunk(A, Ac, cfg, n_steps, qs, b[0], b[1])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    cat = lambda key: np.concatenate([p[key] for p in parts])
    s_sum = np.zeros(n_steps + 1)
    s_sumsq = np.zeros(n_steps + 1)
    for p in parts:
        s_sum += p["s_sum"]
        s_sumsq += p["s_sumsq"]
    return EnsembleSummary(
        cfg=cfg,
        gamma=gaussian_measure(A),
        n_steps=n_steps,
        s_final=cat("s_final"),
        realized_qv=cat("realized"),
        analytic_qv=cat("analytic"),
        identity_integrals={q: np.concatenate([p["ident"][q] for p in parts]) for q in qs},
        lag_ok=cat("lag_ok"),
        gap_final=cat("gap_final"),
        min_gap_increment=cat("min_gap_inc"),
        min_eps=cat("min_eps"),
        s_step_sum=s_sum,
        s_step_sumsq=s_sumsq,
    )


def _mean_se(x: np.ndarray):
    n = x.size
    mean = math.fsum(x) / n
    se = float(np.std(x, ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    return mean, se


@dataclass(frozen=True)
class MCStability:
    direct: StabilityResult
    identity: StabilityResult
    difference: float
    difference_se: float


def mc_stability_from_summary(summary: EnsembleSummary, q: float) -> MCStability:
    q = float(q)
    g = summary.gamma
    direct_vals = np.power(summary.s_final, q)
    ident_vals = g ** q + 0.5 * q * (q - 1.0) * summary.identity_integrals[q]
    d_mean, d_se = _mean_se(direct_vals)
    i_mean, i_se = _mean_se(ident_vals)
    diff_mean, diff_se = _mean_se(ident_vals - direct_vals)
    return MCStability(
        StabilityResult(d_mean, "monte_carlo", d_se),
        StabilityResult(i_mean, "monte_carlo", i_se),
        diff_mean,
        diff_se,
    )


def mc_stability(A, cfg: PathConfig, q: float = 2.0, threads: int = 1) -> MCStability:
    """Direct E[S_rho^q] and the identity S_0^q + q(q-1)/2 E int S^{q-2} d[S]."""
    if q < 2:
        raise BadExponent(f"the identity estimator needs q >= 2, got {q}")
    if cfg.rho == 0.0:
        g = gaussian_measure(_check_set(A)) ** q
        exact = StabilityResult(g, "monte_carlo", 0.0)
        return MCStability(exact, exact, 0.0, 0.0)
    summary = simulate_ensemble(A, cfg, qs=(q,), threads=threads)
    return mc_stability_from_summary(summary, q)


@dataclass(frozen=True)
class QVEnsembleReport:
    n_steps: int
    mean_relative_gap: float
    mean_squared_relative_gap: float


def qv_ensemble_report(summary: EnsembleSummary) -> QVEnsembleReport:
    """|mean(realized - analytic)| / mean(analytic) and mean((realized/analytic - 1)^2).

    The second statistic scales like 1/n_steps, so it halves when the grid
    is refined by two.
    """
    diff = summary.realized_qv - summary.analytic_qv
    mean_rel = abs(math.fsum(diff)) / math.fsum(summary.analytic_qv)
    rel = diff / summary.analytic_qv
    return QVEnsembleReport(summary.n_steps, mean_rel, float(np.mean(rel * rel)))


# --- epsilon process --------------------------------------------------------

@dataclass(frozen=True)
class EpsilonDiagnostic:
    drift_constant: float
    diffusion_constant: float
    strip_probability: float
    strip_window: float
    n_paths: int


def epsilon_process_diagnostic(ensemble: Sequence[PathSample], n_windows: int = 10,
                               strip_constant: float = 1.0) -> EpsilonDiagnostic:
    """Empirical constants in the drift/diffusion bounds of eps_t.

    Increments are normalized by S^3 (1-S)^3 / (eps sqrt|log eps|) and pooled
    over time windows; the drift is the window mean over (1-t)^{-1} dt and
    the diffusion the root mean square over (1-t)^{-1/2} dW.  The largest
    window value of each is reported.
    """
    if len(ensemble) < 1000:
        raise InsufficientEnsemble(f"need at least 1000 paths, got {len(ensemble)}")
    times = ensemble[0].times
    eps = np.stack([p.eps for p in ensemble])
    s = np.stack([p.s for p in ensemble])
    w = np.stack([p.w for p in ensemble])
    eps0 = float(eps[0, 0])
    s0 = float(s[0, 0])
    if eps0 <= 1e-14:
        return EpsilonDiagnostic(0.0, 0.0, 1.0, 0.0, len(ensemble))
    t = times[:-1]
    dt = np.diff(times)
    e = np.maximum(eps[:, :-1], 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = (s[:, :-1] * (1.0 - s[:, :-1])) ** 3 / (e * np.sqrt(np.abs(np.log(e))))
    valid = eps[:, :-1] > 1e-14
    y = np.where(valid, np.diff(eps, axis=1) * norm, 0.0)
    dw = np.diff(w, axis=1) / np.sqrt(1.0 - t)
    dtau = np.broadcast_to(dt / (1.0 - t), y.shape) * valid
    drift, diffusion = 0.0, 0.0
    for cols in np.array_split(np.arange(t.size), n_windows):
        yy, ww, tt = y[:, cols], dw[:, cols] * valid[:, cols], dtau[:, cols]
        wsq = float(np.sum(ww * ww))
        slope = float(np.sum(yy * ww)) / wsq if wsq > 0 else 0.0
        total = float(np.sum(tt))
        if total <= 0:
            continue
        drift = max(drift, abs(float(np.sum(yy - slope * ww))) / total)
        diffusion = max(diffusion, math.sqrt(float(np.sum(yy * yy)) / total))
    window = strip_constant * (s0 * (1.0 - s0)) ** 7 / abs(math.log(eps0))
    inside = times <= window
    dev = np.max(np.abs(eps[:, inside] - eps0), axis=1)
    prob = float(np.mean(dev <= 0.5 * eps0))
    return EpsilonDiagnostic(drift, diffusion, prob, window, len(ensemble))
