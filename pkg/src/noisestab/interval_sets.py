"""Finite unions of closed intervals on the extended real line.

All Gaussian functionals of a set reduce to sums over its endpoints:

    gamma(A)    = sum Phi(hi) - Phi(lo)
    centroid(A) = int_A x dgamma = sum phi(lo) - phi(hi)
    perimeter   = sum of phi over the finite endpoints
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy import special

from .errors import DegenerateMeasure, MalformedInterval, SetLiteralError, TimeOutOfRange
from .gaussian_core import std_normal_pdf, std_normal_quantile

Pair = Tuple[float, float]

_MERGE_TOL = 1e-15
_CENTROID_TIE = 1e-14


@dataclass(frozen=True)
class IntervalUnion:
    """Canonical, sorted, disjoint union of closed intervals.

    Build through :func:`canonicalize` (or :meth:`of`); the constructor trusts
    its input.
    """

    intervals: Tuple[Pair, ...] = ()

    @classmethod
    def of(cls, *pairs: Pair) -> "IntervalUnion":
        return canonicalize(pairs)

    @classmethod
    def empty(cls) -> "IntervalUnion":
        return cls(())

    @classmethod
    def real_line(cls) -> "IntervalUnion":
        return cls(((-math.inf, math.inf),))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def lows(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.intervals], dtype=float)

    @property
    def highs(self) -> np.ndarray:
        return np.array([hi for _, hi in self.intervals], dtype=float)

    def finite_endpoints(self) -> list:
        return [e for pair in self.intervals for e in pair if math.isfinite(e)]

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __str__(self) -> str:
        return format_set(self)


@dataclass(frozen=True)
class HalfLine:
    """[threshold, inf) for orientation +1, (-inf, threshold] for -1."""

    threshold: float
    orientation: int = 1

    def as_union(self) -> IntervalUnion:
        if self.orientation > 0:
            return IntervalUnion(((self.threshold, math.inf),))
        return IntervalUnion(((-math.inf, self.threshold),))


def canonicalize(raw: Iterable[Sequence[float]]) -> IntervalUnion:
    pairs = []
    for item in raw:
        lo, hi = (float(v) for v in item)
        if math.isnan(lo) or math.isnan(hi):
            raise MalformedInterval(f"NaN endpoint in ({lo}, {hi})")
        if lo > hi:
            raise MalformedInterval(f"interval ({lo}, {hi}) has lo > hi")
        if lo == hi:
            continue
        pairs.append((lo, hi))
    pairs.sort()
    merged: list = []
    for lo, hi in pairs:
        if merged:
            plo, phi = merged[-1]
            if lo <= phi + _MERGE_TOL * max(1.0, abs(phi)):
                merged[-1] = (plo, max(phi, hi))
                continue
        merged.append((lo, hi))
    return IntervalUnion(tuple(merged))


def _as_union(A) -> IntervalUnion:
    if isinstance(A, IntervalUnion):
        return A
    if isinstance(A, HalfLine):
        return A.as_union()
    return canonicalize(A)


def gaussian_measure(A) -> float:
    A = _as_union(A)
    if A.is_empty:
        return 0.0
    lo, hi = A.lows, A.highs
    # difference of upper tails where both endpoints are positive keeps precision
    upper = lo > 0
    parts = np.where(upper, special.ndtr(-lo) - special.ndtr(-hi), special.ndtr(hi) - special.ndtr(lo))
    return float(min(1.0, max(0.0, math.fsum(parts))))


def centroid(A) -> float:
    A = _as_union(A)
    if A.is_empty:
        return 0.0
    return math.fsum(np.asarray(std_normal_pdf(A.lows)) - np.asarray(std_normal_pdf(A.highs)))


def first_moment_magnitude(A) -> float:
    return abs(centroid(A))


def halfspace_round(A) -> HalfLine:
    """Half-line with the same Gaussian measure, oriented along the centroid."""
    A = _as_union(A)
    g = gaussian_measure(A)
    if not 0.0 < g < 1.0:
        raise DegenerateMeasure(f"gaussian measure {g} is not in (0, 1)")
    v = centroid(A)
    if v < -_CENTROID_TIE:
        return HalfLine(std_normal_quantile(g), -1)
    # Psi(1 - g) = -Psi(g), without forming 1 - g
    return HalfLine(-std_normal_quantile(g), 1)


def intersection(A, B) -> IntervalUnion:
    A, B = _as_union(A), _as_union(B)
    out, i, j = [], 0, 0
    a, b = A.intervals, B.intervals
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return canonicalize(out)


def complement(A) -> IntervalUnion:
    A = _as_union(A)
    out, start = [], -math.inf
    for lo, hi in A.intervals:
        if lo > start:
            out.append((start, lo))
        start = hi
    if start < math.inf:
        out.append((start, math.inf))
    return IntervalUnion(tuple(out))


def union(A, B) -> IntervalUnion:
    return canonicalize(_as_union(A).intervals + _as_union(B).intervals)


def difference(A, B) -> IntervalUnion:
    return intersection(A, complement(B))


def symmetric_difference(A, B) -> IntervalUnion:
    return union(difference(A, B), difference(B, A))


def surface_area(A) -> float:
    """Gaussian perimeter: phi summed over the finite endpoints."""
    A = _as_union(A)
    pts = A.finite_endpoints()
    if not pts:
        return 0.0
    return math.fsum(np.atleast_1d(std_normal_pdf(np.array(pts))))


def evolve(A, w: float, t: float) -> IntervalUnion:
    """A_t = (A - w) / sqrt(1 - t)."""
    if not 0.0 <= t < 1.0:
        raise TimeOutOfRange(f"t must lie in [0, 1), got {t}")
    A = _as_union(A)
    scale = math.sqrt(1.0 - t)
    return canonicalize(((lo - w) / scale, (hi - w) / scale) for lo, hi in A.intervals)


def reflect(A) -> IntervalUnion:
    """Image of A under x -> -x."""
    A = _as_union(A)
    return canonicalize((-hi, -lo) for lo, hi in A.intervals)


def oriented(A):
    """Return (A', alpha) with A' mapped so that H(A) becomes [alpha, inf)."""
    A = _as_union(A)
    H = halfspace_round(A)
    if H.orientation > 0:
        return A, H.threshold
    return reflect(A), -H.threshold


# --- set literals -----------------------------------------------------------

_NUM = r"[+-]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
_INTERVAL = re.compile(r"\s*[\[(]\s*(" + _NUM + r")\s*,\s*(" + _NUM + r")\s*[\])]\s*")


def parse_set(text: str) -> IntervalUnion:
    """Parse e.g. ``"(-inf,0.5]U[1,2]"``; ``"empty"`` is the empty set.

    Brackets are accepted but ignored; every interval is closed.
    """
    stripped = text.strip()
    if stripped.lower() in ("empty", "{}", "∅"):
        return IntervalUnion.empty()
    pairs, pos = [], 0
    while True:
        m = _INTERVAL.match(text, pos)
        if m is None:
            rest = text[pos:].strip()
            token = rest.split("U")[0].strip() or rest or "<end of input>"
            where = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise SetLiteralError("malformed interval", token, where)
        lo, hi = float(m.group(1)), float(m.group(2))
        if lo > hi:
            raise SetLiteralError("interval has lo > hi", m.group(0).strip(), m.start())
        pairs.append((lo, hi))
        pos = m.end()
        if pos == len(text):
            break
        if text[pos] != "U":
            raise SetLiteralError("expected 'U' between intervals", text[pos], pos)
        pos += 1
    return canonicalize(pairs)


def _fmt(x: float) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return repr(float(x))


def format_set(A) -> str:
    A = _as_union(A)
    if A.is_empty:
        return "empty"
    parts = []
    for lo, hi in A.intervals:
        left = "(" if lo == -math.inf else "["
        right = ")" if hi == math.inf else "]"
        parts.append(f"{left}{_fmt(lo)},{_fmt(hi)}{right}")
    return "U".join(parts)
