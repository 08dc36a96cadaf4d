"""Dyadic (canonical) interval machinery and the gap-witness audit.

A canonical interval is I(j,k,l) = [j + (l-1)*2^-k, j + l*2^-k) with integer
j >= 1, level k >= 0 and 1 <= l <= 2^k: the l-th of the 2^k equal dyadic
cells of [j, j+1).  Any interval of length L <= 1 inside one unit interval
contains a canonical subinterval of length > L/4; the selection here is
exact in floating point because scaling by 2^k and integer ceil/floor are
exact operations.

The audit certifies, per spectrum, that the squared gap sum is at most 16
times the summed squared lengths of one disjoint family of empty canonical
witness intervals (one or more per positive gap).  Gaps crossing integer
boundaries are split at those boundaries; each boundary-touching piece is
aligned to the dyadic grid on that side, which preserves the factor-4
length guarantee, so a single global factor 16 suffices.  (For gaps longer
than ~12 the certificate can genuinely fail; the spectra this package
produces have gaps far below 1.)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .construction import DistanceClass, nominal_diameter
from .errors import AuditError, ConfigError
from .spectrum import DistanceSpectrum, iter_windows

# Vectorized witness search stays exact while a*2^(k+1) < 2^53; route gaps
# below this length (or spectra beyond 2^14) through the exact slow path.
_VEC_MIN_GAP = 2.0 ** -35
_VEC_MAX_VALUE = 2.0 ** 14


@dataclass(frozen=True)
class CanonicalInterval:
    j: int
    k: int
    l: int

    def __post_init__(self) -> None:
        if self.j < 1:
            raise ConfigError(f"j must be >= 1, got {self.j}")
        if not (0 <= self.k <= 52):
            raise ConfigError(f"k must be in [0, 52], got {self.k}")
        if not (1 <= self.l <= 2**self.k):
            raise ConfigError(f"l must be in [1, 2^{self.k}], got {self.l}")

    @property
    def length(self) -> float:
        return math.ldexp(1.0, -self.k)


def interval_bounds(ci: CanonicalInterval) -> tuple[float, float]:
    h = math.ldexp(1.0, -ci.k)
    return ci.j + (ci.l - 1) * h, ci.j + ci.l * h


def _first_level(length: float) -> int:
    # smallest k with 2^-k <= length (frexp: length = mant * 2^e, mant in [0.5, 1))
    _, e = math.frexp(length)
    return max(0, 1 - e)


def largest_canonical_subinterval(lo: float, hi: float) -> CanonicalInterval:
    """Canonical subinterval of [lo, hi) with the smallest level that fits.

    Requires 1 <= lo < hi, hi - lo <= 1, and [lo, hi) within one unit
    interval [j, j+1); the result has length > (hi - lo)/4 and, among
    fitting cells at the chosen level, the smallest l.
    """
    if not (1.0 <= lo < hi):
        raise ConfigError(f"need 1 <= lo < hi, got [{lo}, {hi})")
    if hi - lo > 1.0:
        raise ConfigError(f"interval longer than 1: [{lo}, {hi})")
    j = math.floor(lo)
    if hi > j + 1:
        raise AuditError(f"[{lo}, {hi}) crosses the integer boundary {j + 1}")
    for k in (k1 := _first_level(hi - lo), k1 + 1):
        c = math.ceil(math.ldexp(lo, k))        # exact: scaling by 2^k is exact
        if c + 1 <= math.ldexp(hi, k):
            return CanonicalInterval(j, k, c - (j << k) + 1)
    raise AssertionError("unreachable: level k1+1 always fits")


def is_empty(spectrum: DistanceSpectrum, lo: float, hi: float) -> bool:
    """True iff no distance lies in [lo, hi)."""
    if not lo < hi:
        raise ConfigError(f"need lo < hi, got [{lo}, {hi})")
    v = spectrum.values
    idx = np.searchsorted(v, lo, side="left")
    return bool(idx == len(v) or v[idx] >= hi)


# ---------------------------------------------------------------------------
# Witness audit
# ---------------------------------------------------------------------------


@dataclass
class WitnessAudit:
    gap_sum_sq: float
    witness_sum_sq: float
    holds: bool
    gap_count: int
    positive_gap_count: int
    crossing_count: int
    crossing_gap_sum_sq: float
    crossing_witness_sum_sq: float


def _witness_open_noncrossing(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized: length of the best canonical interval inside the open gap
    (a_i, b_i), each gap within one unit interval.  Exact for gaps >=
    _VEC_MIN_GAP and values < _VEC_MAX_VALUE."""
    L = b - a
    _, e = np.frexp(L)
    k1 = np.maximum(1 - e.astype(np.int64), 0)
    h = np.full(len(a), np.nan)
    chosen = np.zeros(len(a), dtype=bool)
    for step in (0, 1):
        k = k1 + step
        scale_lo = np.ldexp(a, k)
        # strictly-inside left edge: first grid index with c*2^-k > a
        c = np.floor(scale_lo) + 1.0
        fits = (c + 1.0) <= np.ldexp(b, k)
        take = fits & ~chosen
        if take.any():
            h[take] = np.ldexp(1.0, -k[take])
            chosen |= fits
        if chosen.all():
            break
    if not chosen.all():
        raise AssertionError("witness level search failed to terminate")
    return h


def _witness_pieces_exact(a: float, b: float) -> tuple[float, int]:
    """Exact per-gap witness handling: split the open gap (a, b) at interior
    integers; return (sum of squared witness lengths, 1 if crossing else 0).

    Boundary-touching pieces take the aligned dyadic interval on that side
    (length >= piece/2); interior unit pieces contribute length-1 witnesses;
    a gap inside one unit interval falls back to the open-interval search.
    All arithmetic is exact (Fraction on the float values).
    """
    af, bf = Fraction(a), Fraction(b)
    ia = math.floor(a) + 1
    interior = list(range(ia, math.ceil(b))) if ia < b else []
    interior = [t for t in interior if af < t < bf]
    if not interior:
        # single-unit-interval gap, exact open search
        L = bf - af
        k = 0
        while Fraction(1, 1 << k) > L:
            k += 1
        for kk in (k, k + 1):
            c = (af * (1 << kk)).__floor__() + 1
            if Fraction(c + 1, 1 << kk) <= bf:
                return float(Fraction(1, 1 << kk)) ** 2, 0
        raise AssertionError("unreachable")
    total = 0.0
    # left piece (a, interior[0]): dyadic interval ending at the boundary
    left_len = Fraction(interior[0]) - af
    if left_len > 0:
        k = 0
        while Fraction(1, 1 << k) >= left_len:   # strict: witness start > a
            k += 1
        total += float(Fraction(1, 1 << k)) ** 2
    # full unit pieces [t, t+1)
    total += max(0, len(interior) - 1) * 1.0
    # right piece [interior[-1], b): dyadic interval starting at the boundary
    right_len = bf - Fraction(interior[-1])
    if right_len > 0:
        k = 0
        while Fraction(1, 1 << k) > right_len:
            k += 1
        total += float(Fraction(1, 1 << k)) ** 2
    return total, 1


def audit_gap_witnesses(spectrum: DistanceSpectrum, window: int = 1 << 24) -> WitnessAudit:
    """Certify gap_sum_sq <= 16 * witness_sum_sq over disjoint empty witnesses.

    Every positive gap (d_i, d_{i+1}) contributes the canonical witness(es)
    found inside it; containment in the open gap is verified explicitly, and
    containment implies emptiness because consecutive spectrum values bound
    the gap.  Crossing gaps are reported separately.
    """
    v = spectrum.values
    if len(v) < 2:
        raise ConfigError("need at least two distances to audit")
    if spectrum.d_min < 1.0:
        raise ConfigError(f"audit requires d_min >= 1, got {spectrum.d_min}")

    gap_total = 0.0
    gap_comp = 0.0
    wit_total = 0.0
    wit_comp = 0.0
    cross_gap_sq = 0.0
    cross_wit_sq = 0.0
    positive = 0
    crossing = 0
    gaps_seen = 0

    def kadd(val: float, which: int) -> None:
        nonlocal gap_total, gap_comp, wit_total, wit_comp
        if which == 0:
            yv = val - gap_comp
            t = gap_total + yv
            gap_comp = (t - gap_total) - yv
            gap_total = t
        else:
            yv = val - wit_comp
            t = wit_total + yv
            wit_comp = (t - wit_total) - yv
            wit_total = t

    for w in iter_windows(v, window):
        a = np.asarray(w[:-1], dtype=float)
        b = np.asarray(w[1:], dtype=float)
        g = b - a
        gaps_seen += len(g)
        pos = g > 0
        if not pos.any():
            continue
        a, b, g = a[pos], b[pos], g[pos]
        positive += len(g)
        kadd(float(np.dot(g, g)), 0)

        ints_inside = np.floor(a) + 1.0 < b          # integer strictly inside?
        small = (g < _VEC_MIN_GAP) | (b >= _VEC_MAX_VALUE)
        slow = ints_inside | small
        fast = ~slow
        if fast.any():
            h = _witness_open_noncrossing(a[fast], b[fast])
            # containment check doubles as the emptiness proof
            kf = (-np.log2(h)).round().astype(np.int64)
            c = np.floor(np.ldexp(a[fast], kf)) + 1.0
            s_lo = np.ldexp(c, -kf)
            s_hi = np.ldexp(c + 1.0, -kf)
            bad = (s_lo <= a[fast]) | (s_hi > b[fast])
            if bad.any():
                raise AuditError("non-empty witness interval (containment failed)")
            kadd(float(np.dot(h, h)), 1)
        if slow.any():
            for ai, bi in zip(a[slow], b[slow]):
                wsq, crossed = _witness_pieces_exact(float(ai), float(bi))
                kadd(wsq, 1)
                crossing += crossed
                if crossed:
                    cross_gap_sq += float(bi - ai) ** 2
                    cross_wit_sq += wsq

    holds = gap_total <= 16.0 * wit_total
    return WitnessAudit(
        gap_sum_sq=gap_total,
        witness_sum_sq=wit_total,
        holds=holds,
        gap_count=gaps_seen,
        positive_gap_count=positive,
        crossing_count=crossing,
        crossing_gap_sum_sq=cross_gap_sq,
        crossing_witness_sum_sq=cross_wit_sq,
    )


# ---------------------------------------------------------------------------
# Empty-interval survey
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurveyRow:
    dist_class: DistanceClass
    k: int
    count_empty: int
    sum_sq: float


def default_k_max(n: int) -> int:
    """Levels through (4/7)*log2(n) plus eight extra for the tail."""
    return math.ceil((4.0 / 7.0) * math.log2(n)) + 8


def empty_canonical_survey(
    spectrum: DistanceSpectrum, n: int, k_max: int
) -> list[SurveyRow]:
    """Count empty canonical intervals per (distance class, level).

    At level k the canonical cells over all j tile [1, J_end) uniformly with
    step 2^-k (integers are multiples of every such step), so empty-cell
    counts are total cells minus occupied cells, where occupied cells are
    the distinct values of floor(d * 2^k).  A unit interval with no
    distances therefore contributes its full complement of cells at every
    level without being enumerated.
    """
    if not (0 <= k_max <= 40):
        raise ConfigError(f"k_max must be in [0, 40], got {k_max}")
    v = spectrum.values
    D = nominal_diameter(n)
    d_max = spectrum.d_max
    J_end = max(math.ceil(D), math.floor(d_max) + 1)
    if math.ldexp(J_end, k_max) >= 2.0**53:
        raise ConfigError("k_max too deep for this spectrum range (cell ids inexact)")

    # class of a unit interval [j, j+1) by its left endpoint, clamped to [1, D]
    j_mod_hi = math.floor(1.96 * float(n) ** (4.0 / 7.0))
    j_large_hi = math.floor(D - 3.0)
    ranges = [
        (DistanceClass.MODERATE, 1, j_mod_hi),
        (DistanceClass.LARGE, j_mod_hi + 1, j_large_hi),
        (DistanceClass.EXTRA_LARGE, j_large_hi + 1, J_end - 1),
    ]

    rows: list[SurveyRow] = []
    for cls, ja, jb in ranges:
        if jb < ja:
            for k in range(k_max + 1):
                rows.append(SurveyRow(cls, k, 0, 0.0))
            continue
        i0 = int(np.searchsorted(v, float(ja), side="left"))
        i1 = int(np.searchsorted(v, float(jb + 1), side="left"))
        sub = v[i0:i1]
        units = jb - ja + 1
        for k in range(k_max + 1):
            total = units << k
            occupied = _distinct_cells(sub, k)
            empty = total - occupied
            rows.append(SurveyRow(cls, k, empty, empty * math.ldexp(1.0, -2 * k)))
    return rows


def _distinct_cells(sorted_vals: np.ndarray, k: int, window: int = 1 << 24) -> int:
    if len(sorted_vals) == 0:
        return 0
    count = 0
    prev_cell = -1.0
    for i in range(0, len(sorted_vals), window):
        cells = np.floor(np.ldexp(sorted_vals[i:i + window], k))
        count += 1 + int(np.count_nonzero(np.diff(cells)))
        if i and cells[0] == prev_cell:
            count -= 1
        prev_cell = cells[-1]
    return count


def survey_to_csv(rows: Iterable[SurveyRow], path: str) -> None:
    with open(path, "w") as fh:
        fh.write("class,k,count_empty,sum_sq\n")
        for r in rows:
            fh.write(f"{r.dist_class.value},{r.k},{r.count_empty},{r.sum_sq!r}\n")
