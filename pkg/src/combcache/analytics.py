"""Closed-form comparison of the CPDA schemes against the ZY scheme, and
memory sweeps for the load/subpacketization tradeoff curves.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from math import comb
from typing import Iterable, Optional, Sequence

import mpmath

from .constructions import DirectParams
from .errors import EmptySchemeError
from .schemes import (
    LOG_DPS,
    SchemeParams,
    binom,
    ln_int,
    repeat_baseline_params,
    scheme_a_params,
    scheme_b_params,
    zy_params,
)

COMPARE_HEADER = ("H", "r", "a", "K2", "t2", "K", "M_over_N", "ratio_R", "ln_F_ratio", "convention")
SWEEP_HEADER = ("scheme", "M_over_N", "load", "subpacketization", "K")
SCHEMES = ("ZY", "B", "A", "Repeat")
DECIMAL_PLACES = 10


def to_decimal(x: Fraction, digits: int = 50) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = digits
        return Decimal(x.numerator) / Decimal(x.denominator)


def mpf_to_decimal(x: mpmath.mpf) -> Decimal:
    with mpmath.workdps(LOG_DPS):
        return Decimal(mpmath.nstr(x, 50, min_fixed=-mpmath.inf, max_fixed=mpmath.inf))


def fmt(x: Decimal, places: int = DECIMAL_PLACES) -> str:
    return str(x.quantize(Decimal(1).scaleb(-places)))


def specialize_lambda_omega_1(H: int, r: int, a: int) -> SchemeParams:
    """Scheme A at ``lambda = omega = 1`` from the specialised closed forms."""
    if not 2 <= r < H or not 2 <= a < H:
        raise ValueError(f"need 2 <= r < H and 2 <= a < H, got H={H}, r={r}, a={a}")
    F = comb(H, a) - binom(H - r, a - 1)
    missing = binom(H - r, a) + (r - 1) * binom(H - r, a - 2)
    if missing == 0 or F <= 0:
        raise EmptySchemeError(f"degenerate lambda=omega=1 scheme for H={H}, r={r}, a={a}")
    m = 1 - Fraction(missing, F)
    gain = binom(H, a + r - 1) * (H - a - r + 1) + binom(H, a + r - 3) * (a + r - 3)
    load = (1 - m) / H * Fraction(gain, missing)
    return SchemeParams("A", r * comb(H, r), m, load, F, ln_int(F), u=r, mu=1)


@dataclass(frozen=True)
class ComparisonRow:
    H: int
    r: int
    a: int
    K2: Optional[int]
    t2: Optional[int]
    K: int
    memory_ratio: Fraction
    ratio_R_exact: Fraction
    ln_F_ratio: Decimal
    convention: str

    @property
    def ratio_R(self) -> Decimal:
        return to_decimal(self.ratio_R_exact)

    def csv_fields(self) -> list[str]:
        return [
            str(self.H),
            str(self.r),
            str(self.a),
            "" if self.K2 is None else str(self.K2),
            "" if self.t2 is None else str(self.t2),
            str(self.K),
            str(self.memory_ratio),
            fmt(self.ratio_R),
            fmt(self.ln_F_ratio),
            self.convention,
        ]


def compare_row(
    H: int,
    r: int,
    a: int,
    K2: Optional[int] = None,
    t2: Optional[int] = None,
    convention: str = "continuous",
) -> ComparisonRow:
    """Scheme A (or B when ``K2``/``t2`` given) at ``lambda = omega = 1`` against
    ZY evaluated at the same memory ratio and number of users."""
    if convention not in ("exact", "continuous"):
        raise ValueError(f"unknown convention {convention!r}")
    if (K2 is None) != (t2 is None):
        raise ValueError("K2 and t2 go together")
    p = DirectParams(H, r, a, 1, 1)
    scheme = scheme_a_params(p) if K2 is None else scheme_b_params(p, K2, t2)
    zy = zy_params(H, r, scheme.u, scheme.memory_ratio, exact=convention == "exact")
    with mpmath.workdps(LOG_DPS):
        ln_ratio = zy.ln_subpacketization - scheme.ln_subpacketization
    return ComparisonRow(
        H=H,
        r=r,
        a=a,
        K2=K2,
        t2=t2,
        K=scheme.K,
        memory_ratio=scheme.memory_ratio,
        ratio_R_exact=scheme.load / zy.load,
        ln_F_ratio=mpf_to_decimal(ln_ratio),
        convention=convention,
    )


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    K: int
    memory_ratio: Fraction
    load: Fraction
    subpacketization: int
    config: tuple

    def csv_fields(self) -> list[str]:
        return [self.scheme, str(self.memory_ratio), str(self.load), str(self.subpacketization), str(self.K)]


def _frontier(rows: Iterable[SweepRow]) -> list[SweepRow]:
    """Keep, in increasing memory ratio, only points that lower the best load so far."""
    best: dict[Fraction, SweepRow] = {}
    for row in rows:
        cur = best.get(row.memory_ratio)
        if cur is None or (row.load, row.subpacketization) < (cur.load, cur.subpacketization):
            best[row.memory_ratio] = row
    out: list[SweepRow] = []
    for m in sorted(best):
        if not out or best[m].load < out[-1].load:
            out.append(best[m])
    return out


def _direct_points(H: int, r: int, omegas: Iterable[int], a_max: int, lam_max: int):
    for w in omegas:
        for a in range(1, min(a_max, H - 1) + 1):
            for lam in range(1, min(lam_max, r) + 1):
                yield DirectParams(H, r, a, w, lam)


def _usable(params: SchemeParams) -> bool:
    return 0 < params.memory_ratio < 1


def sweep_memory(
    H: int,
    r: int,
    u: int,
    schemes: Sequence[str] = SCHEMES,
    a_max: Optional[int] = None,
    lam_max: Optional[int] = None,
) -> list[SweepRow]:
    """Tradeoff points of each scheme for an ``(H, r, u)`` network.

    Scheme A uses ``omega`` with ``C(r, omega) = u``; Scheme B every
    ``omega`` with ``u = K2 * C(r, omega)``, ``K2 >= 2``; ZY every integer
    ``t``; the repetition baseline repeats the ``u = 1`` direct scheme
    (``omega`` in ``{0, r}``) ``u`` times.  Each series is reduced to its
    Pareto frontier.
    """
    unknown = set(schemes) - set(SCHEMES)
    if unknown:
        raise ValueError(f"unknown schemes {sorted(unknown)}")
    a_max = H - 1 if a_max is None else a_max
    lam_max = r if lam_max is None else lam_max
    rows: list[SweepRow] = []

    def add(scheme: str, params: SchemeParams, config: tuple, series: list):
        if _usable(params):
            series.append(SweepRow(scheme, params.K, params.memory_ratio, params.load, params.subpacketization, config))

    for scheme in schemes:
        series: list[SweepRow] = []
        if scheme == "ZY":
            k_tilde = u * comb(H - 1, r - 1)
            for t in range(1, k_tilde):
                add(scheme, zy_params(H, r, u, Fraction(t, k_tilde)), (t,), series)
        elif scheme in ("A", "Repeat"):
            omegas = [w for w in range(r + 1) if comb(r, w) == (u if scheme == "A" else 1)]
            for p in _direct_points(H, r, omegas, a_max, lam_max):
                try:
                    params = scheme_a_params(p)
                except EmptySchemeError:
                    continue
                if scheme == "Repeat":
                    params = repeat_baseline_params(params, u)
                add(scheme, params, p.as_tuple(), series)
        elif scheme == "B":
            for w in range(r + 1):
                if u % comb(r, w) or u // comb(r, w) < 2:
                    continue
                K2 = u // comb(r, w)
                for p in _direct_points(H, r, [w], a_max, lam_max):
                    for t2 in range(1, K2):
                        try:
                            params = scheme_b_params(p, K2, t2)
                        except EmptySchemeError:
                            continue
                        add(scheme, params, p.as_tuple() + (K2, t2), series)
        rows.extend(_frontier(series))
    if not rows:
        raise ValueError(f"empty grid for H={H}, r={r}, u={u}, schemes={list(schemes)}")
    return rows


def matched_ratio_pairs(rows: Sequence[SweepRow], chain: Sequence[str] = SCHEMES):
    """``(lower, higher)`` row pairs at exactly equal memory ratios, for every
    ordered pair of schemes in ``chain`` (expected load order, smallest first)."""
    by_scheme: dict[str, dict[Fraction, SweepRow]] = {}
    for row in rows:
        by_scheme.setdefault(row.scheme, {})[row.memory_ratio] = row
    pairs = []
    for i, lo in enumerate(chain):
        for hi in chain[i + 1:]:
            a, b = by_scheme.get(lo, {}), by_scheme.get(hi, {})
            pairs.extend((a[m], b[m]) for m in sorted(a.keys() & b.keys()))
    return pairs


def write_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()

