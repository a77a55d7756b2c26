"""Closed-form parameters of the caching schemes, in exact arithmetic.

All equality-checked quantities are ``int`` or ``Fraction``.  Only the
logarithm of a subpacketization at non-integer MN parameter ``t`` goes
through log-gamma (``mpmath`` at 60 digits) and is flagged approximate.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional

import mpmath

from .constructions import DirectParams
from .errors import ConventionError, EmptySchemeError
from .pda import CpdaReport

LOG_DPS = 60


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero outside ``0 <= k <= n``."""
    if n < 0 or k < 0 or k > n:
        return 0
    return comb(n, k)


def ln_int(n: int) -> mpmath.mpf:
    with mpmath.workdps(LOG_DPS):
        return +mpmath.log(mpmath.mpf(n))


def _mpf(x) -> mpmath.mpf:
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


def ln_binom(n, k) -> mpmath.mpf:
    """``ln C(n, k)`` through log-gamma; defined for real ``0 <= k <= n``."""
    with mpmath.workdps(LOG_DPS):
        n, k = _mpf(n), _mpf(k)
        return +(mpmath.loggamma(n + 1) - mpmath.loggamma(k + 1) - mpmath.loggamma(n - k + 1))


@dataclass(frozen=True)
class SchemeParams:
    scheme_id: str
    K: int
    memory_ratio: Fraction
    load: Fraction
    subpacketization: Optional[int]
    ln_subpacketization: mpmath.mpf
    Z: Optional[int] = None
    S: Optional[int] = None
    Z_prime: Optional[int] = None
    mu: Optional[int] = None
    u: Optional[int] = None
    t: Optional[Fraction] = None
    approximate: bool = False

    def __post_init__(self):
        if not 0 <= self.memory_ratio < 1:
            raise ValueError(f"memory ratio {self.memory_ratio} outside [0, 1)")
        if self.load < 0:
            raise ValueError(f"negative load {self.load}")


@dataclass(frozen=True)
class _DirectCounts:
    F1: int
    Z_bar: int
    S: int
    Z_prime: int

    @property
    def Z(self) -> int:
        return self.F1 - self.Z_bar

    @property
    def reduced_rows(self) -> int:
        return self.F1 - self.Z_prime


def nonstar_count(H: int, r: int, a: int, omega: int, lam: int) -> int:
    """Rows ``f`` agreeing with a column's ``b`` in exactly ``lam`` relay positions."""
    lo, hi = max(0, lam - r + omega), min(omega, lam)
    return sum(
        binom(omega, l1) * binom(r - omega, lam - l1) * binom(H - r, a - omega + 2 * l1 - lam)
        for l1 in range(lo, hi + 1)
    )


def direct_counts(p: DirectParams) -> _DirectCounts:
    H, r, a, w, lam = p.as_tuple()
    lo, hi = max(0, lam - r + w), min(w, lam)
    S = 0
    for l1 in range(lo, hi + 1):
        wt = a + r - 2 * w + 2 * l1 - lam
        S += binom(H, wt) * binom(H - wt, l1) * binom(wt, lam - l1)
    z_prime = sum(nonstar_count(H, r, a, w, lp) for lp in range(lam))
    return _DirectCounts(F1=comb(H, a), Z_bar=nonstar_count(H, r, a, w, lam), S=S, Z_prime=z_prime)


def occurrence_count(p: DirectParams, zeros_in_C: int) -> int:
    """How often an integer ``(e, C)`` with ``|C_1| = zeros_in_C`` occurs in the direct CPDA."""
    H, r, a, w, lam = p.as_tuple()
    l1 = zeros_in_C
    return binom(H - (a + r - 2 * w + 3 * l1 - lam), w - l1) * binom(
        a + r - 2 * w + 3 * l1 - 2 * lam, r - w - (lam - l1)
    )


def free_relay_choices(p: DirectParams) -> bool:
    """Whether every integer that actually occurs leaves a real choice of relays outside ``C``.

    An integer ``(e, C)`` with ``|C_1| = l1`` occurs at columns whose relay set
    adds ``omega - l1`` relays where ``e`` is 0 and ``r - omega - lambda + l1``
    where ``e`` is 1.  When either pick is forced (it takes every candidate),
    those relays sit in every column holding the integer, so ``I_s`` grows
    beyond ``C`` and the counting closed forms stop applying.
    """
    H, r, a, w, lam = p.as_tuple()
    for l1 in range(max(0, lam - r + w), min(w, lam) + 1):
        wt = a + r - 2 * w + 2 * l1 - lam
        if binom(H, wt) * binom(H - wt, l1) * binom(wt, lam - l1) == 0:
            continue
        pools = (
            (w - l1, H - (a + r - 2 * w + 3 * l1 - lam)),
            (r - w - lam + l1, a + r - 2 * w + 3 * l1 - 2 * lam),
        )
        if any(k and k >= n for k, n in pools):
            return False
    return True


def _checked_counts(p: DirectParams) -> _DirectCounts:
    c = direct_counts(p)
    if c.Z_bar == 0:
        raise EmptySchemeError(f"no non-star entries for {p.as_tuple()}")
    if c.reduced_rows <= 0:
        raise EmptySchemeError(f"C(H,a) - Z' = {c.reduced_rows} for {p.as_tuple()}")
    return c


def scheme_a_params(p: DirectParams) -> SchemeParams:
    """Direct CPDA with useless stars removed by MDS-coded placement."""
    c = _checked_counts(p)
    F = p.lam * c.reduced_rows
    return SchemeParams(
        scheme_id="A",
        K=p.K,
        memory_ratio=1 - Fraction(c.Z_bar, c.reduced_rows),
        load=Fraction(c.S, p.H * c.reduced_rows),
        subpacketization=F,
        ln_subpacketization=ln_int(F),
        Z=c.Z,
        S=c.S,
        Z_prime=c.Z_prime,
        mu=p.lam,
        u=p.u,
    )


def scheme_b_params(p: DirectParams, K2: int, t2: int) -> SchemeParams:
    """Direct CPDA hybridised with the ``(K2, t2)`` MN PDA, MDS-coded placement."""
    if not 0 < t2 < K2:
        raise ValueError(f"need 0 < t2 < K2, got K2={K2}, t2={t2}")
    c = _checked_counts(p)
    F2, Z2, S2 = comb(K2, t2), comb(K2 - 1, t2 - 1), comb(K2, t2 + 1)
    F = p.lam * F2 * c.reduced_rows
    return SchemeParams(
        scheme_id="B",
        K=K2 * p.K,
        memory_ratio=1 - Fraction(K2 - t2, K2) * Fraction(c.Z_bar, c.reduced_rows),
        load=Fraction(K2 - t2, t2 + 1) * Fraction(c.S, p.H * c.reduced_rows),
        subpacketization=F,
        ln_subpacketization=ln_int(F),
        Z=c.Z * F2 + (c.F1 - c.Z) * Z2,
        S=c.S * S2,
        Z_prime=c.Z_prime * F2,
        mu=p.lam,
        u=K2 * p.u,
    )


def zy_params(H: int, r: int, u: int, memory_ratio, exact: bool = True) -> SchemeParams:
    """MDS split over the relays plus one MN scheme per relay.

    ``t = u*C(H-1, r-1) * M/N``.  The load formula is rational for any memory
    ratio; the subpacketization ``r*C(K~, t)`` needs integer ``t``.  With
    ``exact=False`` a non-integer ``t`` is handled by the log-gamma binomial
    and the result is flagged approximate.
    """
    if not 0 < r < H or u < 1:
        raise ValueError(f"need 0 < r < H and u >= 1, got H={H}, r={r}, u={u}")
    m = Fraction(memory_ratio)
    if not 0 <= m < 1:
        raise ValueError(f"memory ratio {m} outside [0, 1)")
    k_tilde = u * comb(H - 1, r - 1)
    t = k_tilde * m
    load = k_tilde * (1 - m) / (r * (t + 1))
    if t.denominator == 1:
        F = r * comb(k_tilde, int(t))
        return SchemeParams("ZY", u * comb(H, r), m, load, F, ln_int(F), u=u, t=t)
    if exact:
        raise ConventionError(f"t = {t} is not an integer; use the continuous convention")
    with mpmath.workdps(LOG_DPS):
        ln_F = +(mpmath.log(r) + ln_binom(k_tilde, t))
    return SchemeParams("ZY", u * comb(H, r), m, load, None, ln_F, u=u, t=t, approximate=True)


def repeat_baseline_params(base: SchemeParams, u: int) -> SchemeParams:
    """Serve ``u`` copies of a ``u = 1`` network with the base scheme, one after another."""
    if u < 1:
        raise ValueError(f"u must be positive, got {u}")
    if base.u not in (None, 1):
        raise ValueError(f"base scheme must serve u = 1, got u = {base.u}")
    return dataclasses.replace(base, scheme_id="Repeat", K=base.K * u, load=base.load * u, u=u)


def params_from_report(report: CpdaReport, coded: bool = True, scheme_id: str = "CPDA") -> SchemeParams:
    """Scheme parameters of a verified regular CPDA.

    Uncoded placement caches every star; coded placement drops the (uniform)
    useless stars and MDS-codes the remaining rows.
    """
    if not report.is_cpda:
        raise ValueError("array is not a CPDA")
    if not report.is_regular:
        raise ValueError("load formula needs constant |I_s| and a constant per-relay count")
    z_prime = 0
    if coded:
        z_prime = report.uniform_useless_stars
        if z_prime is None:
            raise ValueError("useless stars are not uniform across columns")
    rows = report.F - z_prime
    F = report.mu * rows
    return SchemeParams(
        scheme_id=scheme_id,
        K=report.K,
        memory_ratio=Fraction(report.Z - z_prime, rows),
        load=Fraction(report.S, report.H * rows),
        subpacketization=F,
        ln_subpacketization=ln_int(F),
        Z=report.Z,
        S=report.S,
        Z_prime=z_prime,
        mu=report.mu,
        u=report.u,
    )
