from fractions import Fraction
from math import comb, log

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from combcache.constructions import DirectParams, direct_cpda, mn_pda
from combcache.errors import ConventionError, EmptySchemeError
from combcache.pda import verify_cpda, verify_pda
from combcache.schemes import (
    SchemeParams,
    binom,
    direct_counts,
    free_relay_choices,
    ln_binom,
    occurrence_count,
    params_from_report,
    repeat_baseline_params,
    scheme_a_params,
    scheme_b_params,
    zy_params,
)
from combcache.simulator import scheme_b_array


def test_binom_zero_outside_range():
    assert binom(5, -1) == binom(5, 6) == binom(-1, 0) == 0
    assert binom(5, 2) == 10


@given(st.integers(0, 60), st.integers(0, 60))
def test_ln_binom_matches_integers(n, k):
    if k > n:
        return
    assert abs(float(ln_binom(n, k)) - log(comb(n, k))) < 1e-9


def test_ln_binom_interpolates():
    # C(4, 1/2) lies between C(4,0) and C(4,1) on the log scale
    v = ln_binom(4, Fraction(1, 2))
    assert 0 < v < mpmath.log(4)


def test_table1_counts():
    c = direct_counts(DirectParams(4, 2, 2, 1, 1))
    assert (c.F1, c.Z, c.S, c.Z_prime) == (6, 4, 8, 2)


def test_scheme_a_table1():
    s = scheme_a_params(DirectParams(4, 2, 2, 1, 1))
    assert (s.memory_ratio, s.load, s.subpacketization, s.K) == (Fraction(1, 2), Fraction(1, 2), 4, 12)


def test_scheme_a_matches_counted_report(table1):
    counted = params_from_report(verify_cpda(table1))
    closed = scheme_a_params(DirectParams(4, 2, 2, 1, 1))
    assert (counted.memory_ratio, counted.load, counted.subpacketization) == (
        closed.memory_ratio, closed.load, closed.subpacketization
    )
    uncoded = params_from_report(verify_cpda(table1), coded=False)
    assert (uncoded.memory_ratio, uncoded.load) == (Fraction(2, 3), Fraction(1, 3))


def test_scheme_a_matches_counts_on_free_grid(grid):
    checked = 0
    for g in grid.values():
        if g is None or g.problems or not free_relay_choices(g.params):
            continue
        try:
            closed = scheme_a_params(g.params)
        except EmptySchemeError:
            continue
        counted = params_from_report(g.report)
        assert (counted.memory_ratio, counted.load, counted.subpacketization) == (
            closed.memory_ratio, closed.load, closed.subpacketization
        ), g.params
        checked += 1
    assert checked > 400


def test_occurrence_counts_cover_every_nonstar(grid):
    for g in grid.values():
        if g is None or g.problems:
            continue
        total = sum(occurrence_count(g.params, lab.zeros_in_C) for lab in g.array.symbol_labels.values())
        assert total == g.array.K * (g.array.F - g.report.Z)


def test_scheme_b_small():
    s = scheme_b_params(DirectParams(4, 2, 2, 1, 1), 2, 1)
    assert (s.memory_ratio, s.load, s.subpacketization, s.K, s.u) == (
        Fraction(3, 4), Fraction(1, 4), 8, 24, 4
    )


@pytest.mark.parametrize("p,K2,t2", [((4, 2, 2, 1, 1), 2, 1), ((4, 2, 2, 1, 1), 3, 1), ((6, 3, 3, 1, 1), 3, 2)])
def test_scheme_b_matches_hybrid_report(p, K2, t2):
    closed = scheme_b_params(DirectParams(*p), K2, t2)
    rep = verify_cpda(scheme_b_array(DirectParams(*p), K2, t2))
    counted = params_from_report(rep)
    assert (rep.Z, rep.S, rep.uniform_useless_stars) == (closed.Z, closed.S, closed.Z_prime)
    assert (counted.memory_ratio, counted.load, counted.subpacketization) == (
        closed.memory_ratio, closed.load, closed.subpacketization
    )


def test_scheme_b_rejects_bad_mn():
    with pytest.raises(ValueError):
        scheme_b_params(DirectParams(4, 2, 2, 1, 1), 1, 1)


def test_zy_small_example():
    s = zy_params(4, 2, 2, Fraction(2, 3))
    assert (s.t, s.load, s.subpacketization, s.K) == (4, Fraction(1, 5), 30, 12)


def test_zy_last_t():
    k_tilde = 2 * comb(3, 1)
    s = zy_params(4, 2, 2, Fraction(k_tilde - 1, k_tilde))
    assert s.load == Fraction(1, 2 * k_tilde)


def test_zy_conventions():
    with pytest.raises(ConventionError):
        zy_params(4, 2, 2, Fraction(1, 2) + Fraction(1, 12))
    s = zy_params(4, 2, 2, Fraction(7, 12), exact=False)
    assert s.approximate and s.subpacketization is None
    assert s.load == Fraction(6 * 5, 12) / (2 * Fraction(9, 2))


@given(st.integers(2, 6), st.integers(1, 3), st.integers(1, 3))
def test_zy_load_decreases_in_t(H, r, u):
    if r >= H:
        return
    k_tilde = u * comb(H - 1, r - 1)
    loads = [zy_params(H, r, u, Fraction(t, k_tilde)).load for t in range(k_tilde)]
    assert all(a > b for a, b in zip(loads, loads[1:]))


def test_repeat_baseline():
    base = scheme_a_params(DirectParams(5, 3, 2, 0, 1))
    rep = repeat_baseline_params(base, 3)
    assert (rep.load, rep.K, rep.memory_ratio) == (3 * base.load, 3 * base.K, base.memory_ratio)
    with pytest.raises(ValueError):
        repeat_baseline_params(scheme_a_params(DirectParams(4, 2, 2, 1, 1)), 2)


def test_scheme_params_range():
    with pytest.raises(ValueError):
        SchemeParams("x", 1, Fraction(1), Fraction(0), 1, mpmath.mpf(0))
    with pytest.raises(ValueError):
        SchemeParams("x", 1, Fraction(1, 2), Fraction(-1), 1, mpmath.mpf(0))


def test_empty_scheme():
    with pytest.raises(EmptySchemeError):
        scheme_a_params(DirectParams(4, 2, 1, 0, 2))


def test_params_from_report_needs_cpda():
    with pytest.raises(ValueError):
        params_from_report(verify_pda(mn_pda(3, 1)))


def test_direct_counts_equal_construction_counts_examples():
    # points with free relay choices
    for p in [(5, 2, 2, 1, 1), (6, 3, 3, 1, 2), (7, 3, 2, 2, 1)]:
        params = DirectParams(*p)
        rep = verify_cpda(direct_cpda(params))
        c = direct_counts(params)
        assert (rep.Z, rep.S, rep.uniform_useless_stars) == (c.Z, c.S, c.Z_prime)
