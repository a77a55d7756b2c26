import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combcache.constructions import DirectParams, direct_cpda, mn_pda
from combcache.errors import StructuralError
from combcache.pda import (
    ColumnLabel,
    PdaArray,
    array_from_dict,
    array_to_dict,
    canonicalize,
    dumps_array,
    find_useless_stars,
    load_array,
    network_shape,
    verify_cpda,
    verify_pda,
)

EXAMPLE_PDA = [
    [None, None, None, 1, 2, 3],
    [None, 1, 2, None, None, 4],
    [1, None, 3, None, 4, None],
    [2, 3, None, 4, None, None],
]


def brute_is_pda(entries):
    """Definition-level check, quadratic in cells."""
    F, K = len(entries), len(entries[0])
    stars = [sum(entries[j][k] is None for j in range(F)) for k in range(K)]
    if len(set(stars)) != 1:
        return False
    cells = [(j, k) for j in range(F) for k in range(K) if entries[j][k] is not None]
    for a, (j1, k1) in enumerate(cells):
        for j2, k2 in cells[a + 1:]:
            if entries[j1][k1] != entries[j2][k2]:
                continue
            if j1 == j2 or k1 == k2:
                return False
            if entries[j1][k2] is not None or entries[j2][k1] is not None:
                return False
    return True


def brute_useless(entries):
    F, K = len(entries), len(entries[0])
    out = set()
    for j in range(F):
        for k in range(K):
            if entries[j][k] is not None:
                continue
            row = {v for v in entries[j] if v is not None}
            col = {entries[i][k] for i in range(F) if entries[i][k] is not None}
            if not row & col:
                out.add((j, k))
    return out


random_grids = st.integers(1, 5).flatmap(
    lambda F: st.integers(1, 5).flatmap(
        lambda K: st.lists(
            st.lists(st.one_of(st.none(), st.integers(1, 4)), min_size=K, max_size=K),
            min_size=F,
            max_size=F,
        )
    )
)


def test_example_pda_params():
    report = verify_pda(PdaArray.from_entries(EXAMPLE_PDA))
    assert report.is_pda
    assert report.params == (6, 4, 2, 4)
    assert report.summary() == "(6,4,2,4) PDA"


def test_from_entries_rejects_ragged_and_nonpositive():
    with pytest.raises(StructuralError, match="ragged"):
        PdaArray.from_entries([[None, 1], [1]])
    with pytest.raises(StructuralError):
        PdaArray.from_entries([[0, None]])
    with pytest.raises(StructuralError):
        PdaArray.from_entries([[1.5, None]])
    with pytest.raises(StructuralError):
        PdaArray.from_entries([])


def test_star_string_and_none_agree():
    a = PdaArray.from_entries([["*", 1], [1, "*"]])
    assert a == PdaArray.from_entries([[None, 1], [1, None]])
    assert str(a) == "* 1\n1 *"


def test_c1_violation_reported():
    report = verify_pda(PdaArray.from_entries([[None, 1], [1, 2]]))
    assert not report.is_pda
    assert report.violations[0].axiom == "C1"
    assert report.Z is None


def test_c3_same_row_certificate():
    report = verify_pda(PdaArray.from_entries([[1, 1], [None, None]]))
    (v,) = report.violations
    assert v.axiom == "C3" and "row 1" in v.detail
    assert v.cells == ((1, 1), (1, 2))


def test_c3_cross_entries_certificate():
    # the 2x2 subarray of the two 1s has an integer where a star is required
    report = verify_pda(PdaArray.from_entries([[1, 2], [2, 1]]))
    assert not report.is_pda
    v = report.violations[0]
    assert v.axiom == "C3"
    assert len(v.cells) == 4


def test_c2_vacuous_after_renumbering():
    report = verify_pda(PdaArray.from_entries([[None, 7], [7, None]]))
    assert report.is_pda and report.S == 1


@settings(max_examples=1000, deadline=None)
@given(random_grids)
def test_verify_pda_matches_definition(entries):
    report = verify_pda(PdaArray.from_entries(entries))
    assert report.is_pda == brute_is_pda(entries)


@settings(max_examples=300, deadline=None)
@given(random_grids)
def test_useless_stars_match_definition(entries):
    # a star is useless iff it sits in no [[s, *], [*, s]] pattern
    array = PdaArray.from_entries(entries)
    if not brute_is_pda(entries):
        return
    mask = find_useless_stars(array).mask
    assert {tuple(x) for x in np.argwhere(mask)} == brute_useless(entries)


@settings(max_examples=200, deadline=None)
@given(random_grids, st.randoms(use_true_random=False))
def test_canonicalize_invariant_under_relabelling(entries, rnd):
    array = PdaArray.from_entries(entries)
    values = sorted(set(array.integers))
    perm = dict(zip(values, rnd.sample(range(10, 100), len(values))))
    relabelled = PdaArray.from_entries([[perm.get(v) if v else None for v in row] for row in entries])
    assert canonicalize(relabelled) == canonicalize(array)
    assert verify_pda(relabelled).is_pda == verify_pda(array).is_pda


def test_canonicalize_first_occurrence_order():
    a = canonicalize(PdaArray.from_entries([[None, 9, 4], [9, None, None], [4, None, None]]))
    assert a.entries == [[None, 1, 2], [1, None, None], [2, None, None]]


def test_column_label_validation():
    with pytest.raises(StructuralError):
        ColumnLabel((2, 1), 1)
    with pytest.raises(StructuralError):
        ColumnLabel((1, 2), 0)
    assert ColumnLabel((1, 3), 2).relay_mask == 0b101


def test_network_shape_requires_full_cover():
    labels = [ColumnLabel((1, 2), 1), ColumnLabel((1, 3), 1)]
    with pytest.raises(StructuralError, match="2 columns"):
        network_shape(labels)
    assert network_shape(labels + [ColumnLabel((2, 3), 1)]) == (3, 2, 1)


def test_cpda_needs_labels():
    with pytest.raises(StructuralError):
        verify_cpda(mn_pda(3, 1))


def test_c4_violation():
    labels = [ColumnLabel(T, 1) for T in ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))]
    # a valid PDA whose integers each join two disjoint relay sets
    array = PdaArray.from_entries(
        [[1, 2, 3, None, None, None], [None, None, None, 3, 2, 1]], col_labels=labels
    )
    assert verify_pda(array).is_pda
    report = verify_cpda(array)
    assert not report.is_cpda
    assert [v.axiom for v in report.violations] == ["C4"] * 3
    assert report.intersections[1] == frozenset()


def test_table1_report(table1):
    report = verify_cpda(table1)
    assert report.summary() == "(12,6,4,8) CPDA"
    assert (report.mu, report.nu) == (1, 2)
    assert report.uniform_useless_stars == 2
    assert report.nu * report.H == report.mu * report.S


def test_table2_report(table2):
    report = verify_cpda(table2)
    assert report.summary() == "(24,8,4,32) CPDA"
    assert (report.H, report.r, report.u) == (4, 2, 4)


def test_table1_corrupted_star_fails(table1):
    cells = table1.cells.copy()
    j = int(np.flatnonzero(cells[:, 0] == 0)[0])
    cells[j, 0] = 1
    report = verify_cpda(PdaArray(cells, col_labels=table1.col_labels))
    assert not report.is_cpda
    assert report.violations


@pytest.mark.parametrize("p", [(4, 2, 2, 1, 1), (5, 3, 2, 1, 2), (6, 3, 3, 2, 1), (5, 2, 2, 0, 1)])
def test_relay_regularity_identity(p):
    report = verify_cpda(direct_cpda(DirectParams(*p)))
    if report.is_regular:
        assert report.nu * report.H == report.mu * report.S


def test_json_round_trip(tmp_path, table1):
    path = tmp_path / "a.json"
    path.write_text(dumps_array(table1))
    back = load_array(path)
    assert back == table1
    assert back.symbol_labels == {int(s): lab for s, lab in array_to_dict(table1)["labels"].items()}
    assert json.loads(dumps_array(table1))["entries"] == table1.entries


def test_json_declared_shape_checked():
    with pytest.raises(StructuralError, match="declared F"):
        array_from_dict({"F": 3, "entries": [[None, 1], [1, None]]})
    with pytest.raises(StructuralError):
        array_from_dict({"rows": []})


def test_large_random_pda_against_oracle():
    # MN arrays and random relabellings stay PDAs; single swaps usually break them
    rng = random.Random(7)
    for K, t in ((5, 2), (6, 3), (7, 2)):
        a = mn_pda(K, t)
        entries = a.entries
        assert verify_pda(a).is_pda == brute_is_pda(entries) is True
        j1, j2 = rng.sample(range(a.F), 2)
        entries[j1], entries[j2] = entries[j2], entries[j1]
        entries[j1] = entries[j1][1:] + entries[j1][:1]
        assert verify_pda(PdaArray.from_entries(entries)).is_pda == brute_is_pda(entries)
