from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from itertools import product
from typing import Optional

import pytest

from combcache.constructions import DirectParams, direct_cpda
from combcache.errors import EmptySchemeError
from combcache.pda import CpdaReport, PdaArray, load_array, verify_cpda
from combcache.schemes import _DirectCounts, direct_counts, occurrence_count

# (criterion id, passed, detail) lines printed at the end of the run
ACCEPTANCE_LINES: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    by_id: dict[int, list[tuple[str, bool, str]]] = {}
    for cid, name, ok, detail in ACCEPTANCE_LINES:
        by_id.setdefault(cid, []).append((name, ok, detail))
    for cid in sorted(by_id):
        parts = by_id[cid]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        details = "; ".join(f"{name}: {detail}" if name else detail for name, _, detail in parts)
        terminalreporter.write_line(f"criterion {cid} {status}: {details}")


@pytest.fixture
def record():
    def _record(cid: int, ok: bool, detail: str, name: str = ""):
        ACCEPTANCE_LINES.append((cid, name, ok, detail))
        print(f"criterion {cid}{' ' + name if name else ''} {'PASS' if ok else 'FAIL'}: {detail}")

    return _record


def data_path(name: str):
    return resources.files("combcache") / "data" / name


@pytest.fixture(scope="session")
def table1() -> PdaArray:
    return load_array(data_path("table1.json"))


@pytest.fixture(scope="session")
def table2() -> PdaArray:
    return load_array(data_path("table2.json"))


@dataclass
class GridPoint:
    params: DirectParams
    array: PdaArray
    report: CpdaReport
    counts: _DirectCounts
    problems: tuple[str, ...]


def grid_params():
    """Every valid direct-construction parameter set with H <= 8, r <= 4, a <= 6."""
    for H, r, a in product(range(2, 9), range(1, 5), range(1, 7)):
        if r >= H or a >= H:
            continue
        for w, lam in product(range(r + 1), range(1, r + 1)):
            yield DirectParams(H, r, a, w, lam)


def closed_form_problems(p: DirectParams, array: PdaArray, report: CpdaReport, c: _DirectCounts) -> tuple[str, ...]:
    """Every way the counted array departs from the closed forms."""
    out = []
    if not report.is_cpda:
        out.append("not a CPDA")
    if report.Z != c.Z:
        out.append(f"Z counted {report.Z} formula {c.Z}")
    if report.S != c.S:
        out.append(f"S counted {report.S} formula {c.S}")
    zp = set(report.useless_star_count_per_column)
    if zp != {c.Z_prime}:
        out.append(f"Z' counted {sorted(zp)} formula {c.Z_prime}")
    gains = report.gains
    bad_g = sum(gains[s] != occurrence_count(p, array.symbol_labels[s].zeros_in_C) for s in gains)
    if bad_g:
        out.append(f"{bad_g} occurrence counts off")
    bad_i = sum(len(v) != p.lam for v in report.intersections.values())
    if bad_i:
        out.append(f"{bad_i} |I_s| != lambda")
    per_relay = [sum(h in v for v in report.intersections.values()) for h in range(1, p.H + 1)]
    if any(n * p.H != p.lam * report.S for n in per_relay):
        out.append(f"relay counts {sorted(set(per_relay))} != lambda*S/H")
    return tuple(out)


@pytest.fixture(scope="session")
def grid() -> dict[tuple, Optional[GridPoint]]:
    """All grid points, ``None`` where the construction has no integer at all."""
    out: dict[tuple, Optional[GridPoint]] = {}
    for p in grid_params():
        try:
            array = direct_cpda(p)
        except EmptySchemeError:
            out[p.as_tuple()] = None
            continue
        report = verify_cpda(array)
        c = direct_counts(p)
        out[p.as_tuple()] = GridPoint(p, array, report, c, closed_form_problems(p, array, report, c))
    return out
