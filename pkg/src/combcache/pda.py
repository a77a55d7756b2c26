"""Placement delivery arrays: data model, axiom verifiers and JSON interchange.

An array is stored as an ``F x K`` integer matrix where ``0`` encodes a star and
positive values are the integers of the alphabet.  The public entry API uses
``None`` for a star, matching the JSON format where ``null`` is a star.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Any, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .errors import StructuralError

STAR = None

Cell = tuple[int, int]


@dataclass(frozen=True, order=True)
class ColumnLabel:
    """User label ``(A, i)``: the relay set a user attaches to and its index there."""

    relay_set: tuple[int, ...]
    user_index: int

    def __post_init__(self):
        rs = tuple(int(h) for h in self.relay_set)
        if not rs or any(h < 1 for h in rs):
            raise StructuralError(f"relay set {rs} must hold positive relay ids")
        if any(x >= y for x, y in zip(rs, rs[1:])):
            raise StructuralError(f"relay set {rs} is not strictly increasing")
        if int(self.user_index) < 1:
            raise StructuralError(f"user index {self.user_index} must be positive")
        object.__setattr__(self, "relay_set", rs)
        object.__setattr__(self, "user_index", int(self.user_index))

    @property
    def relay_mask(self) -> int:
        return sum(1 << (h - 1) for h in self.relay_set)

    def to_json(self) -> dict:
        return {"T": list(self.relay_set), "i": self.user_index}


@dataclass(frozen=True, eq=False)
class PdaArray:
    """An ``F x K`` array over ``{*} U [S]`` with optional row/column/integer labels."""

    cells: np.ndarray
    row_labels: Optional[tuple] = None
    col_labels: Optional[tuple[ColumnLabel, ...]] = None
    symbol_labels: Optional[Mapping[int, Any]] = None

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.int64, copy=True)
        if cells.ndim != 2 or cells.shape[0] == 0 or cells.shape[1] == 0:
            raise StructuralError(f"expected a non-empty 2-D grid, got shape {cells.shape}")
        if (cells < 0).any():
            raise StructuralError("integer entries must be positive")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        F, K = cells.shape
        if self.row_labels is not None:
            object.__setattr__(self, "row_labels", tuple(self.row_labels))
            if len(self.row_labels) != F:
                raise StructuralError(f"{len(self.row_labels)} row labels for {F} rows")
        if self.col_labels is not None:
            labels = tuple(
                lab if isinstance(lab, ColumnLabel) else ColumnLabel(*lab) for lab in self.col_labels
            )
            if len(labels) != K:
                raise StructuralError(f"{len(labels)} column labels for {K} columns")
            if len(set(labels)) != K:
                raise StructuralError("column labels are not pairwise distinct")
            object.__setattr__(self, "col_labels", labels)
        if self.symbol_labels is not None:
            object.__setattr__(self, "symbol_labels", dict(self.symbol_labels))

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[Any]], **labels) -> "PdaArray":
        """Build from nested rows where ``None`` (or ``"*"``) is a star."""
        rows = [list(row) for row in entries]
        if not rows:
            raise StructuralError("array has no rows")
        width = len(rows[0])
        for j, row in enumerate(rows):
            if len(row) != width:
                raise StructuralError(f"ragged grid: row {j + 1} has {len(row)} entries, expected {width}")
        grid = np.zeros((len(rows), width), dtype=np.int64)
        for j, row in enumerate(rows):
            for k, v in enumerate(row):
                if v is None or v == "*":
                    continue
                if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                    raise StructuralError(f"entry ({j + 1},{k + 1}) = {v!r} is neither a star nor a positive integer")
                grid[j, k] = v
        return cls(grid, **labels)

    @property
    def F(self) -> int:
        return self.cells.shape[0]

    @property
    def K(self) -> int:
        return self.cells.shape[1]

    @property
    def entries(self) -> list[list[Optional[int]]]:
        return [[int(v) if v else None for v in row] for row in self.cells]

    @property
    def integers(self) -> list[int]:
        return [int(v) for v in np.unique(self.cells) if v]

    def __getitem__(self, cell: Cell) -> Optional[int]:
        v = int(self.cells[cell])
        return v if v else None

    def __eq__(self, other):
        if not isinstance(other, PdaArray):
            return NotImplemented
        return (
            np.array_equal(self.cells, other.cells)
            and self.col_labels == other.col_labels
            and self.row_labels == other.row_labels
        )

    __hash__ = None

    def __str__(self):
        width = max(1, max(len(str(v)) for v in self.integers)) if self.integers else 1
        return "\n".join(
            " ".join(str(v).rjust(width) if v else "*".rjust(width) for v in row) for row in self.cells
        )


@dataclass(frozen=True)
class Violation:
    """Certificate for a failed axiom: the axiom id plus the minimal witnessing cells.

    Cells are reported 1-based as ``(row, column)``.
    """

    axiom: str
    detail: str
    cells: tuple[Cell, ...] = ()

    def __str__(self):
        return f"{self.axiom}: {self.detail}"


@dataclass(frozen=True)
class CpdaReport:
    is_pda: bool
    is_cpda: bool
    K: int
    F: int
    Z: Optional[int]
    S: int
    occurrences: dict[int, tuple[Cell, ...]]
    intersections: dict[int, frozenset[int]] = field(default_factory=dict)
    mu: Optional[int] = None
    nu: Optional[int] = None
    useless_star_count_per_column: Optional[tuple[int, ...]] = None
    violations: tuple[Violation, ...] = ()
    H: Optional[int] = None
    r: Optional[int] = None
    u: Optional[int] = None

    @property
    def params(self) -> tuple[int, int, Optional[int], int]:
        return (self.K, self.F, self.Z, self.S)

    @property
    def gains(self) -> dict[int, int]:
        """Occurrence count ``g_s`` of every integer."""
        return {s: len(cells) for s, cells in self.occurrences.items()}

    @property
    def uniform_useless_stars(self) -> Optional[int]:
        counts = self.useless_star_count_per_column
        if counts and len(set(counts)) == 1:
            return counts[0]
        return None

    @property
    def is_regular(self) -> bool:
        return self.is_cpda and self.mu is not None and self.nu is not None

    def summary(self) -> str:
        K, F, Z, S = self.params
        if self.is_cpda:
            kind = "CPDA"
        elif self.is_pda:
            kind = "PDA"
        else:
            return f"not a PDA ({len(self.violations)} violation(s))"
        return f"({K},{F},{Z},{S}) {kind}"

    def to_json(self) -> dict:
        return {
            "is_pda": self.is_pda,
            "is_cpda": self.is_cpda,
            "params": {"K": self.K, "F": self.F, "Z": self.Z, "S": self.S},
            "gains": {str(s): g for s, g in self.gains.items()},
            "intersections": {str(s): sorted(v) for s, v in self.intersections.items()},
            "mu": self.mu,
            "nu": self.nu,
            "useless_star_count_per_column": (
                list(self.useless_star_count_per_column)
                if self.useless_star_count_per_column is not None
                else None
            ),
            "violations": [str(v) for v in self.violations],
        }


class UselessStars(NamedTuple):
    mask: np.ndarray
    counts: tuple[int, ...]

    @property
    def positions(self) -> list[list[int]]:
        """1-based row indices of the useless stars, per column."""
        return [[int(j) + 1 for j in np.flatnonzero(col)] for col in self.mask.T]


def _occurrences(cells: np.ndarray) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    rows, cols = np.nonzero(cells)
    if rows.size == 0:
        return {}
    vals = cells[rows, cols]
    order = np.argsort(vals, kind="stable")
    rows, cols, vals = rows[order], cols[order], vals[order]
    keys, starts = np.unique(vals, return_index=True)
    bounds = list(starts[1:]) + [vals.size]
    return {
        int(s): (rows[a:b], cols[a:b]) for s, a, b in zip(keys, starts, bounds)
    }


def _c3_violation(cells: np.ndarray, s: int, rows: np.ndarray, cols: np.ndarray) -> Optional[Violation]:
    g = rows.size
    if g < 2:
        return None
    for axis, name in ((rows, "row"), (cols, "column")):
        _, first, counts = np.unique(axis, return_index=True, return_counts=True)
        if (counts > 1).any():
            dup = axis[first[np.argmax(counts > 1)]]
            i, j = np.flatnonzero(axis == dup)[:2]
            a, b = (int(rows[i]) + 1, int(cols[i]) + 1), (int(rows[j]) + 1, int(cols[j]) + 1)
            return Violation("C3", f"integer {s} occurs twice in {name} {int(dup) + 1}: cells {a} and {b}", (a, b))
    sub = cells[np.ix_(rows, cols)].copy()
    np.fill_diagonal(sub, 0)
    bad = np.argwhere(sub != 0)
    if bad.size == 0:
        return None
    i, j = bad[0]
    a, b = (int(rows[i]) + 1, int(cols[i]) + 1), (int(rows[j]) + 1, int(cols[j]) + 1)
    cross = ((a[0], b[1]), (b[0], a[1]))
    values = [int(cells[c[0] - 1, c[1] - 1]) or "*" for c in cross]
    return Violation(
        "C3",
        f"integer {s} at {a} and {b}: 2x2 subarray has cross entries {values[0]} at {cross[0]} "
        f"and {values[1]} at {cross[1]}, both must be stars",
        (a, b) + cross,
    )


def _useful_mask(cells: np.ndarray) -> np.ndarray:
    """Cells whose row and column share an integer; for a star this is exactly usefulness."""
    rows, cols = np.nonzero(cells)
    F, K = cells.shape
    if rows.size == 0:
        return np.zeros((F, K), dtype=bool)
    _, idx = np.unique(cells[rows, cols], return_inverse=True)
    S = int(idx.max()) + 1
    in_row = np.zeros((F, S), dtype=np.float32)
    in_col = np.zeros((K, S), dtype=np.float32)
    in_row[rows, idx] = 1
    in_col[cols, idx] = 1
    return (in_row @ in_col.T) > 0


def find_useless_stars(array: PdaArray) -> UselessStars:
    """Mark stars that sit in no ``[[s, *], [*, s]]`` 2x2 subarray.

    A star at ``(j, k)`` is useful iff some integer occurs both in row ``j`` and
    in column ``k``; given C3 that pair plus the star forms the pattern.
    """
    stars = array.cells == 0
    mask = stars & ~_useful_mask(array.cells)
    return UselessStars(mask, tuple(int(c) for c in mask.sum(axis=0)))


def verify_pda(array: PdaArray) -> CpdaReport:
    """Check C1-C3 exhaustively.

    Integers are read after dense renumbering, so C2 holds for any integer set;
    S is the number of distinct integers.
    """
    cells = array.cells
    F, K = cells.shape
    violations: list[Violation] = []

    star_counts = (cells == 0).sum(axis=0)
    Z: Optional[int] = int(star_counts[0])
    if (star_counts != star_counts[0]).any():
        k = int(np.argmax(star_counts != star_counts[0]))
        violations.append(
            Violation(
                "C1",
                f"column {k + 1} has {int(star_counts[k])} stars but column 1 has {int(star_counts[0])}",
                ((0, k + 1),),
            )
        )
        Z = None

    occ = _occurrences(cells)
    for s, (rows, cols) in occ.items():
        v = _c3_violation(cells, s, rows, cols)
        if v is not None:
            violations.append(v)

    is_pda = not violations
    occurrences = {
        s: tuple((int(j) + 1, int(k) + 1) for j, k in zip(rows, cols)) for s, (rows, cols) in occ.items()
    }
    useless = find_useless_stars(array).counts if is_pda else None
    return CpdaReport(
        is_pda=is_pda,
        is_cpda=False,
        K=K,
        F=F,
        Z=Z,
        S=len(occ),
        occurrences=occurrences,
        useless_star_count_per_column=useless,
        violations=tuple(violations),
    )


def network_shape(labels: Sequence[ColumnLabel], H: Optional[int] = None) -> tuple[int, int, int]:
    """Infer ``(H, r, u)`` from column labels and check they cover ``C([H], r) x [u]`` exactly."""
    sizes = {len(lab.relay_set) for lab in labels}
    if len(sizes) != 1:
        raise StructuralError(f"relay sets have mixed sizes {sorted(sizes)}")
    (r,) = sizes
    top = max(max(lab.relay_set) for lab in labels)
    if H is None:
        H = top
    elif top > H:
        raise StructuralError(f"relay {top} exceeds H={H}")
    if not r < H:
        raise StructuralError(f"need r < H, got r={r}, H={H}")
    u = max(lab.user_index for lab in labels)
    if len(labels) != u * comb(H, r):
        raise StructuralError(f"{len(labels)} columns but u*C(H,r) = {u}*{comb(H, r)}")
    have = {(lab.relay_set, lab.user_index) for lab in labels}
    for T in combinations(range(1, H + 1), r):
        for i in range(1, u + 1):
            if (T, i) not in have:
                raise StructuralError(f"no column labelled ({set(T)}, {i})")
    return H, r, u


def verify_cpda(array: PdaArray, H: Optional[int] = None) -> CpdaReport:
    """Check C1-C4; also reports ``I_s`` per integer and the regularity constants."""
    if array.col_labels is None:
        raise StructuralError("CPDA verification needs column labels")
    H, r, u = network_shape(array.col_labels, H)
    base = verify_pda(array)

    masks = np.array([lab.relay_mask for lab in array.col_labels], dtype=np.int64)
    intersections: dict[int, frozenset[int]] = {}
    violations = list(base.violations)
    for s, cells in base.occurrences.items():
        cols = np.fromiter((k - 1 for _, k in cells), dtype=np.int64, count=len(cells))
        common = int(np.bitwise_and.reduce(masks[cols]))
        I_s = frozenset(h for h in range(1, H + 1) if common >> (h - 1) & 1)
        intersections[s] = I_s
        if not I_s:
            violations.append(Violation("C4", f"relay sets of the columns holding {s} have empty intersection", cells))

    mu = nu = None
    if intersections:
        sizes = {len(v) for v in intersections.values()}
        if len(sizes) == 1:
            mu = sizes.pop()
        per_relay = {sum(h in v for v in intersections.values()) for h in range(1, H + 1)}
        if len(per_relay) == 1:
            nu = per_relay.pop()

    return CpdaReport(
        is_pda=base.is_pda,
        is_cpda=base.is_pda and len(violations) == len(base.violations),
        K=base.K,
        F=base.F,
        Z=base.Z,
        S=base.S,
        occurrences=base.occurrences,
        intersections=intersections,
        mu=mu,
        nu=nu,
        useless_star_count_per_column=base.useless_star_count_per_column,
        violations=tuple(violations),
        H=H,
        r=r,
        u=u,
    )


def canonicalize(array: PdaArray) -> PdaArray:
    """Renumber integers densely to ``1..S`` in row-major first-occurrence order."""
    cells = array.cells
    flat = cells.ravel()
    nz = np.flatnonzero(flat)
    if nz.size == 0:
        return array
    keys, first = np.unique(flat[nz], return_index=True)
    ordered = keys[np.argsort(first)]
    lookup = {int(old): new for new, old in enumerate(ordered, start=1)}
    out = np.zeros_like(cells)
    remap = np.zeros(int(keys.max()) + 1, dtype=np.int64)
    remap[ordered] = np.arange(1, ordered.size + 1)
    out[cells != 0] = remap[cells[cells != 0]]
    labels = None
    if array.symbol_labels is not None:
        labels = {lookup[old]: lab for old, lab in array.symbol_labels.items() if old in lookup}
    return PdaArray(out, array.row_labels, array.col_labels, labels)


# --- JSON interchange -------------------------------------------------------

def _label_to_json(label: Any) -> Any:
    to_json = getattr(label, "to_json", None)
    return to_json() if to_json else label


def array_to_dict(array: PdaArray) -> dict:
    out: dict[str, Any] = {"F": array.F, "K": array.K, "entries": array.entries}
    if array.col_labels is not None:
        out["col_labels"] = [lab.to_json() for lab in array.col_labels]
    if array.row_labels is not None:
        out["row_labels"] = [_label_to_json(lab) for lab in array.row_labels]
    if array.symbol_labels is not None:
        out["labels"] = {str(s): _label_to_json(lab) for s, lab in sorted(array.symbol_labels.items())}
    return out


def array_from_dict(data: Mapping[str, Any]) -> PdaArray:
    try:
        entries = data["entries"]
    except (KeyError, TypeError):
        raise StructuralError("array JSON needs an 'entries' field") from None
    if not isinstance(entries, list) or not all(isinstance(row, list) for row in entries):
        raise StructuralError("'entries' must be a list of rows")
    col_labels = None
    if data.get("col_labels") is not None:
        try:
            col_labels = tuple(ColumnLabel(tuple(c["T"]), c["i"]) for c in data["col_labels"])
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"bad column label: {exc}") from None
    labels = data.get("labels")
    if labels is not None:
        labels = {int(s): lab for s, lab in labels.items()}
    array = PdaArray.from_entries(
        entries, row_labels=data.get("row_labels"), col_labels=col_labels, symbol_labels=labels
    )
    for key, actual in (("F", array.F), ("K", array.K)):
        if key in data and data[key] != actual:
            raise StructuralError(f"declared {key}={data[key]} but grid has {actual}")
    return array


def dumps_array(array: PdaArray) -> str:
    """Serialize with one grid row per line so fixtures stay diff-friendly."""
    data = array_to_dict(array)
    entries = data.pop("entries")
    head = json.dumps(data, indent=1)[:-2]
    rows = ",\n  ".join(json.dumps(row) for row in entries)
    sep = "," if data else ""
    return f'{head}{sep}\n "entries": [\n  {rows}\n ]\n}}\n'


def load_array(path: str | Path) -> PdaArray:
    with open(path) as fh:
        return array_from_dict(json.load(fh))


def dump_array(array: PdaArray, path: str | Path) -> None:
    Path(path).write_text(dumps_array(array))

