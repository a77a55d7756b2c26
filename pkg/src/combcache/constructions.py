"""Array constructions: the MN PDA, the direct CPDA over constant-weight
binary vectors, and the hybrid product of a CPDA with a PDA.

Ordering conventions (fixed so golden tables can be compared cell by cell):

* direct CPDA rows: weight-``a`` vectors ``f`` in increasing big-endian value;
* direct CPDA columns: relay sets ``T`` in lexicographic order, then the
  vectors ``b`` in increasing big-endian value; the user index of a column is
  the 1-based rank of ``b``;
* integers are numbered by first occurrence in row-major order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .errors import EmptySchemeError, StructuralError
from .pda import ColumnLabel, PdaArray, verify_cpda, verify_pda


@dataclass(frozen=True)
class DirectParams:
    """Parameters ``(H, r, a, omega, lambda)`` of the direct construction.

    ``omega = 0`` is accepted as well (it yields the u = 1 strongly coloring
    array); ``lam`` is the agreement count ``lambda``.
    """

    H: int
    r: int
    a: int
    omega: int
    lam: int

    def __post_init__(self):
        H, r, a, w, lam = self.H, self.r, self.a, self.omega, self.lam
        if min(H, r, a, lam) < 1 or w < 0:
            raise ValueError(f"parameters must be positive integers (omega >= 0): {self}")
        if not max(w, lam) <= r < H:
            raise ValueError(f"need max(omega, lambda) <= r < H, got {self}")
        if not a < H:
            raise ValueError(f"need a < H, got {self}")

    @property
    def u(self) -> int:
        return comb(self.r, self.omega)

    @property
    def K(self) -> int:
        return comb(self.r, self.omega) * comb(self.H, self.r)

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.H, self.r, self.a, self.omega, self.lam)


@dataclass(frozen=True)
class NonStarLabel:
    """Native label ``(e, C)`` of a direct-CPDA integer; ``C`` is 1-based."""

    e: tuple[int, ...]
    C: tuple[int, ...]

    @property
    def zeros_in_C(self) -> int:
        """``|C_1|``: positions of ``C`` where ``e`` (equivalently ``f``) is 0."""
        return sum(1 for i in self.C if self.e[i - 1] == 0)

    def to_json(self) -> dict:
        return {"e": "".join(map(str, self.e)), "C": list(self.C)}

    def __str__(self):
        return "".join(map(str, self.e)) + "," + "".join(map(str, self.C))


def weight_vectors(n: int, w: int) -> list[tuple[int, ...]]:
    """All binary ``n``-vectors of weight ``w`` in increasing big-endian value."""
    return sorted(tuple(int(i in ones) for i in range(n)) for ones in combinations(range(n), w))


def colex_subsets(n: int, t: int) -> list[tuple[int, ...]]:
    return sorted(combinations(range(1, n + 1), t), key=lambda c: c[::-1])


def mn_pda(K: int, t: int) -> PdaArray:
    """The ``(K, C(K,t), C(K-1,t-1), C(K,t+1))`` MN PDA.

    Row ``T`` (a ``t``-subset) has a star in column ``k`` iff ``k in T``;
    otherwise the entry is the colex rank of ``T + {k}``.
    """
    if not 0 < t < K:
        raise ValueError(f"need 0 < t < K, got K={K}, t={t}")
    rows = colex_subsets(K, t)
    rank = {s: n for n, s in enumerate(colex_subsets(K, t + 1), start=1)}
    cells = np.zeros((len(rows), K), dtype=np.int64)
    for j, T in enumerate(rows):
        for k in range(1, K + 1):
            if k not in T:
                cells[j, k - 1] = rank[tuple(sorted(T + (k,)))]
    return PdaArray(cells, row_labels=tuple(rows))


def column_vectors(p: DirectParams) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Column index set ``(T, b)`` of the direct construction, 1-based ``T``."""
    bs = weight_vectors(p.r, p.r - p.omega)
    return [(T, b) for T in combinations(range(1, p.H + 1), p.r) for b in bs]


def direct_cpda(p: DirectParams) -> PdaArray:
    """Direct CPDA: entry ``(e, C)`` where ``f|_T`` and ``b`` agree in exactly ``lambda`` places."""
    H, r, a, lam = p.H, p.r, p.a, p.lam
    if H > 30:
        raise ValueError("direct_cpda packs labels into 64-bit keys; H <= 30 supported")
    rows = np.array(weight_vectors(H, a), dtype=np.int64)
    columns = column_vectors(p)
    bs = {b: i for i, b in enumerate(weight_vectors(r, r - p.omega), start=1)}
    powers = 1 << np.arange(H - 1, -1, -1, dtype=np.int64)

    keys = np.zeros((rows.shape[0], len(columns)), dtype=np.int64)
    for c, (T, b) in enumerate(columns):
        idx = np.array(T) - 1
        agree = rows[:, idx] == np.array(b)
        hit = agree.sum(axis=1) == lam
        if not hit.any():
            continue
        e = rows[hit].copy()
        e[:, idx] = b
        c_mask = agree[hit] @ (np.int64(1) << idx)
        keys[hit, c] = (e @ powers) * (np.int64(1) << H) + c_mask
    if not keys.any():
        raise EmptySchemeError(f"no row/column pair meets the distance condition for {p.as_tuple()}")

    flat = keys.ravel()
    nz = np.flatnonzero(flat)
    uniq, first, inverse = np.unique(flat[nz], return_index=True, return_inverse=True)
    order = np.argsort(first)
    number = np.empty_like(order)
    number[order] = np.arange(1, order.size + 1)
    cells = np.zeros(flat.size, dtype=np.int64)
    cells[nz] = number[inverse]

    labels = {}
    for key, s in zip(uniq, number):
        key = int(key)
        e_int, c_mask = key >> H, key & ((1 << H) - 1)
        e = tuple((e_int >> (H - 1 - i)) & 1 for i in range(H))
        C = tuple(i + 1 for i in range(H) if c_mask >> i & 1)
        labels[int(s)] = NonStarLabel(e, C)

    return PdaArray(
        cells.reshape(keys.shape),
        row_labels=tuple(tuple(int(v) for v in f) for f in rows),
        col_labels=tuple(ColumnLabel(T, bs[b]) for T, b in columns),
        symbol_labels=labels,
    )


def hybrid_cpda(P: PdaArray, A: PdaArray) -> PdaArray:
    """Replace each entry ``p`` of the CPDA ``P`` by ``A + (p - 1) * S2`` (stars absorb).

    Rows are indexed by ``(j1, j2)`` and columns by ``(k1, k2)``, both in
    lexicographic order; column ``((T, i), k2)`` is relabelled ``(T, (i-1)*K2 + k2)``.
    """
    if P.col_labels is None:
        raise StructuralError("outer array needs CPDA column labels")
    rp = verify_cpda(P)
    if not rp.is_cpda:
        raise ValueError(f"outer array is not a CPDA: {rp.violations[0]}")
    ra = verify_pda(A)
    if not ra.is_pda:
        raise ValueError(f"inner array is not a PDA: {ra.violations[0]}")

    S2 = int(A.cells.max())
    p = P.cells[:, None, :, None]
    q = A.cells[None, :, None, :]
    L = np.where((p > 0) & (q > 0), q + (p - 1) * S2, 0)
    F1, K1 = P.cells.shape
    F2, K2 = A.cells.shape
    col_labels = tuple(
        ColumnLabel(lab.relay_set, (lab.user_index - 1) * K2 + k2)
        for lab in P.col_labels
        for k2 in range(1, K2 + 1)
    )
    row_labels = tuple((j1, j2) for j1 in range(1, F1 + 1) for j2 in range(1, F2 + 1))
    return PdaArray(L.reshape(F1 * F2, K1 * K2), row_labels=row_labels, col_labels=col_labels)
