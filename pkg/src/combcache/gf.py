"""Arithmetic in GF(2^8) / GF(2^16) and systematic MDS erasure codes.

Field elements are plain integers (or numpy arrays of them); addition is XOR.
Multiplication goes through log/antilog tables built once per field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, StructuralError

# primitive polynomials, generator x = 2
PRIMITIVE_POLY = {8: 0x11D, 16: 0x1100B}


class GaloisField:
    """GF(2^m) for ``m`` in {8, 16}."""

    def __init__(self, m: int):
        if m not in PRIMITIVE_POLY:
            raise ValueError(f"unsupported field size 2^{m}; use m in {sorted(PRIMITIVE_POLY)}")
        self.m = m
        self.order = 1 << m
        self.poly = PRIMITIVE_POLY[m]
        q1 = self.order - 1
        exp = np.zeros(2 * q1, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(q1):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.order:
                x ^= self.poly
        if x != 1 or len(set(exp[:q1].tolist())) != q1:
            raise AssertionError(f"polynomial {self.poly:#x} is not primitive")
        exp[q1:] = exp[:q1]
        exp.setflags(write=False)
        log.setflags(write=False)
        self._exp, self._log = exp, log

    def __repr__(self):
        return f"GaloisField(2^{self.m})"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.uint8) if self.m == 8 else np.dtype(">u2")

    @property
    def element_bytes(self) -> int:
        return self.m // 8

    def _check(self, *xs):
        for x in xs:
            a = np.asarray(x)
            if a.size and (a.min() < 0 or a.max() >= self.order):
                raise ValueError(f"value outside GF(2^{self.m})")

    def add(self, a, b):
        return np.bitwise_xor(a, b)

    def mul(self, a, b):
        """Elementwise product; scalars and arrays broadcast."""
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        self._check(a, b)
        out = self._exp[self._log[a] + self._log[b]]
        out = np.where((a == 0) | (b == 0), 0, out)
        return out if out.ndim else int(out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        self._check(a)
        if (a == 0).any():
            raise ZeroDivisionError("zero has no inverse")
        out = self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        return out if out.ndim else int(out)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 1 if e == 0 else 0
        return int(self._exp[(self._log[a] * e) % (self.order - 1)])

    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """``A @ B`` over the field (``A`` is small; ``B`` rows may be long)."""
        A, B = np.asarray(A, dtype=np.int64), np.asarray(B, dtype=np.int64)
        if A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for i in range(A.shape[0]):
            for j in range(A.shape[1]):
                if A[i, j]:
                    out[i] ^= self.mul(int(A[i, j]), B[j])
        return out

    def inverse(self, A: np.ndarray) -> np.ndarray:
        """Gauss-Jordan inverse; raises ``StructuralError`` if singular."""
        A = np.array(A, dtype=np.int64)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"matrix is not square: {A.shape}")
        M = np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1)
        for col in range(n):
            pivots = np.flatnonzero(M[col:, col])
            if pivots.size == 0:
                raise StructuralError("singular matrix")
            p = col + int(pivots[0])
            if p != col:
                M[[col, p]] = M[[p, col]]
            M[col] = self.mul(self.inv(int(M[col, col])), M[col])
            for row in range(n):
                if row != col and M[row, col]:
                    M[row] ^= self.mul(int(M[row, col]), M[col])
        return M[:, n:]

    def from_bytes(self, data: bytes) -> np.ndarray:
        if len(data) % self.element_bytes:
            raise ValueError(f"{len(data)} bytes is not a whole number of {self.m}-bit elements")
        return np.frombuffer(data, dtype=self.dtype).astype(np.int64)

    def to_bytes(self, values: np.ndarray) -> bytes:
        return np.asarray(values).astype(self.dtype).tobytes()


@lru_cache(maxsize=None)
def galois_field(m: int) -> GaloisField:
    return GaloisField(m)


def smallest_field(n: int) -> GaloisField:
    """Smallest supported field with at least ``n`` distinct evaluation points."""
    for m in sorted(PRIMITIVE_POLY):
        if (1 << m) >= n:
            return galois_field(m)
    raise ValueError(f"code length {n} exceeds GF(2^16)")


@dataclass(frozen=True)
class MdsCode:
    """Systematic ``[n, k]`` MDS code with generator ``V_top^-1 V`` for the
    ``k x n`` Vandermonde matrix ``V`` on evaluation points ``0..n-1``."""

    n: int
    k: int
    gf: Optional[GaloisField] = None
    generator: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise ValueError(f"need n, k >= 1, got n={self.n}, k={self.k}")
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")
        gf = self.gf or smallest_field(self.n)
        if self.n > gf.order:
            raise ValueError(f"n={self.n} exceeds {gf}")
        object.__setattr__(self, "gf", gf)
        V = np.array([[gf.pow(x, i) for x in range(self.n)] for i in range(self.k)], dtype=np.int64)
        G = gf.matmul(gf.inverse(V[:, : self.k]), V)
        G.setflags(write=False)
        object.__setattr__(self, "generator", G)

    def is_mds(self) -> bool:
        """Exhaustive check that every ``k x k`` column submatrix is invertible."""
        for cols in combinations(range(self.n), self.k):
            try:
                self.gf.inverse(self.generator[:, cols])
            except StructuralError:
                return False
        return True


def _stack(vectors: Sequence, gf: GaloisField) -> np.ndarray:
    rows = [np.asarray(v, dtype=np.int64) for v in vectors]
    if len({r.shape for r in rows}) > 1 or any(r.ndim != 1 for r in rows):
        raise ValueError("input vectors must be 1-D with equal lengths")
    gf._check(*rows)
    return np.stack(rows) if rows else np.zeros((0, 0), dtype=np.int64)


def mds_encode(code: MdsCode, data: Sequence) -> list[np.ndarray]:
    """Encode ``k`` equal-length symbol vectors into ``n`` coded vectors."""
    if len(data) != code.k:
        raise ValueError(f"expected {code.k} data vectors, got {len(data)}")
    D = _stack(data, code.gf)
    return list(code.gf.matmul(code.generator.T, D))


def mds_decode(code: MdsCode, received: dict[int, Sequence] | Sequence[tuple[int, Sequence]]) -> list[np.ndarray]:
    """Recover the ``k`` data vectors from ``k`` coded vectors keyed by their 0-based index."""
    items = list(received.items()) if isinstance(received, dict) else list(received)
    idx = [int(i) for i, _ in items]
    if len(set(idx)) != len(idx):
        raise StructuralError(f"repeated coded indices {idx}")
    if any(not 0 <= i < code.n for i in idx):
        raise StructuralError(f"coded index out of range 0..{code.n - 1}: {idx}")
    if len(idx) < code.k:
        raise InsufficientDataError(f"need {code.k} coded vectors, got {len(idx)}")
    idx, items = idx[: code.k], items[: code.k]
    C = _stack([v for _, v in items], code.gf)
    Ginv = code.gf.inverse(code.generator[:, idx].T)
    return list(code.gf.matmul(Ginv, C))
