"""Bit-exact simulation of CPDA-based coded caching over a combination network.

The server holds ``N`` files and reaches ``H`` relays; each user hears the
``r`` relays of its relay set.  Placement fills user caches from a CPDA
(optionally after MDS-coding each file), delivery sends one XOR signal per
integer ``s`` split over the relays in ``I_s``, and every user decodes from
nothing but its cache and what its relays forward.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from math import comb, lcm
from typing import Optional

import numpy as np

from .constructions import DirectParams, direct_cpda, hybrid_cpda, mn_pda
from .errors import DivisibilityError, StructuralError
from .gf import MdsCode, mds_decode, mds_encode
from .pda import ColumnLabel, CpdaReport, PdaArray, find_useless_stars, verify_cpda
from .schemes import params_from_report, scheme_b_params, zy_params

MODES = ("uncoded", "mds_coded")


def default_users(H: int, r: int, u: int) -> tuple[ColumnLabel, ...]:
    """All ``(T, i)``: relay sets in lexicographic order, then user index."""
    return tuple(ColumnLabel(T, i) for T in combinations(range(1, H + 1), r) for i in range(1, u + 1))


@dataclass(frozen=True)
class NetworkInstance:
    H: int
    r: int
    u: int
    N: int
    file_bytes: int
    files: tuple[bytes, ...]
    users: tuple[ColumnLabel, ...]
    seed: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.r < self.H or self.u < 1 or self.N < 1 or self.file_bytes < 1:
            raise ValueError(f"bad network shape H={self.H}, r={self.r}, u={self.u}, N={self.N}")
        if len(self.files) != self.N or any(len(f) != self.file_bytes for f in self.files):
            raise StructuralError(f"expected {self.N} files of {self.file_bytes} bytes")
        if len(self.users) != self.u * comb(self.H, self.r) or len(set(self.users)) != len(self.users):
            raise StructuralError(f"expected {self.u * comb(self.H, self.r)} distinct users")
        if any(len(k.relay_set) != self.r or max(k.relay_set) > self.H for k in self.users):
            raise StructuralError(f"every user needs {self.r} relays out of {self.H}")

    @classmethod
    def random(cls, H: int, r: int, u: int, N: int, file_bytes: int, seed: int = 0, users=None) -> "NetworkInstance":
        rng = np.random.default_rng(seed)
        files = tuple(rng.bytes(file_bytes) for _ in range(N))
        return cls(H, r, u, N, file_bytes, files, tuple(users) if users else default_users(H, r, u), seed)

    @classmethod
    def for_array(cls, array: PdaArray, N: int, file_bytes: int, seed: int = 0, H: Optional[int] = None):
        """Network whose users are the column labels of ``array``, in column order."""
        report = verify_cpda(array, H)
        return cls.random(report.H, report.r, report.u, N, file_bytes, seed, users=array.col_labels)

    @property
    def K(self) -> int:
        return len(self.users)

    @property
    def B(self) -> int:
        """File size in bits."""
        return 8 * self.file_bytes


@dataclass(frozen=True)
class DemandVector:
    """Requested file ``d_k`` (1-based) of every user."""

    files: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "files", tuple(int(d) for d in self.files))

    @classmethod
    def random(cls, K: int, N: int, rng: np.random.Generator) -> "DemandVector":
        return cls(tuple(int(d) for d in rng.integers(1, N + 1, size=K)))

    def check(self, net: NetworkInstance):
        if len(self.files) != net.K:
            raise ValueError(f"demand has {len(self.files)} entries for {net.K} users")
        if any(not 1 <= d <= net.N for d in self.files):
            raise ValueError(f"demanded file ids must lie in 1..{net.N}")


@dataclass(frozen=True)
class CacheContents:
    """Per-user cache: ``(file, packet index) -> payload``.

    In ``mds_coded`` mode the packet index is the coded index ``j`` (a row of
    the array); otherwise it is the plain packet index.
    """

    mode: str
    packet_bytes: int
    store: tuple[dict, ...]
    code: Optional[MdsCode] = None
    report: Optional[CpdaReport] = field(default=None, repr=False, compare=False)

    def cached_bytes(self, k: int) -> int:
        return sum(len(v) for v in self.store[k].values())


@dataclass(frozen=True)
class SimulationResult:
    scheme: str
    decoded: tuple[bytes, ...]
    relay_bits: tuple[int, ...]
    signal_bits: int
    measured_load: Fraction
    theory_load: Optional[Fraction]
    all_correct: bool
    seed: Optional[int]
    memory_ratio: Fraction
    subpacketization: int

    @property
    def load_matches(self) -> Optional[bool]:
        return None if self.theory_load is None else self.measured_load == self.theory_load

    @property
    def ok(self) -> bool:
        return self.all_correct and self.load_matches is not False

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "measured_load": str(self.measured_load),
            "theory_load": None if self.theory_load is None else str(self.theory_load),
            "memory_ratio": str(self.memory_ratio),
            "subpacketization": self.subpacketization,
            "relay_bits": list(self.relay_bits),
            "all_correct": self.all_correct,
            "seed": self.seed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _split(data: np.ndarray, parts: int) -> list[np.ndarray]:
    size = data.size // parts
    return [data[i * size:(i + 1) * size] for i in range(parts)]


def _memory_ratio(caches: CacheContents, net: NetworkInstance) -> Fraction:
    sizes = {caches.cached_bytes(k) for k in range(net.K)}
    if len(sizes) != 1:
        raise AssertionError(f"users cache different amounts: {sorted(sizes)}")
    return Fraction(sizes.pop(), net.N * net.file_bytes)


def _check_users(array: PdaArray, net: NetworkInstance):
    if array.col_labels is None or tuple(array.col_labels) != net.users:
        raise StructuralError("array columns must carry the network's user labels in the same order")


class _Library:
    """Server-side packets: plain file slices, or coded packets of each file."""

    def __init__(self, net: NetworkInstance, rows: int, code: Optional[MdsCode]):
        self.code = code
        files = [np.frombuffer(f, dtype=np.uint8) for f in net.files]
        if code is None:
            self.packets = [_split(f, rows) for f in files]
        else:
            gf = code.gf
            self.packets = []
            for f in files:
                data = [gf.from_bytes(bytes(p)) for p in _split(f, code.k)]
                self.packets.append([np.frombuffer(gf.to_bytes(c), dtype=np.uint8) for c in mds_encode(code, data)])

    def packet(self, n: int, j: int) -> np.ndarray:
        """Packet ``j`` (0-based) of file ``n`` (1-based)."""
        return self.packets[n - 1][j]


def place(array: PdaArray, net: NetworkInstance, mode: str = "uncoded") -> CacheContents:
    """Fill every user's cache from the stars of its column.

    ``mds_coded`` splits each file into ``F - Z'`` packets, encodes them into
    ``F`` coded packets and caches only the useful stars.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    _check_users(array, net)
    report = verify_cpda(array, net.H)
    if not report.is_cpda:
        raise ValueError(f"array is not a CPDA: {report.violations[0]}")
    if report.S < 1:
        raise ValueError("array has no integers (every user caches everything)")
    F = array.F
    star = array.cells == 0
    code = None
    if mode == "uncoded":
        k, unit = F, 1
    else:
        useless = find_useless_stars(array)
        if len(set(useless.counts)) != 1:
            raise ValueError(f"useless stars are not uniform across columns: {sorted(set(useless.counts))}")
        star &= ~useless.mask
        k = F - useless.counts[0]
        code = MdsCode(F, k)
        unit = code.gf.element_bytes
    mus = {len(v) for v in report.intersections.values()}
    if net.file_bytes % k:
        raise DivisibilityError(f"file of {net.file_bytes} bytes does not split into {k} packets")
    packet_bytes = net.file_bytes // k
    step = lcm(unit, *mus)
    if packet_bytes % step:
        raise DivisibilityError(f"packet of {packet_bytes} bytes is not a multiple of {step} (element size and every mu_s)")

    lib = _Library(net, F, code)
    store = tuple(
        {(n, int(j)): lib.packet(n, int(j)) for n in range(1, net.N + 1) for j in np.flatnonzero(star[:, col])}
        for col in range(array.K)
    )
    return CacheContents(mode, packet_bytes, store, code, report)


def _decode_file(caches: CacheContents, net: NetworkInstance, got: dict[int, np.ndarray]) -> bytes:
    if caches.code is None:
        return b"".join(bytes(got[j]) for j in sorted(got))
    gf = caches.code.gf
    data = mds_decode(caches.code, {j: gf.from_bytes(bytes(v)) for j, v in sorted(got.items())})
    return b"".join(gf.to_bytes(d) for d in data)


def deliver(
    array: PdaArray,
    net: NetworkInstance,
    caches: CacheContents,
    demand: DemandVector,
    scheme: str = "CPDA",
) -> SimulationResult:
    """Send ``X_s`` split over ``I_s`` for every integer and decode at every user."""
    demand.check(net)
    _check_users(array, net)
    report = caches.report or verify_cpda(array, net.H)
    d = demand.files
    lib = _Library(net, array.F, caches.code)

    # server: one XOR signal per integer, split into |I_s| parts over sorted I_s
    relay_msgs: dict[int, dict[tuple[int, int], np.ndarray]] = {h: {} for h in range(1, net.H + 1)}
    signal_bits = 0
    for s, cells in report.occurrences.items():
        x = np.zeros(caches.packet_bytes, dtype=np.uint8)
        for j, k in cells:
            x ^= lib.packet(d[k - 1], j - 1)
        signal_bits += 8 * x.size
        relays = sorted(report.intersections[s])
        for l, (h, part) in enumerate(zip(relays, _split(x, len(relays)))):
            relay_msgs[h][(s, l)] = part

    # users: cache plus whatever their relays forward
    decoded = []
    by_column: dict[int, list[tuple[int, int]]] = {}
    for s, cells in report.occurrences.items():
        for j, k in cells:
            by_column.setdefault(k, []).append((s, j))
    for k, user in enumerate(net.users):
        cache = caches.store[k]
        heard = {key: v for h in user.relay_set for key, v in relay_msgs[h].items()}
        want = d[k]
        got = {j: v for (n, j), v in cache.items() if n == want}
        for s, j in by_column.get(k + 1, []):
            I_s = sorted(report.intersections[s])
            if not set(I_s) <= set(user.relay_set):
                raise AssertionError(f"user {user} cannot hear all of I_{s} = {I_s}")
            x = np.concatenate([heard[(s, l)] for l in range(len(I_s))])
            for j2, k2 in report.occurrences[s]:
                if k2 != k + 1:
                    x = x ^ cache[(d[k2 - 1], j2 - 1)]
            got[j - 1] = x
        decoded.append(_decode_file(caches, net, got))

    relay_bits = tuple(8 * sum(v.size for v in relay_msgs[h].values()) for h in range(1, net.H + 1))
    coded = caches.mode == "mds_coded"
    theory = params_from_report(report, coded=coded).load if report.is_regular else None
    rows = caches.code.k if coded else array.F
    mu = report.mu or 1
    return SimulationResult(
        scheme=scheme,
        decoded=tuple(decoded),
        relay_bits=relay_bits,
        signal_bits=signal_bits,
        measured_load=Fraction(max(relay_bits), net.B),
        theory_load=theory,
        all_correct=all(dec == net.files[dk - 1] for dec, dk in zip(decoded, d)),
        seed=net.seed,
        memory_ratio=_memory_ratio(caches, net),
        subpacketization=mu * rows,
    )


def simulate(array: PdaArray, net: NetworkInstance, demand: DemandVector, mode: str = "uncoded", scheme: str = "CPDA"):
    return deliver(array, net, place(array, net, mode), demand, scheme)


def run_zy(H: int, r: int, u: int, t: int, net: NetworkInstance, demand: DemandVector) -> SimulationResult:
    """``[H, r]`` MDS split of each file, then an independent MN scheme per relay
    over the ``u*C(H-1, r-1)`` users attached to it."""
    if (net.H, net.r, net.u) != (H, r, u):
        raise StructuralError(f"network is ({net.H},{net.r},{net.u}), scheme wants ({H},{r},{u})")
    demand.check(net)
    k_tilde = u * comb(H - 1, r - 1)
    if not 0 < t < k_tilde:
        raise ValueError(f"need 0 < t < {k_tilde}, got t={t}")
    code = MdsCode(H, r)
    gf = code.gf
    mn = mn_pda(k_tilde, t).cells
    F2 = mn.shape[0]
    if net.file_bytes % r:
        raise DivisibilityError(f"file of {net.file_bytes} bytes does not split into {r} packets")
    coded_bytes = net.file_bytes // r
    if coded_bytes % lcm(gf.element_bytes, F2):
        raise DivisibilityError(f"coded packet of {coded_bytes} bytes does not split into {F2} subpackets")

    # coded[n][h-1]: the share of file n handled by relay h, cut into F2 subpackets
    coded = []
    for f in net.files:
        data = [gf.from_bytes(p) for p in (f[i * coded_bytes:(i + 1) * coded_bytes] for i in range(r))]
        coded.append([_split(np.frombuffer(gf.to_bytes(c), dtype=np.uint8), F2) for c in mds_encode(code, data)])

    local = {h: [k for k, user in enumerate(net.users) if h in user.relay_set] for h in range(1, H + 1)}
    caches = [dict() for _ in net.users]
    for h, members in local.items():
        for pos, k in enumerate(members):
            for j in np.flatnonzero(mn[:, pos] == 0):
                for n in range(net.N):
                    caches[k][(h, n + 1, int(j))] = coded[n][h - 1][j]

    d = demand.files
    relay_bits = []
    recovered = [dict() for _ in net.users]
    for h, members in local.items():
        sent = 0
        for s in range(1, int(mn.max()) + 1):
            rows, cols = np.nonzero(mn == s)
            x = np.zeros(coded_bytes // F2, dtype=np.uint8)
            for j, pos in zip(rows, cols):
                x ^= coded[d[members[pos]] - 1][h - 1][j]
            sent += x.size
            for j, pos in zip(rows, cols):
                k = members[pos]
                y = x.copy()
                for j2, pos2 in zip(rows, cols):
                    if pos2 != pos:
                        y ^= caches[k][(h, d[members[pos2]], int(j2))]
                recovered[k][(h, int(j))] = y
        relay_bits.append(8 * sent)

    decoded = []
    for k, user in enumerate(net.users):
        shares = {}
        for h in user.relay_set:
            subs = [
                recovered[k][(h, j)] if (h, j) in recovered[k] else caches[k][(h, d[k], j)]
                for j in range(F2)
            ]
            shares[h - 1] = gf.from_bytes(bytes(np.concatenate(subs)))
        decoded.append(b"".join(gf.to_bytes(v) for v in mds_decode(code, shares)))

    params = zy_params(H, r, u, Fraction(t, k_tilde))
    cached = {sum(v.size for v in c.values()) for c in caches}
    if len(cached) != 1:
        raise AssertionError(f"users cache different amounts: {sorted(cached)}")
    return SimulationResult(
        scheme="ZY",
        decoded=tuple(decoded),
        relay_bits=tuple(relay_bits),
        signal_bits=sum(relay_bits),
        measured_load=Fraction(max(relay_bits), net.B),
        theory_load=params.load,
        all_correct=all(dec == net.files[dk - 1] for dec, dk in zip(decoded, d)),
        seed=net.seed,
        memory_ratio=Fraction(cached.pop(), net.N * net.file_bytes),
        subpacketization=params.subpacketization,
    )


def scheme_b_array(p: DirectParams, K2: int, t2: int) -> PdaArray:
    if not 0 < t2 < K2:
        raise ValueError(f"need 0 < t2 < K2, got K2={K2}, t2={t2}")
    return hybrid_cpda(direct_cpda(p), mn_pda(K2, t2))


def run_scheme_b(p: DirectParams, K2: int, t2: int, net: NetworkInstance, demand: DemandVector) -> SimulationResult:
    """Hybrid of the direct CPDA with the ``(K2, t2)`` MN PDA, MDS-coded placement."""
    array = scheme_b_array(p, K2, t2)
    result = simulate(array, net, demand, mode="mds_coded", scheme="B")
    return replace(result, theory_load=scheme_b_params(p, K2, t2).load)


def demands(K: int, N: int, count: int, seed: int = 0) -> list[DemandVector]:
    """``count`` seeded random demand vectors."""
    rng = np.random.default_rng(seed)
    return [DemandVector.random(K, N, rng) for _ in range(count)]
