"""Evolving random-graph processes over the component ledger.

A Simulation owns one forest, one seeded generator and one process
rule. Randomness is drawn in fixed-size chunks of uniform vertex
proposals at the Python level; both the compiled and the pure-Python
engine consume the identical stream row by row, so traces match
exactly across engines for a given seed.

Process time follows t = 2m/n where m counts attempted insertions
(rounds for the two-choice rules), with m = floor(n*t/2) at the end
time and record instants snapped to the nearest attempted-edge index.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidConfigError
from .ledger import (
    DisjointSetForest,
    MergeOutcome,
    MomentLedger,
    SizeDistribution,
    add_edge,
    ledger_init,
    snapshot_distribution,
)

__all__ = [
    "ProcessKind",
    "InitialGraphSpec",
    "TraceRecord",
    "Snapshot",
    "Simulation",
    "run_process",
    "build_initial_graph",
    "poisson_edge_count",
    "er_step",
    "bf_step",
    "product_rule_step",
]

CHUNK = 1 << 18  # proposal rows drawn per generator call


class ProcessKind(enum.Enum):
    """Edge-arrival rules; values are the CLI tokens."""

    ER_WITHOUT_REPLACEMENT = "er"
    ER_WITH_REPLACEMENT = "er-wr"
    ER_POISSON_TIME = "er-poisson"
    BOUNDED_SIZE = "bf"
    PRODUCT_RULE = "product"

    @classmethod
    def from_token(cls, token: str) -> "ProcessKind":
        for kind in cls:
            if kind.value == token:
                return kind
        raise InvalidConfigError(f"unknown process {token!r}")

    @property
    def two_choice(self) -> bool:
        return self in (ProcessKind.BOUNDED_SIZE, ProcessKind.PRODUCT_RULE)


@dataclass(frozen=True)
class InitialGraphSpec:
    """Deterministic starting components, a list of (size, count) pairs.

    Components are realized as paths on consecutive vertex blocks
    starting at vertex 0; vertices not covered stay singletons. Only
    the size multiset matters to every observable here.
    """

    parts: tuple[tuple[int, int], ...] = ()

    @classmethod
    def parse(cls, text: str) -> "InitialGraphSpec":
        """Parse the comma list ``size:count``, e.g. ``3:100,7:2``."""
        text = text.strip()
        if not text:
            return cls()
        parts = []
        for item in text.split(","):
            try:
                size_s, count_s = item.split(":")
                size, count = int(size_s), int(count_s)
            except ValueError as exc:
                raise InvalidConfigError(f"bad initial-graph item {item!r}") from exc
            if size < 1 or count < 1:
                raise InvalidConfigError(f"sizes and counts must be >= 1: {item!r}")
            parts.append((size, count))
        return cls(tuple(parts))

    def format(self) -> str:
        return ",".join(f"{s}:{c}" for s, c in self.parts)

    @property
    def total_vertices(self) -> int:
        return sum(s * c for s, c in self.parts)

    def validate_for(self, n: int) -> None:
        if self.total_vertices > n:
            raise InvalidConfigError(
                f"initial graph needs {self.total_vertices} vertices but n={n}"
            )

    def to_distribution(self, n: int) -> SizeDistribution:
        """Exact component-size histogram including the singleton fill."""
        self.validate_for(n)
        counts: dict[int, int] = {}
        for s, c in self.parts:
            counts[s] = counts.get(s, 0) + c
        fill = n - self.total_vertices
        if fill:
            counts[1] = counts.get(1, 0) + fill
        return SizeDistribution(dict(sorted(counts.items())))

    def path_edges(self):
        """Edges (v, v+1) of the path realization, in construction order."""
        offset = 0
        for s, c in self.parts:
            for _ in range(c):
                for v in range(offset, offset + s - 1):
                    yield v, v + 1
                offset += s


def build_initial_graph(spec: InitialGraphSpec, n: int, forest: DisjointSetForest,
                        ledger: MomentLedger) -> None:
    """Realize the component layout on a fresh forest via ordinary edge insertions."""
    spec.validate_for(n)
    for u, v in spec.path_edges():
        add_edge(forest, ledger, u, v)


def poisson_edge_count(t: float, n: int, rng: np.random.Generator) -> int:
    """Number of edges arriving by process time t under Poisson arrivals."""
    if t < 0:
        raise InvalidConfigError("time must be >= 0")
    if t == 0:
        return 0
    return int(rng.poisson((n - 1) * t / 2))


@dataclass(frozen=True)
class TraceRecord:
    """Observables at one record instant.

    t is the process time of the snapshot (2m/n for edge-counted
    processes, the requested time for Poisson arrivals); m is the
    number of attempted insertions so far.
    """

    t: float
    m: int
    s2: float
    s3: float
    s4: float
    c1_frac: float
    c2_frac: float
    x1: float


@dataclass(frozen=True)
class Snapshot:
    """Exact component statistics at one instant."""

    m: int
    dist: SizeDistribution
    s_sums: tuple[int, int, int, int]
    c1: int
    c2: int
    n1: int

    @property
    def n(self) -> int:
        return self.s_sums[0]

    def s(self, k: int) -> float:
        return self.s_sums[k - 1] / self.s_sums[0]

    @property
    def x1(self) -> float:
        return self.n1 / self.s_sums[0]

    def trace(self, t: float) -> TraceRecord:
        n = self.s_sums[0]
        return TraceRecord(
            t=t,
            m=self.m,
            s2=self.s_sums[1] / n,
            s3=self.s_sums[2] / n,
            s4=self.s_sums[3] / n,
            c1_frac=self.c1 / n,
            c2_frac=self.c2 / n,
            x1=self.n1 / n,
        )


class Simulation:
    """One evolving graph under one process rule.

    engine='numba' runs the compiled kernels, engine='python' the pure
    ledger path, engine='auto' picks numba when available. Both consume
    the same proposal stream, so results are engine-independent.
    """

    def __init__(self, kind: ProcessKind, n: int, initial: InitialGraphSpec | str | None = None,
                 seed: int = 0, loops: bool = True, engine: str = "auto"):
        if n < 2:
            raise InvalidConfigError("n must be >= 2")
        if isinstance(initial, str):
            initial = InitialGraphSpec.parse(initial)
        self.initial = initial or InitialGraphSpec()
        self.initial.validate_for(n)
        self.kind = kind
        self.n = n
        self.seed = seed
        self.loops = loops
        if engine == "auto":
            engine = "numba" if _kernels.HAVE_NUMBA else "python"
        if engine == "numba" and not _kernels.HAVE_NUMBA:
            raise InvalidConfigError("numba engine requested but numba is unavailable")
        if engine not in ("numba", "python"):
            raise InvalidConfigError(f"unknown engine {engine!r}")
        self.engine = engine
        self.rng = np.random.default_rng(seed)
        self.m = 0  # attempted insertions of the main process
        self.extra_attempts = 0  # continuation edges added on top
        self._buf: np.ndarray | None = None
        self._pos = 0
        self._cols = 4 if kind.two_choice else 2
        if engine == "numba":
            self._init_arrays()
        else:
            self._init_python()

    # -- construction ---------------------------------------------------

    def _init_python(self) -> None:
        self.forest, self.ledger = ledger_init(self.n)
        self._e1_rounds = 0
        self._seen: set[int] | None = None
        build_initial_graph(self.initial, self.n, self.forest, self.ledger)
        if self.kind is ProcessKind.ER_WITHOUT_REPLACEMENT:
            self._seen = {u * self.n + v for u, v in self.initial.path_edges()}

    def _init_arrays(self) -> None:
        n = self.n
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)
        self.state = np.zeros(3, dtype=np.int64)
        offset = 0
        c1 = 1
        covered = 0
        for s, c in self.initial.parts:
            if s > 1:
                starts = offset + s * np.arange(c, dtype=np.int64)
                idx = np.arange(offset, offset + s * c, dtype=np.int64)
                self.parent[idx] = np.repeat(starts, s)
                self.size[starts] = s
                covered += s * c
                c1 = max(c1, s)
            offset += s * c
        self.state[_kernels.STATE_N1] = n - covered
        self.state[_kernels.STATE_C1] = c1
        self._table: np.ndarray | None = None
        self._table_entries = 0
        if self.kind is ProcessKind.ER_WITHOUT_REPLACEMENT:
            keys = np.fromiter(
                (u * n + v for u, v in self.initial.path_edges()), dtype=np.int64
            )
            self._grow_table(max(64, 2 * len(keys) + 1024))
            _kernels.table_fill(self._table, keys)
            self._table_entries = len(keys)

    def _grow_table(self, min_entries: int) -> None:
        cap = 1 << max(6, (2 * min_entries - 1).bit_length())
        new = np.full(cap, -1, dtype=np.int64)
        if self._table is not None:
            _kernels.table_fill(new, self._table[self._table != -1])
        self._table = new

    # -- proposal stream -------------------------------------------------

    def _refill(self, cols: int) -> None:
        if self._buf is None or self._pos >= len(self._buf) or self._cols != cols:
            # switching proposal shape discards any buffered rows
            self._buf = self.rng.integers(0, self.n, size=(CHUNK, cols), dtype=np.int64)
            self._pos = 0
            self._cols = cols

    # -- main process ----------------------------------------------------

    @property
    def e1_rounds(self) -> int:
        """Rounds in which the first offered edge was chosen."""
        if self.engine == "numba":
            return int(self.state[_kernels.STATE_E1])
        return self._e1_rounds

    def advance_to(self, m_target: int) -> None:
        """Consume proposals until m_target insertions have been attempted."""
        if m_target < self.m:
            raise InvalidConfigError("cannot rewind a simulation")
        cols = 4 if self.kind.two_choice else 2
        while self.m < m_target:
            self._refill(cols)
            need = m_target - self.m
            if self.engine == "numba":
                done, pos = self._consume_numba(need)
            else:
                done, pos = self._consume_python(self._buf, self._pos, need)
            self.m += done
            self._pos = pos

    def _consume_numba(self, need: int) -> tuple[int, int]:
        kind = self.kind
        if kind is ProcessKind.BOUNDED_SIZE:
            return _kernels.bf_chunk(
                self.parent, self.size, self._buf, self._pos, need, self.loops, self.state
            )
        if kind is ProcessKind.PRODUCT_RULE:
            return _kernels.product_chunk(
                self.parent, self.size, self._buf, self._pos, need, self.loops, self.state
            )
        if kind is ProcessKind.ER_WITHOUT_REPLACEMENT:
            if (self._table_entries + need) * 2 > len(self._table):
                self._grow_table(self._table_entries + need)
            done, pos = _kernels.er_norep_chunk(
                self.parent, self.size, self._buf, self._pos, need, self.state,
                self._table, self.n,
            )
            self._table_entries += done
            return done, pos
        return _kernels.er_wr_chunk(
            self.parent, self.size, self._buf, self._pos, need, self.state
        )

    def _consume_python(self, buf: np.ndarray, pos: int, need: int) -> tuple[int, int]:
        rows = buf.tolist()
        done = 0
        if self.kind.two_choice:
            is_bf = self.kind is ProcessKind.BOUNDED_SIZE
            while done < need and pos < len(rows):
                v1, w1, v2, w2 = rows[pos]
                pos += 1
                if not self.loops and (v1 == w1 or v2 == w2):
                    continue
                done += 1
                if is_bf:
                    first = (
                        self.forest.comp_size[self.forest.find(v1)] == 1
                        and self.forest.comp_size[self.forest.find(w1)] == 1
                    )
                else:
                    p1 = (self.forest.comp_size[self.forest.find(v1)]
                          * self.forest.comp_size[self.forest.find(w1)])
                    p2 = (self.forest.comp_size[self.forest.find(v2)]
                          * self.forest.comp_size[self.forest.find(w2)])
                    first = p1 >= p2
                if first:
                    self._e1_rounds += 1
                    add_edge(self.forest, self.ledger, v1, w1)
                else:
                    add_edge(self.forest, self.ledger, v2, w2)
        else:
            norep = (self.kind is ProcessKind.ER_WITHOUT_REPLACEMENT
                     and self._seen is not None)
            while done < need and pos < len(rows):
                u, v = rows[pos]
                pos += 1
                if u == v:
                    continue
                if norep:
                    key = u * self.n + v if u < v else v * self.n + u
                    if key in self._seen:
                        continue
                    self._seen.add(key)
                done += 1
                add_edge(self.forest, self.ledger, u, v)
        return done, pos

    def add_er_edges(self, count: int) -> None:
        """Attempt `count` uniform with-replacement edges on the current graph.

        Continuation segment for stop-restart constructions; tracked in
        extra_attempts, not in the main process clock m.
        """
        left = int(count)
        saved_kind = self.kind
        try:
            self.kind = ProcessKind.ER_WITH_REPLACEMENT
            while left > 0:
                self._refill(2)
                if self.engine == "numba":
                    done, pos = _kernels.er_wr_chunk(
                        self.parent, self.size, self._buf, self._pos, left, self.state
                    )
                else:
                    done, pos = self._consume_python(self._buf, self._pos, left)
                left -= done
                self._pos = pos
                self.extra_attempts += done
        finally:
            self.kind = saved_kind

    # -- observation -----------------------------------------------------

    def snapshot(self) -> Snapshot:
        if self.engine == "python":
            dist = snapshot_distribution(self.forest)
            sums = tuple(dist.power_sum(k) for k in (1, 2, 3, 4))
            if list(sums) != self.ledger.s_sums:
                raise AssertionError("ledger and histogram moments disagree")
            c1, c2, n1 = dist.c1, dist.c2, dist.n1
            if (c1, n1) != (self.ledger.c1_size, self.ledger.n1_isolated):
                raise AssertionError("ledger extremes and histogram disagree")
        else:
            parent = self.parent.copy()
            _kernels.compress_all(parent)
            counts = np.bincount(parent, minlength=self.n)
            sizes = counts[counts > 0]
            hist_sizes, hist_counts = np.unique(sizes, return_counts=True)
            dist = SizeDistribution(
                {int(s): int(c) for s, c in zip(hist_sizes, hist_counts)}
            )
            sums = tuple(dist.power_sum(k) for k in (1, 2, 3, 4))
            c1, c2, n1 = dist.c1, dist.c2, dist.n1
            if c1 != int(self.state[_kernels.STATE_C1]) or n1 != int(
                self.state[_kernels.STATE_N1]
            ):
                raise AssertionError("kernel state and histogram disagree")
        return Snapshot(m=self.m, dist=dist, s_sums=sums, c1=c1, c2=c2, n1=n1)


def _snap_index(n: int, t: float, m_end: int) -> int:
    return min(int(round(n * t / 2)), m_end)


def run_process(kind: ProcessKind | str, n: int, initial: InitialGraphSpec | str | None = None,
                t_end: float = 1.0, record_at: tuple[float, ...] = (), seed: int = 0,
                loops: bool = True, engine: str = "auto") -> list[TraceRecord]:
    """Run one process to t_end, recording observables on a schedule.

    Deterministic given (seed, kind, n, initial, schedule). record_at
    must be sorted and bounded by t_end.
    """
    if isinstance(kind, str):
        kind = ProcessKind.from_token(kind)
    record_at = tuple(record_at)
    if any(t < 0 for t in record_at) or t_end < 0:
        raise InvalidConfigError("times must be >= 0")
    if list(record_at) != sorted(record_at):
        raise InvalidConfigError("record_at must be sorted ascending")
    if record_at and record_at[-1] > t_end:
        raise InvalidConfigError("record_at entries must not exceed t_end")
    sim = Simulation(kind, n, initial=initial, seed=seed, loops=loops, engine=engine)
    records: list[TraceRecord] = []
    if kind is ProcessKind.ER_POISSON_TIME:
        prev_t = 0.0
        m_cum = 0
        for t in record_at:
            if t > prev_t:
                m_cum += poisson_edge_count(t - prev_t, n, sim.rng)
                prev_t = t
            sim.advance_to(m_cum)
            records.append(sim.snapshot().trace(t))
        if t_end > prev_t:
            m_cum += poisson_edge_count(t_end - prev_t, n, sim.rng)
            sim.advance_to(m_cum)
    else:
        m_end = int(math.floor(n * t_end / 2))
        for t in record_at:
            m_i = _snap_index(n, t, m_end)
            sim.advance_to(m_i)
            records.append(sim.snapshot().trace(2 * m_i / n))
        sim.advance_to(m_end)
    return records


# -- single-step operations for small-scale work and tests ----------------


def er_step(forest: DisjointSetForest, ledger: MomentLedger, rng: np.random.Generator,
            kind: ProcessKind = ProcessKind.ER_WITH_REPLACEMENT,
            seen: set[int] | None = None) -> MergeOutcome:
    """One uniform edge proposal; resamples loops (and, without
    replacement, already-present edges)."""
    n = forest.n
    if kind is ProcessKind.ER_WITHOUT_REPLACEMENT and seen is None:
        raise InvalidConfigError("without-replacement stepping needs a seen-edge set")
    while True:
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        if u == v:
            continue
        if kind is ProcessKind.ER_WITHOUT_REPLACEMENT:
            key = u * n + v if u < v else v * n + u
            if key in seen:
                continue
            seen.add(key)
        return add_edge(forest, ledger, u, v)


def _two_choice_step(forest, ledger, rng, loops, choose_first) -> MergeOutcome:
    while True:
        v1, w1, v2, w2 = (int(x) for x in rng.integers(0, forest.n, size=4))
        if not loops and (v1 == w1 or v2 == w2):
            continue
        if choose_first(forest, v1, w1, v2, w2):
            return add_edge(forest, ledger, v1, w1)
        return add_edge(forest, ledger, v2, w2)


def bf_step(forest: DisjointSetForest, ledger: MomentLedger, rng: np.random.Generator,
            loops: bool = True) -> MergeOutcome:
    """One two-choice round: first edge iff both its endpoints are isolated."""

    def choose(forest, v1, w1, v2, w2):
        return (forest.comp_size[forest.find(v1)] == 1
                and forest.comp_size[forest.find(w1)] == 1)

    return _two_choice_step(forest, ledger, rng, loops, choose)


def product_rule_step(forest: DisjointSetForest, ledger: MomentLedger,
                      rng: np.random.Generator, loops: bool = True) -> MergeOutcome:
    """One two-choice round keeping the larger component-size product; ties
    go to the first edge."""

    def choose(forest, v1, w1, v2, w2):
        p1 = forest.comp_size[forest.find(v1)] * forest.comp_size[forest.find(w1)]
        p2 = forest.comp_size[forest.find(v2)] * forest.comp_size[forest.find(w2)]
        return p1 >= p2

    return _two_choice_step(forest, ledger, rng, loops, choose)
