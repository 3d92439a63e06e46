"""Pattern databases: construction, min compression, delta tables and file I/O."""
from __future__ import annotations

import io
import logging
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .cube import CubieState
from .pattern import KINDS, Pattern, rank, rank_state, state_count

log = logging.getLogger(__name__)

MAGIC = b"APDB"
FORMAT_VERSION = 1
LAYOUT_PLAIN, LAYOUT_COMPRESSED, LAYOUT_DELTA = 0, 1, 2
DEFAULT_MEMORY_BUDGET = 2_500_000_000
# bytes per abstract state during a build: the entry array itself
BUILD_BYTES_PER_STATE = 1
DELTA_CHUNK = 1 << 22


class MemoryBudgetError(MemoryError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"building needs {required:,} bytes, budget is {budget:,} bytes")
        self.required = required
        self.budget = budget


class PdbFormatError(ValueError):
    pass


def geometry(p: Pattern) -> tuple:
    """Positional arguments shared by the rank kernels."""
    return p.n, p.k, p.base, p.free_orients, p.radix


@dataclass
class PatternDatabase:
    pattern: Pattern
    entries: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def max_value(self) -> int:
        return int(self.entries.max())

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, state: CubieState) -> int:
        return int(self.entries[rank_state(state, self.pattern)])

    def distribution(self) -> dict[int, int]:
        counts = np.bincount(self.entries, minlength=self.max_value + 1)
        return {h: int(c) for h, c in enumerate(counts) if c}

    def average(self) -> float:
        return float(np.mean(self.entries, dtype=np.float64))

    @property
    def nbytes(self) -> int:
        return int(self.entries.nbytes)


def build_pdb(p: Pattern, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> PatternDatabase:
    """Breadth-first search backwards from the abstract goal.

    Each layer is produced by a full scan of the entry array: small layers are
    expanded forwards, and once the frontier outnumbers the unseen entries the
    scan switches to checking unseen entries for a neighbour in the frontier.
    """
    n_states = state_count(p)
    required = n_states * BUILD_BYTES_PER_STATE
    if required > memory_budget:
        raise MemoryBudgetError(required, memory_budget)

    started = time.time()
    entries = np.full(n_states, K.UNSEEN, dtype=np.uint8)
    goal = rank_of_goal(p)
    entries[goal] = 0
    dest, twist = p.move_tables
    seen, frontier, depth = 1, 1, 0
    while frontier:
        unseen = n_states - seen
        backward = frontier > unseen
        frontier = K.bfs_layer(entries, depth, backward, *geometry(p), K._POPCOUNT, dest, twist)
        seen += frontier
        depth += 1
        log.debug("%s depth %d: %d states (%s)", p.label, depth, frontier,
                  "backward" if backward else "forward")
        if depth >= 254 and frontier:
            raise OverflowError("distances do not fit into one byte")
    if seen != n_states:
        raise RuntimeError(f"{n_states - seen} abstract states unreachable from the goal")
    return PatternDatabase(p, entries, {"built_at": started, "seconds": time.time() - started,
                                        "entry_count": n_states})


def rank_of_goal(p: Pattern) -> int:
    return rank(p.goal(), p)


def lookup(db: PatternDatabase, s: CubieState) -> int:
    return db.lookup(s)


def check_layering(db: PatternDatabase) -> tuple[int, int]:
    """``(entries without a parent one layer down, edges spanning > 1 layer)``."""
    dest, twist = db.pattern.move_tables
    missing, jumps = K.layering_violations(db.entries, *geometry(db.pattern), K._POPCOUNT,
                                           dest, twist)
    return int(missing), int(jumps)


@dataclass
class CompressedPdb:
    pattern: Pattern
    group_size: int
    entries: np.ndarray
    source_entries: int

    def value_at(self, r: int) -> int:
        return int(self.entries[r // self.group_size])

    def lookup(self, state: CubieState) -> int:
        return self.value_at(rank_state(state, self.pattern))

    def expand(self) -> np.ndarray:
        """Per-rank values, aligned with the uncompressed table."""
        return np.repeat(self.entries, self.group_size)[: self.source_entries]

    def average(self) -> float:
        return float(np.mean(self.expand(), dtype=np.float64))

    @property
    def nbytes(self) -> int:
        return int(self.entries.nbytes)


def min_compress(db: PatternDatabase, g: int) -> CompressedPdb:
    if g < 1:
        raise ValueError(f"group size must be >= 1, got {g}")
    n = len(db.entries)
    groups = -(-n // g)
    padded = np.full(groups * g, K.UNSEEN, dtype=np.uint8)
    padded[:n] = db.entries
    compressed = padded.reshape(groups, g).min(axis=1)
    return CompressedPdb(db.pattern, g, compressed, n)


@dataclass
class DeltaPdb:
    large: Pattern
    base: Pattern
    entries: np.ndarray

    def reconstruct(self, base_db: PatternDatabase) -> np.ndarray:
        self._check_base(base_db)
        out = np.empty(len(self.entries), dtype=np.uint8)
        for start, proj in _projections(self.large, self.base):
            out[start:start + len(proj)] = base_db.entries[proj] + self.entries[start:start + len(proj)]
        return out

    def lookup(self, state: CubieState, base_db: PatternDatabase) -> int:
        self._check_base(base_db)
        return base_db.lookup(state) + int(self.entries[rank_state(state, self.large)])

    def distribution(self) -> dict[int, int]:
        counts = np.bincount(self.entries)
        return {h: int(c) for h, c in enumerate(counts) if c}

    def _check_base(self, base_db: PatternDatabase) -> None:
        if base_db.pattern != self.base:
            raise ValueError(f"delta expects base {self.base.spec()}, got {base_db.pattern.spec()}")


def _projections(large: Pattern, base: Pattern):
    sub_idx = np.array([large.tracked.index(c) for c in base.tracked], dtype=np.int64)
    total = state_count(large)
    for start in range(0, total, DELTA_CHUNK):
        stop = min(start + DELTA_CHUNK, total)
        yield start, K.project_ranks(start, stop, *geometry(large), sub_idx, base.k,
                                     base.free_orients, base.radix, K._POPCOUNT)


def build_delta(large: PatternDatabase, base: PatternDatabase) -> DeltaPdb:
    if not base.pattern.is_subpattern_of(large.pattern):
        raise ValueError(f"base pattern {base.pattern.spec()} is not a subset of "
                         f"{large.pattern.spec()}")
    delta = np.empty(len(large.entries), dtype=np.uint8)
    for start, proj in _projections(large.pattern, base.pattern):
        stop = start + len(proj)
        diff = large.entries[start:stop].astype(np.int16) - base.entries[proj]
        if diff.min() < 0:
            bad = start + int(np.argmin(diff))
            raise ValueError(f"large pattern value below base value at rank {bad}")
        delta[start:stop] = diff
    return DeltaPdb(large.pattern, base.pattern, delta)


# ---------------------------------------------------------------------------
# binary files
# ---------------------------------------------------------------------------

def _pattern_header(p: Pattern) -> bytes:
    return struct.pack("<BB", KINDS.index(p.kind), p.k) + bytes(p.tracked)


def _read_pattern(buf: io.BufferedIOBase) -> Pattern:
    kind, k = struct.unpack("<BB", _read_exact(buf, 2))
    if kind >= len(KINDS):
        raise PdbFormatError(f"bad kind byte {kind}")
    return Pattern(KINDS[kind], tuple(_read_exact(buf, k)))


def _read_exact(buf, n: int) -> bytes:
    data = buf.read(n)
    if len(data) != n:
        raise PdbFormatError("truncated file")
    return data


def _prelude(layout: int) -> bytes:
    return MAGIC + struct.pack("<HB", FORMAT_VERSION, layout)


def save(obj, path: str | Path) -> int:
    """Write a plain, compressed or delta table; returns bytes written."""
    if isinstance(obj, PatternDatabase):
        head = _prelude(LAYOUT_PLAIN) + _pattern_header(obj.pattern)
        head += struct.pack("<BQ", obj.max_value, len(obj.entries))
    elif isinstance(obj, CompressedPdb):
        head = _prelude(LAYOUT_COMPRESSED) + _pattern_header(obj.pattern)
        head += struct.pack("<BQI", int(obj.entries.max()), len(obj.entries), obj.group_size)
    elif isinstance(obj, DeltaPdb):
        head = _prelude(LAYOUT_DELTA) + _pattern_header(obj.large) + _pattern_header(obj.base)
        head += struct.pack("<BQ", int(obj.entries.max()), len(obj.entries))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(obj.entries, dtype=np.uint8).tobytes())
    return len(head) + len(obj.entries)


def load(path: str | Path):
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != MAGIC:
            raise PdbFormatError(f"{path}: not a pattern database file")
        version, layout = struct.unpack("<HB", _read_exact(fh, 3))
        if version != FORMAT_VERSION:
            raise PdbFormatError(f"{path}: unsupported version {version}")
        pattern = _read_pattern(fh)
        if layout == LAYOUT_DELTA:
            base = _read_pattern(fh)
        max_value, count = struct.unpack("<BQ", _read_exact(fh, 9))
        if layout == LAYOUT_COMPRESSED:
            (group,) = struct.unpack("<I", _read_exact(fh, 4))
        entries = np.frombuffer(_read_exact(fh, count), dtype=np.uint8).copy()
        if fh.read(1):
            raise PdbFormatError(f"{path}: trailing bytes")
    if count and int(entries.max()) != max_value:
        raise PdbFormatError(f"{path}: header max_value {max_value} disagrees with entries")
    if layout == LAYOUT_PLAIN:
        if count != state_count(pattern):
            raise PdbFormatError(f"{path}: {count} entries, pattern needs {state_count(pattern)}")
        return PatternDatabase(pattern, entries, {"entry_count": count})
    if layout == LAYOUT_COMPRESSED:
        return CompressedPdb(pattern, group, entries, state_count(pattern))
    if layout == LAYOUT_DELTA:
        return DeltaPdb(pattern, base, entries)
    raise PdbFormatError(f"{path}: unknown layout {layout}")
