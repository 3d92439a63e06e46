"""Pattern abstractions of the cube and their dense integer indexing.

A pattern keeps a subset of the corners or of the edges.  Projecting a full
state onto a pattern records where each tracked cubie is and how it is
twisted; everything else is forgotten.  Every face turn acts on these
projections directly, so the projected states form a smaller graph whose
distances are admissible for the full cube.

Index layout: ``rank = perm_rank * base**m + orient_index`` where
``perm_rank`` ranks the tracked cubies' locations as a k-permutation of
``n`` slots in lexicographic order, ``orient_index`` reads the orientations
as a big-endian base-``base`` number and ``m`` is the number of free
orientations (``k``, or ``k - 1`` when every cubie of the kind is tracked
because the last one is then forced by the orientation sum).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import factorial, perm

import numpy as np

from .cube import N_CORNERS, N_EDGES, CubieState, Move, location_tables

KINDS = ("corner", "edge")


@dataclass(frozen=True)
class AbstractState:
    partial_perm: tuple[int, ...]
    orients: tuple[int, ...]


@dataclass(frozen=True)
class Pattern:
    kind: str
    tracked: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        object.__setattr__(self, "tracked", tuple(int(t) for t in self.tracked))
        if not self.tracked:
            raise ValueError("a pattern must track at least one cubie")
        if len(set(self.tracked)) != len(self.tracked):
            raise ValueError(f"tracked cubies are not distinct: {self.tracked}")
        if any(t < 0 or t >= self.n for t in self.tracked):
            raise ValueError(f"tracked index out of range for {self.kind}s: {self.tracked}")

    @classmethod
    def corners(cls, *tracked: int) -> "Pattern":
        return cls("corner", tuple(tracked) or tuple(range(N_CORNERS)))

    @classmethod
    def edges(cls, *tracked: int) -> "Pattern":
        return cls("edge", tuple(tracked) or tuple(range(N_EDGES)))

    @property
    def n(self) -> int:
        return N_CORNERS if self.kind == "corner" else N_EDGES

    @property
    def k(self) -> int:
        return len(self.tracked)

    @property
    def base(self) -> int:
        return 3 if self.kind == "corner" else 2

    @property
    def free_orients(self) -> int:
        return self.k - 1 if self.k == self.n else self.k

    @property
    def perm_count(self) -> int:
        return perm(self.n, self.k)

    @property
    def orient_count(self) -> int:
        return self.base ** self.free_orients

    @property
    def label(self) -> str:
        return f"{self.k}-{self.kind}"

    @cached_property
    def radix(self) -> np.ndarray:
        """Lexicographic weights: ``radix[i] = P(n-1-i, k-1-i)``."""
        return np.array([perm(self.n - 1 - i, self.k - 1 - i) for i in range(self.k)],
                        dtype=np.int64)

    @cached_property
    def move_tables(self) -> tuple[np.ndarray, np.ndarray]:
        return location_tables(self.kind)

    def is_subpattern_of(self, other: "Pattern") -> bool:
        return self.kind == other.kind and set(self.tracked) <= set(other.tracked)

    def goal(self) -> AbstractState:
        return AbstractState(self.tracked, (0,) * self.k)

    def spec(self) -> str:
        return f"{self.kind}s:" + ",".join(str(t) for t in self.tracked)


def state_count(p: Pattern) -> int:
    """Number of abstract states (all of them are reachable)."""
    return p.perm_count * p.orient_count


def formula_state_count(kind: str, k: int) -> int:
    n = N_CORNERS if kind == "corner" else N_EDGES
    base = 3 if kind == "corner" else 2
    return factorial(n) // factorial(n - k) * base ** (k - 1 if k == n else k)


def abstract(state: CubieState, p: Pattern) -> AbstractState:
    if p.kind == "corner":
        cubie_at, orient_at = state.corner_perm, state.corner_orient
    else:
        cubie_at, orient_at = state.edge_perm, state.edge_orient
    where = [0] * p.n
    for pos, cubie in enumerate(cubie_at):
        where[cubie] = pos
    locs = tuple(where[c] for c in p.tracked)
    return AbstractState(locs, tuple(orient_at[loc] for loc in locs))


def abstract_move(a: AbstractState, m: Move | int, p: Pattern) -> AbstractState:
    """Apply a face turn directly to a projected state."""
    idx = m if isinstance(m, int) else m.index
    dest, twist = p.move_tables
    locs = tuple(int(dest[idx, loc]) for loc in a.partial_perm)
    oris = tuple((o + int(twist[idx, loc])) % p.base
                 for loc, o in zip(a.partial_perm, a.orients))
    return AbstractState(locs, oris)


def rank(a: AbstractState, p: Pattern) -> int:
    used = 0
    prank = 0
    for i, loc in enumerate(a.partial_perm):
        smaller_used = bin(used & ((1 << loc) - 1)).count("1")
        prank += (loc - smaller_used) * int(p.radix[i])
        used |= 1 << loc
    oidx = 0
    for o in a.orients[:p.free_orients]:
        oidx = oidx * p.base + o
    return prank * p.orient_count + oidx


def unrank(r: int, p: Pattern) -> AbstractState:
    if not 0 <= r < state_count(p):
        raise ValueError(f"rank {r} outside [0, {state_count(p)})")
    prank, oidx = divmod(r, p.orient_count)
    free = list(range(p.n))
    locs = []
    for i in range(p.k):
        digit, prank = divmod(prank, int(p.radix[i]))
        locs.append(free.pop(digit))
    oris = [0] * p.k
    for i in range(p.free_orients - 1, -1, -1):
        oidx, oris[i] = divmod(oidx, p.base)
    if p.free_orients < p.k:
        oris[-1] = (-sum(oris[:-1])) % p.base
    return AbstractState(tuple(locs), tuple(oris))


def rank_state(state: CubieState, p: Pattern) -> int:
    return rank(abstract(state, p), p)


def complete(a: AbstractState, p: Pattern) -> CubieState:
    """Canonical full state projecting onto ``a``.

    Untracked cubies fill the free slots in ascending order with zero
    orientation; the other kind of cubie is left solved.
    """
    cubie_at = [-1] * p.n
    orient_at = [0] * p.n
    for c, loc, o in zip(p.tracked, a.partial_perm, a.orients):
        cubie_at[loc] = c
        orient_at[loc] = o
    rest = iter(c for c in range(p.n) if c not in p.tracked)
    for pos in range(p.n):
        if cubie_at[pos] < 0:
            cubie_at[pos] = next(rest)
    solved_c = (tuple(range(N_CORNERS)), (0,) * N_CORNERS)
    solved_e = (tuple(range(N_EDGES)), (0,) * N_EDGES)
    if p.kind == "corner":
        return CubieState(tuple(cubie_at), tuple(orient_at), *solved_e)
    return CubieState(*solved_c, tuple(cubie_at), tuple(orient_at))


def parse_pattern(kind: str, text: str) -> Pattern:
    """Parse ``"0..7"``, ``"0,1,5"`` or a mix like ``"0..3,6"``."""
    tracked: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            tracked.extend(range(int(lo), int(hi) + 1))
        elif part:
            tracked.append(int(part))
    return Pattern(kind, tuple(tracked))


def pattern_from_spec(spec: str) -> Pattern:
    kind, _, body = spec.partition(":")
    return parse_pattern(kind.rstrip("s"), body)
