"""The 3x3 sliding-tile puzzle, small enough for exact all-states oracles.

States are 9-tuples read row by row, ``0`` marking the blank.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

SIDE = 3
CELLS = SIDE * SIDE
GOAL: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8, 0)
HIDDEN = -1

TilePuzzleState = tuple  # 9 tiles row-major, 0 = blank


def _neighbours(cell: int) -> tuple[int, ...]:
    r, c = divmod(cell, SIDE)
    out = []
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        rr, cc = r + dr, c + dc
        if 0 <= rr < SIDE and 0 <= cc < SIDE:
            out.append(rr * SIDE + cc)
    return tuple(out)


ADJACENT = tuple(_neighbours(i) for i in range(CELLS))


def validate(state: tuple[int, ...]) -> None:
    if sorted(state) != list(range(CELLS)):
        raise ValueError(f"not a permutation of 0..8: {state}")
    if not is_solvable(state):
        raise ValueError(f"state {state} cannot reach the goal")


def inversions(state: Iterable[int]) -> int:
    tiles = [t for t in state if t != 0]
    return sum(1 for i in range(len(tiles)) for j in range(i + 1, len(tiles)) if tiles[i] > tiles[j])


def is_solvable(state: tuple[int, ...]) -> bool:
    # odd width: blank moves never change inversion parity
    return inversions(state) % 2 == inversions(GOAL) % 2


def successors(state: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    b = state.index(0)
    for cell in ADJACENT[b]:
        s = list(state)
        s[b], s[cell] = s[cell], 0
        yield tuple(s)


def unit_successors(state):
    return [(s, 1) for s in successors(state)]


def parse_state(text: str) -> tuple[int, ...]:
    state = tuple(int(t) for t in text.split())
    validate(state)
    return state


def serialize(state: tuple[int, ...]) -> str:
    return " ".join(str(t) for t in state)


def random_state(rng: np.random.Generator) -> tuple[int, ...]:
    while True:
        s = tuple(int(v) for v in rng.permutation(CELLS))
        if is_solvable(s):
            return s


@dataclass
class TilePatternDb:
    """Exact distances in the space where only ``tracked`` tiles (and the
    blank) are distinguishable."""

    tracked: tuple[int, ...]
    table: dict

    def project(self, state: tuple[int, ...]) -> tuple[int, ...]:
        keep = set(self.tracked)
        return tuple(t if t == 0 or t in keep else HIDDEN for t in state)

    def __call__(self, state: tuple[int, ...]) -> int:
        return self.table[self.project(state)]

    def __len__(self) -> int:
        return len(self.table)


def build_tile_pdb(tracked: Iterable[int]) -> TilePatternDb:
    """Breadth-first search from the projected goal over blank moves."""
    db = TilePatternDb(tuple(sorted(tracked)), {})
    start = db.project(GOAL)
    db.table[start] = 0
    queue = deque([start])
    while queue:
        a = queue.popleft()
        d = db.table[a]
        for b in successors(a):
            if b not in db.table:
                db.table[b] = d + 1
                queue.append(b)
    return db


class MaxHeuristic:
    """Pointwise maximum of several heuristics (admissible and consistent if
    every part is)."""

    def __init__(self, parts):
        self.parts = list(parts)

    def __call__(self, state) -> int:
        return max(p(state) for p in self.parts)


def default_pdb_heuristic() -> MaxHeuristic:
    return MaxHeuristic([build_tile_pdb((1, 2, 3, 4)), build_tile_pdb((5, 6, 7, 8))])
