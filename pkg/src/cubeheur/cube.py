"""Cubie-level model of the 3x3 Rubik's Cube.

Corners and edges are numbered in the usual Kociemba order::

    corners: URF UFL ULB UBR DFR DLF DBL DRB
    edges:   UR UF UL UB DR DF DL DB FR FL BL BR

A state stores, for every *position*, which cubie sits there and how it is
twisted.  Corner orientation counts clockwise twists of the cubie's U/D
sticker away from the U/D face of its position; edge orientation is a flip bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

N_CORNERS = 8
N_EDGES = 12

CORNER_NAMES = ("URF", "UFL", "ULB", "UBR", "DFR", "DLF", "DBL", "DRB")
EDGE_NAMES = ("UR", "UF", "UL", "UB", "DR", "DF", "DL", "DB", "FR", "FL", "BL", "BR")
FACES = "URFDLB"
TURN_SUFFIX = ("", "2", "'")


@dataclass(frozen=True)
class CubieState:
    corner_perm: tuple[int, ...]
    corner_orient: tuple[int, ...]
    edge_perm: tuple[int, ...]
    edge_orient: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.corner_perm) != list(range(N_CORNERS)):
            raise ValueError(f"corner_perm is not a permutation of 0..7: {self.corner_perm}")
        if sorted(self.edge_perm) != list(range(N_EDGES)):
            raise ValueError(f"edge_perm is not a permutation of 0..11: {self.edge_perm}")
        if len(self.corner_orient) != N_CORNERS or any(o not in (0, 1, 2) for o in self.corner_orient):
            raise ValueError(f"bad corner_orient: {self.corner_orient}")
        if len(self.edge_orient) != N_EDGES or any(o not in (0, 1) for o in self.edge_orient):
            raise ValueError(f"bad edge_orient: {self.edge_orient}")

    @classmethod
    def solved(cls) -> "CubieState":
        return SOLVED

    def is_solved(self) -> bool:
        return self == SOLVED

    def multiply(self, other: "CubieState") -> "CubieState":
        """Return ``self * other``: first apply ``self``, then ``other``."""
        cp = tuple(self.corner_perm[other.corner_perm[i]] for i in range(N_CORNERS))
        co = tuple(
            (self.corner_orient[other.corner_perm[i]] + other.corner_orient[i]) % 3
            for i in range(N_CORNERS)
        )
        ep = tuple(self.edge_perm[other.edge_perm[i]] for i in range(N_EDGES))
        eo = tuple(
            (self.edge_orient[other.edge_perm[i]] + other.edge_orient[i]) % 2
            for i in range(N_EDGES)
        )
        return CubieState(cp, co, ep, eo)

    def serialize(self) -> str:
        """Canonical text form: four space-separated arrays joined by spaces."""
        return " ".join(str(v) for v in self.corner_perm + self.corner_orient
                        + self.edge_perm + self.edge_orient)

    @classmethod
    def parse(cls, text: str) -> "CubieState":
        vals = [int(t) for t in text.split()]
        if len(vals) != 2 * N_CORNERS + 2 * N_EDGES:
            raise ValueError(f"expected 40 integers, got {len(vals)}")
        return cls(tuple(vals[0:8]), tuple(vals[8:16]), tuple(vals[16:28]), tuple(vals[28:40]))

    def is_reachable(self) -> bool:
        """Orientation sums and permutation parities of a legal cube."""
        return (sum(self.corner_orient) % 3 == 0 and sum(self.edge_orient) % 2 == 0
                and _parity(self.corner_perm) == _parity(self.edge_perm))


def _parity(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    parity = 0
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


SOLVED = CubieState(tuple(range(8)), (0,) * 8, tuple(range(12)), (0,) * 12)

# Quarter turns clockwise, written as "position i is replaced by cubie cp[i]".
_BASIC = {
    "U": CubieState((3, 0, 1, 2, 4, 5, 6, 7), (0,) * 8,
                    (3, 0, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11), (0,) * 12),
    "R": CubieState((4, 1, 2, 0, 7, 5, 6, 3), (2, 0, 0, 1, 1, 0, 0, 2),
                    (8, 1, 2, 3, 11, 5, 6, 7, 4, 9, 10, 0), (0,) * 12),
    "F": CubieState((1, 5, 2, 3, 0, 4, 6, 7), (1, 2, 0, 0, 2, 1, 0, 0),
                    (0, 9, 2, 3, 4, 8, 6, 7, 1, 5, 10, 11),
                    (0, 1, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0)),
    "D": CubieState((0, 1, 2, 3, 5, 6, 7, 4), (0,) * 8,
                    (0, 1, 2, 3, 5, 6, 7, 4, 8, 9, 10, 11), (0,) * 12),
    "L": CubieState((0, 2, 6, 3, 4, 1, 5, 7), (0, 1, 2, 0, 0, 2, 1, 0),
                    (0, 1, 10, 3, 4, 5, 9, 7, 8, 2, 6, 11), (0,) * 12),
    "B": CubieState((0, 1, 3, 7, 4, 5, 2, 6), (0, 0, 1, 2, 0, 0, 2, 1),
                    (0, 1, 2, 11, 4, 5, 6, 10, 8, 9, 3, 7),
                    (0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 1)),
}


@dataclass(frozen=True)
class Move:
    """One of the 18 face turns; ``turns`` is 1 (quarter), 2 (half) or 3 (counter-quarter)."""

    face: str
    turns: int

    def __post_init__(self):
        if self.face not in FACES or self.turns not in (1, 2, 3):
            raise ValueError(f"invalid move {self.face!r}/{self.turns}")

    @property
    def index(self) -> int:
        return FACES.index(self.face) * 3 + self.turns - 1

    def inverse(self) -> "Move":
        return Move(self.face, 4 - self.turns)

    def __str__(self) -> str:
        return self.face + TURN_SUFFIX[self.turns - 1]

    @classmethod
    def parse(cls, token: str) -> "Move":
        face, suffix = token[0], token[1:]
        return cls(face, TURN_SUFFIX.index(suffix) + 1)


MOVES: tuple[Move, ...] = tuple(Move(f, t) for f in FACES for t in (1, 2, 3))


def _build_move_cubes() -> tuple[CubieState, ...]:
    cubes = []
    for face in FACES:
        c = _BASIC[face]
        acc = c
        for _ in range(3):
            cubes.append(acc)
            acc = acc.multiply(c)
    return tuple(cubes)


MOVE_CUBES: tuple[CubieState, ...] = _build_move_cubes()


def apply_move(state: CubieState, m: Move | int) -> CubieState:
    idx = m if isinstance(m, int) else m.index
    return state.multiply(MOVE_CUBES[idx])


def apply_moves(state: CubieState, moves: Iterable[Move | int]) -> CubieState:
    for m in moves:
        state = apply_move(state, m)
    return state


def parse_moves(text: str) -> list[Move]:
    return [Move.parse(tok) for tok in text.split()]


def random_state(rng: np.random.Generator, scramble_length: int = 40) -> CubieState:
    """A state reached by a random walk of ``scramble_length`` moves."""
    idx = rng.integers(0, len(MOVES), size=scramble_length)
    return apply_moves(SOLVED, (int(i) for i in idx))


def random_uniform_state(rng: np.random.Generator) -> CubieState:
    """A uniformly random reachable state."""
    cp = [int(v) for v in rng.permutation(N_CORNERS)]
    ep = [int(v) for v in rng.permutation(N_EDGES)]
    if _parity(cp) != _parity(ep):
        ep[0], ep[1] = ep[1], ep[0]
    co = [int(v) for v in rng.integers(0, 3, size=N_CORNERS - 1)]
    co.append((-sum(co)) % 3)
    eo = [int(v) for v in rng.integers(0, 2, size=N_EDGES - 1)]
    eo.append(sum(eo) % 2)
    return CubieState(tuple(cp), tuple(co), tuple(ep), tuple(eo))


def location_tables(kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Per-move tables describing how a single cubie travels.

    Returns ``(dest, twist)`` of shape ``(18, n)``: a cubie sitting at
    position ``p`` moves to ``dest[m, p]`` and its orientation grows by
    ``twist[m, p]`` (modulo 3 for corners, 2 for edges).
    """
    n = N_CORNERS if kind == "corner" else N_EDGES
    dest = np.zeros((len(MOVES), n), dtype=np.int64)
    twist = np.zeros((len(MOVES), n), dtype=np.int64)
    for m, cube in enumerate(MOVE_CUBES):
        perm = cube.corner_perm if kind == "corner" else cube.edge_perm
        orient = cube.corner_orient if kind == "corner" else cube.edge_orient
        for i in range(n):
            dest[m, perm[i]] = i
            twist[m, perm[i]] = orient[i]
    return dest, twist
