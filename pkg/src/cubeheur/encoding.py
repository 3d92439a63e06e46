"""One-hot network inputs for pattern states.

Corner patterns are drawn as a sticker image: 6 faces x 9 stickers x 6
colours = 324 binary features.  Edges and centres are drawn solved and
untracked corners are placed by :func:`cubeheur.pattern.complete`, so the
image depends only on the abstract state.

Edge patterns with ``n`` tracked edges use ``3n`` channels of 12 cells
(a 4x3 grid over the edge slots): the edge's location, a mark at that
location when the edge is correctly oriented, and a constant map of its home
slot.
"""
from __future__ import annotations

import numpy as np

from . import _kernels as K
from .cube import CubieState
from .pattern import Pattern, abstract, complete

N_FACELETS = 54
N_COLORS = 6
CORNER_FEATURES = N_FACELETS * N_COLORS

CORNER_FACELET = np.array([
    [8, 9, 20], [6, 18, 38], [0, 36, 47], [2, 45, 11],
    [29, 26, 15], [27, 44, 24], [33, 53, 42], [35, 17, 51],
])
CORNER_COLOR = np.array([
    [0, 1, 2], [0, 2, 4], [0, 4, 5], [0, 5, 1],
    [3, 2, 1], [3, 4, 2], [3, 5, 4], [3, 1, 5],
])
EDGE_FACELET = np.array([
    [5, 10], [7, 19], [3, 37], [1, 46], [32, 16], [28, 25],
    [30, 43], [34, 52], [23, 12], [21, 41], [50, 39], [48, 14],
])
EDGE_COLOR = np.array([
    [0, 1], [0, 2], [0, 4], [0, 5], [3, 1], [3, 2],
    [3, 4], [3, 5], [2, 1], [2, 4], [5, 4], [5, 1],
])


def facelets(state: CubieState) -> np.ndarray:
    """Colour index (0..5 for U R F D L B) of each of the 54 stickers."""
    f = np.repeat(np.arange(6), 9)
    for i in range(8):
        j, o = state.corner_perm[i], state.corner_orient[i]
        for n in range(3):
            f[CORNER_FACELET[i, (n + o) % 3]] = CORNER_COLOR[j, n]
    for i in range(12):
        j, o = state.edge_perm[i], state.edge_orient[i]
        for n in range(2):
            f[EDGE_FACELET[i, (n + o) % 2]] = EDGE_COLOR[j, n]
    return f


def feature_width(p: Pattern) -> int:
    return CORNER_FEATURES if p.kind == "corner" else 3 * p.k * 12


def encode_one_hot(state: CubieState, p: Pattern) -> np.ndarray:
    a = abstract(state, p)
    if p.kind == "corner":
        colors = facelets(complete(a, p))
        out = np.zeros((N_FACELETS, N_COLORS), dtype=np.uint8)
        out[np.arange(N_FACELETS), colors] = 1
        return out.reshape(-1)
    out = np.zeros((p.k, 3, 12), dtype=np.uint8)
    for i, (cubie, loc, o) in enumerate(zip(p.tracked, a.partial_perm, a.orients)):
        out[i, 0, loc] = 1
        if o == 0:
            out[i, 1, loc] = 1
        out[i, 2, cubie] = 1
    return out.reshape(-1)


def encode_ranks(ranks: np.ndarray, p: Pattern) -> np.ndarray:
    """Batch version of :func:`encode_one_hot` for abstract states given by rank."""
    ranks = np.asarray(ranks, dtype=np.int64)
    locs, oris = K.unrank_batch(ranks, p.n, p.k, p.base, p.free_orients, p.radix)
    rows = np.arange(len(ranks))[:, None]
    if p.kind == "edge":
        out = np.zeros((len(ranks), p.k, 3, 12), dtype=np.uint8)
        chan = np.arange(p.k)[None, :]
        out[rows, chan, 0, locs] = 1
        out[rows, chan, 1, locs] = (oris == 0)
        out[:, np.arange(p.k), 2, np.array(p.tracked)] = 1
        return out.reshape(len(ranks), -1)

    # canonical completion: untracked corners fill free slots in ascending order
    cubie_at = np.full((len(ranks), 8), -1, dtype=np.int64)
    orient_at = np.zeros((len(ranks), 8), dtype=np.int64)
    cubie_at[rows, locs] = np.array(p.tracked)[None, :]
    orient_at[rows, locs] = oris
    untracked = np.array([c for c in range(8) if c not in p.tracked], dtype=np.int64)
    if len(untracked):
        free = cubie_at < 0
        cubie_at[free] = np.tile(untracked, len(ranks))

    colors = np.tile(np.repeat(np.arange(6), 9), (len(ranks), 1))
    for i in range(8):
        for n in range(3):
            slot = CORNER_FACELET[i][(n + orient_at[:, i]) % 3]
            colors[np.arange(len(ranks)), slot] = CORNER_COLOR[cubie_at[:, i], n]
    out = np.zeros((len(ranks), N_FACELETS, N_COLORS), dtype=np.uint8)
    out[rows, np.arange(N_FACELETS)[None, :], colors] = 1
    return out.reshape(len(ranks), -1)
