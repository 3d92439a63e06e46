"""Compiled inner loops for rank arithmetic and pattern-database construction.

All kernels take the pattern geometry as plain arguments:
``n`` slots, ``k`` tracked cubies, orientation ``base``, ``free`` independent
orientations, the lexicographic ``radix`` weights and the per-move
``dest``/``twist`` tables from :func:`cubeheur.cube.location_tables`.
"""
import numpy as np
from numba import njit

UNSEEN = np.uint8(255)

_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << 12)], dtype=np.int64)


@njit(cache=True)
def rank_one(locs, oris, n, k, base, free, radix, popcount):
    used = 0
    prank = 0
    for i in range(k):
        loc = locs[i]
        prank += (loc - popcount[used & ((1 << loc) - 1)]) * radix[i]
        used |= 1 << loc
    oidx = 0
    for i in range(free):
        oidx = oidx * base + oris[i]
    ocount = 1
    for i in range(free):
        ocount *= base
    return prank * ocount + oidx


@njit(cache=True)
def unrank_one(r, locs, oris, n, k, base, free, radix):
    ocount = 1
    for i in range(free):
        ocount *= base
    prank = r // ocount
    oidx = r - prank * ocount
    used = 0
    for i in range(k):
        digit = prank // radix[i]
        prank -= digit * radix[i]
        # digit-th unused slot
        for slot in range(n):
            if not (used >> slot) & 1:
                if digit == 0:
                    locs[i] = slot
                    used |= 1 << slot
                    break
                digit -= 1
    for i in range(free - 1, -1, -1):
        oris[i] = oidx % base
        oidx //= base
    if free < k:
        s = 0
        for i in range(k - 1):
            s += oris[i]
        oris[k - 1] = (base - s % base) % base


@njit(cache=True)
def rank_batch(locs, oris, n, k, base, free, radix, popcount):
    out = np.empty(locs.shape[0], dtype=np.int64)
    for j in range(locs.shape[0]):
        out[j] = rank_one(locs[j], oris[j], n, k, base, free, radix, popcount)
    return out


@njit(cache=True)
def unrank_batch(ranks, n, k, base, free, radix):
    locs = np.empty((ranks.shape[0], k), dtype=np.int64)
    oris = np.empty((ranks.shape[0], k), dtype=np.int64)
    for j in range(ranks.shape[0]):
        unrank_one(ranks[j], locs[j], oris[j], n, k, base, free, radix)
    return locs, oris


@njit(cache=True)
def _neighbor(m, locs, oris, nlocs, noris, k, base, dest, twist):
    for i in range(k):
        nlocs[i] = dest[m, locs[i]]
        noris[i] = (oris[i] + twist[m, locs[i]]) % base


@njit(cache=True)
def bfs_layer(entries, depth, backward, n, k, base, free, radix, popcount, dest, twist):
    """Fill layer ``depth + 1`` and return how many entries were assigned.

    Forward mode expands every entry at ``depth``; backward mode scans the
    unseen entries and keeps those with a neighbour at ``depth``.  Both give
    the same layer because every move's inverse is also a move.
    """
    locs = np.empty(k, dtype=np.int64)
    oris = np.empty(k, dtype=np.int64)
    nlocs = np.empty(k, dtype=np.int64)
    noris = np.empty(k, dtype=np.int64)
    nmoves = dest.shape[0]
    nxt = np.uint8(depth + 1)
    found = 0
    for r in range(entries.shape[0]):
        e = entries[r]
        if backward:
            if e != UNSEEN:
                continue
            unrank_one(r, locs, oris, n, k, base, free, radix)
            for m in range(nmoves):
                _neighbor(m, locs, oris, nlocs, noris, k, base, dest, twist)
                r2 = rank_one(nlocs, noris, n, k, base, free, radix, popcount)
                if entries[r2] == depth:
                    entries[r] = nxt
                    found += 1
                    break
        else:
            if e != depth:
                continue
            unrank_one(r, locs, oris, n, k, base, free, radix)
            for m in range(nmoves):
                _neighbor(m, locs, oris, nlocs, noris, k, base, dest, twist)
                r2 = rank_one(nlocs, noris, n, k, base, free, radix, popcount)
                if entries[r2] == UNSEEN:
                    entries[r2] = nxt
                    found += 1
    return found


@njit(cache=True)
def layering_violations(entries, n, k, base, free, radix, popcount, dest, twist):
    """Count entries ``d > 0`` lacking a neighbour at ``d - 1``, and edges
    whose endpoints differ by more than one."""
    locs = np.empty(k, dtype=np.int64)
    oris = np.empty(k, dtype=np.int64)
    nlocs = np.empty(k, dtype=np.int64)
    noris = np.empty(k, dtype=np.int64)
    missing = 0
    jumps = 0
    for r in range(entries.shape[0]):
        d = np.int64(entries[r])
        unrank_one(r, locs, oris, n, k, base, free, radix)
        has_parent = d == 0
        for m in range(dest.shape[0]):
            _neighbor(m, locs, oris, nlocs, noris, k, base, dest, twist)
            d2 = np.int64(entries[rank_one(nlocs, noris, n, k, base, free, radix, popcount)])
            if d2 == d - 1:
                has_parent = True
            if d2 - d > 1 or d - d2 > 1:
                jumps += 1
        if not has_parent:
            missing += 1
    return missing, jumps


@njit(cache=True)
def project_ranks(start, stop, n, k, base, free, radix, sub_idx, sk, sfree, sradix, popcount):
    """For every rank of a large pattern, the rank of its projection onto a
    sub-pattern whose tracked cubies sit at positions ``sub_idx`` of the
    large pattern's tracked list."""
    out = np.empty(stop - start, dtype=np.int64)
    locs = np.empty(k, dtype=np.int64)
    oris = np.empty(k, dtype=np.int64)
    slocs = np.empty(sk, dtype=np.int64)
    soris = np.empty(sk, dtype=np.int64)
    for r in range(start, stop):
        unrank_one(r, locs, oris, n, k, base, free, radix)
        for i in range(sk):
            slocs[i] = locs[sub_idx[i]]
            soris[i] = oris[sub_idx[i]]
        out[r - start] = rank_one(slocs, soris, n, sk, base, sfree, sradix, popcount)
    return out
