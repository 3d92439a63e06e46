import itertools
from math import factorial

import numpy as np
import pytest

from cubeheur import _kernels as K
from cubeheur.cube import MOVES, SOLVED, apply_move, random_uniform_state
from cubeheur.pattern import (AbstractState, Pattern, abstract, abstract_move, complete,
                              formula_state_count, parse_pattern, pattern_from_spec, rank, state_count,
                              unrank)


def test_table_state_counts():
    assert state_count(Pattern.corners()) == 88_179_840
    assert state_count(Pattern.edges(0, 1, 2, 4, 5, 8)) == 42_577_920
    assert state_count(Pattern.edges(0, 1, 2, 4, 5, 8, 9)) == 510_935_040


def test_count_formula_cases():
    assert state_count(Pattern.corners(0, 1)) == 504
    assert state_count(Pattern.corners(0, 1, 2, 3)) == 136_080
    assert state_count(Pattern.edges(0, 4, 5, 8)) == 190_080
    assert state_count(Pattern.edges()) == factorial(12) * 2 ** 11
    for kind, n in (("corner", 8), ("edge", 12)):
        for k in range(1, n + 1):
            assert state_count(Pattern(kind, tuple(range(k)))) == formula_state_count(kind, k)


def test_solved_projection_is_goal():
    p = Pattern.corners()
    a = abstract(SOLVED, p)
    assert a.partial_perm == tuple(range(8))
    assert a.orients == (0,) * 8
    assert rank(a, p) == 0


def test_projection_ignores_untracked_cubies():
    p = Pattern.corners(0, 1, 2)
    # D turns never touch the three U corners tracked here
    s = apply_move(SOLVED, MOVES[9])
    assert abstract(s, p) == abstract(SOLVED, p)
    e = Pattern.edges(0, 1)
    s2 = apply_move(SOLVED, MOVES[9])
    assert abstract(s2, e) == abstract(SOLVED, e)


@pytest.mark.parametrize("p", [Pattern.corners(), Pattern.corners(2, 5, 7),
                               Pattern.edges(0, 1, 2, 4, 5, 8), Pattern.edges()],
                         ids=lambda p: p.spec())
def test_abstraction_commutes_with_moves(p):
    rng = np.random.default_rng(42)
    for _ in range(10_000 // 4):
        s = random_uniform_state(rng)
        m = int(rng.integers(18))
        assert abstract(apply_move(s, m), p) == abstract_move(abstract(s, p), m, p)


def test_goal_rank_roundtrip():
    for p in (Pattern.corners(3, 1), Pattern.edges(7, 2, 11)):
        r0 = rank(p.goal(), p)
        assert unrank(r0, p) == p.goal()


def test_exhaustive_four_edge_roundtrip():
    p = Pattern.edges(0, 1, 2, 3)
    seen = set()
    for locs in itertools.permutations(range(12), 4):
        for oris in itertools.product(range(2), repeat=4):
            a = AbstractState(locs, oris)
            r = rank(a, p)
            assert 0 <= r < state_count(p)
            seen.add(r)
            assert unrank(r, p) == a
    assert len(seen) == 11880 * 16 == state_count(p)


def test_python_and_compiled_ranks_agree():
    rng = np.random.default_rng(9)
    for p in (Pattern.corners(), Pattern.corners(1, 6), Pattern.edges(0, 1, 2, 4, 5, 8), Pattern.edges()):
        ranks = rng.integers(0, state_count(p), size=500)
        locs, oris = K.unrank_batch(ranks, p.n, p.k, p.base, p.free_orients, p.radix)
        for r, l, o in zip(ranks, locs, oris):
            a = unrank(int(r), p)
            assert a.partial_perm == tuple(l) and a.orients == tuple(o)
            assert rank(a, p) == r
        back = K.rank_batch(locs, oris, p.n, p.k, p.base, p.free_orients, p.radix, K._POPCOUNT)
        assert np.array_equal(back, ranks)


def test_complete_projects_back():
    rng = np.random.default_rng(2)
    for p in (Pattern.corners(0, 5, 6), Pattern.edges(3, 9)):
        for _ in range(100):
            a = abstract(random_uniform_state(rng), p)
            assert abstract(complete(a, p), p) == a


def test_pattern_validation():
    with pytest.raises(ValueError):
        Pattern.corners(0, 0)
    with pytest.raises(ValueError):
        Pattern("corner", (8,))
    with pytest.raises(ValueError):
        Pattern("face", (0,))
    with pytest.raises(ValueError):
        unrank(504, Pattern.corners(0, 1))


def test_pattern_parsing():
    assert parse_pattern("corner", "0..7") == Pattern.corners()
    assert parse_pattern("edge", "0..2,4,5,8") == Pattern.edges(0, 1, 2, 4, 5, 8)
    p = Pattern.edges(0, 1, 2, 4, 5, 8)
    assert pattern_from_spec(p.spec()) == p
