import numpy as np
import pytest

from cubeheur import evaluate as E
from cubeheur import learn as L
from cubeheur import pdb as P
from cubeheur import tiles
from cubeheur.encoding import encode_ranks
from cubeheur.pattern import Pattern
from cubeheur.search import dijkstra_all, min_path_max_gap


@pytest.fixture(scope="module")
def three_corner():
    return P.build_pdb(Pattern.corners(0, 1, 2))


@pytest.fixture(scope="module")
def tile_hstar():
    return dijkstra_all(tiles.GOAL, tiles.unit_successors)


def test_zero_predictor_is_admissible(three_corner):
    zero = np.zeros(len(three_corner), dtype=np.uint8)
    assert E.overestimation_rate(zero, three_corner) == 0
    assert E.avg_heuristic(zero) == 0


def test_shifted_predictor(three_corner):
    n = len(three_corner)
    plus = three_corner.entries.astype(np.int64) + 1
    assert E.overestimation_rate(plus, three_corner) == 1
    plus[three_corner.entries == 0] = 0
    assert E.overestimation_rate(plus, three_corner) == (n - 1) / n


def test_compressed_never_overestimates(three_corner):
    for g in (1, 2, 7, 64, 1000):
        c = P.min_compress(three_corner, g)
        assert E.overestimation_rate(c, three_corner) == 0
        assert E.avg_heuristic(c) <= E.avg_heuristic(three_corner)


def test_pattern_mismatch(three_corner):
    other = P.build_pdb(Pattern.corners(0, 1))
    with pytest.raises(E.EvaluationError):
        E.overestimation_rate(P.min_compress(other, 2), three_corner)


def test_delta_values(three_corner):
    base = P.build_pdb(Pattern.corners(0, 1))
    d = P.build_delta(three_corner, base)
    assert E.overestimation_rate(d, three_corner, base=base) == 0
    assert E.avg_heuristic(d, base=base) == pytest.approx(three_corner.average())
    with pytest.raises(E.EvaluationError):
        E.heuristic_values(d)


def test_network_values_match_predict(three_corner):
    p = three_corner.pattern
    arch = L.NetworkArchitecture(324, (8,), int(three_corner.max_value) + 1)
    net = L.init_network(arch, 0)
    v = E.heuristic_values(net, p, chunk=1000)
    assert np.array_equal(v[:50], L.predict(net, encode_ranks(np.arange(50), p).astype(np.float32)))
    with pytest.raises(E.EvaluationError):
        E.heuristic_values(net)


def test_size_accounting():
    db = P.PatternDatabase(Pattern.corners(), np.zeros(88_179_840, dtype=np.uint8))
    s = E.size_accounting(db)
    assert s.raw_bytes == 88_179_840
    assert round(s.megabytes, 2) == 44.09
    arch = L.NetworkArchitecture(10, (6,), 4)
    net = L.quantize_half(L.init_network(arch, 0))
    assert E.size_accounting(net).raw_bytes == 2 * arch.parameter_count
    half = E.SizeReport(s.packed_bytes // 2, s.packed_bytes // 2)
    assert E.compression_rate(s, half) == 2.0


def test_compressed_pdb_size_matches_group():
    db = P.PatternDatabase(Pattern.corners(), np.zeros(88_179_840, dtype=np.uint8))
    c = P.min_compress(db, 23)
    assert round(E.size_accounting(c).megabytes, 2) == 1.92
    assert round(E.compression_rate(E.size_accounting(db), E.size_accounting(c)), 1) == 23.0


def test_report_and_table(three_corner, tmp_path):
    c = P.min_compress(three_corner, 4)
    rep = E.evaluate(c, three_corner, "compressed")
    assert rep.overestimation_rate == 0
    assert rep.compression_rate == pytest.approx(4.0, rel=1e-3)
    assert sum(cs.states for cs in rep.confusion) == len(three_corner)
    assert sum(cs.over for cs in rep.confusion) == 0
    text = E.reports_csv([rep], ["seed=0"])
    assert text.splitlines()[0] == "# seed=0"
    assert text.splitlines()[1] == ",".join(E.REPORT_COLUMNS)
    assert "compressed" in E.reports_table([rep])
    # reproducible from the serialized artifact
    P.save(c, tmp_path / "c.apdb")
    again = E.evaluate(P.load(tmp_path / "c.apdb"), three_corner, "compressed")
    assert E.reports_csv([again]) == E.reports_csv([rep])


def test_psi_table_matches_bottleneck(tile_hstar):
    h = E.noisy_heuristic(tile_hstar, np.random.default_rng(0))
    assert h[tiles.GOAL] == 0
    table = E.psi_table(h.__getitem__, tile_hstar, tiles.unit_successors)
    rng = np.random.default_rng(1)
    for _ in range(30):
        s = tiles.random_state(rng)
        assert table[s] == min_path_max_gap(tiles.unit_successors, h.__getitem__, tile_hstar, s)


def test_admissible_psi_is_flat(tile_hstar):
    table = E.psi_table(lambda s: 0, tile_hstar, tiles.unit_successors)
    assert all(v <= 0 for v in table.values())


def test_single_state_domain_has_no_gap():
    curve = E.generalization_gap([3.0], (1, 10, 100), trials=5)
    assert curve.gaps == [0, 0, 0] and curve.exact_expectation == 3.0


def test_exact_expectation_independent_of_seed():
    values = np.random.default_rng(0).integers(0, 5, size=1000)
    a = E.generalization_gap(values, seed=1)
    b = E.generalization_gap(values, seed=2)
    assert a.exact_expectation == b.exact_expectation == values.mean()
    assert a.gaps != b.gaps
    assert E.generalization_gap(values, seed=1) == a
    assert a.csv().splitlines()[0] == "n,empirical_mean,exact_expectation,mean_abs_gap"
