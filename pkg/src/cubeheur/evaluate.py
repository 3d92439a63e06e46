"""Heuristic quality metrics, size accounting and the generalization-gap study."""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import tiles
from .encoding import encode_ranks
from .learn import Network, predict
from .pattern import Pattern
from .pdb import CompressedPdb, DeltaPdb, PatternDatabase
from .search import dijkstra_all

MB = 1_000_000
ENCODE_CHUNK = 1 << 16


class EvaluationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# value tables
# ---------------------------------------------------------------------------

def heuristic_values(source, pattern: Pattern | None = None, base: PatternDatabase | None = None,
                     chunk: int = ENCODE_CHUNK) -> np.ndarray:
    """Heuristic value at every rank of a pattern, in rank order.

    ``source`` may be a plain array, a PDB of any layout (a delta PDB needs
    ``base``) or a network (needs ``pattern``; evaluated chunk by chunk).
    """
    if isinstance(source, PatternDatabase):
        return source.entries
    if isinstance(source, CompressedPdb):
        return source.expand()
    if isinstance(source, DeltaPdb):
        if base is None:
            raise EvaluationError("a delta PDB needs its base PDB")
        return source.reconstruct(base)
    if isinstance(source, Network):
        if pattern is None:
            raise EvaluationError("a network needs the pattern it was trained on")
        n = pattern.perm_count * pattern.orient_count
        out = np.empty(n, dtype=np.int64)
        for s in range(0, n, chunk):
            ranks = np.arange(s, min(n, s + chunk))
            out[s:s + len(ranks)] = predict(source, encode_ranks(ranks, pattern).astype(np.float32))
        return out
    return np.asarray(source)


def _pattern_of(obj) -> Pattern | None:
    if isinstance(obj, DeltaPdb):
        return obj.large
    return getattr(obj, "pattern", None)


def _aligned(predictor, truth, pattern=None, base=None) -> tuple[np.ndarray, np.ndarray]:
    tp, pp = _pattern_of(truth), _pattern_of(predictor)
    if tp is not None and pp is not None and tp != pp:
        raise EvaluationError(f"pattern mismatch: {pp.spec()} vs {tp.spec()}")
    pred = heuristic_values(predictor, pattern or tp, base)
    ref = heuristic_values(truth, pattern or pp, base)
    if pred.shape != ref.shape:
        raise EvaluationError(f"{len(pred)} predictions for {len(ref)} states")
    return pred, ref


def overestimation_rate(predictor, truth, pattern: Pattern | None = None,
                        base: PatternDatabase | None = None) -> float:
    """Fraction of abstract states where the predictor exceeds the ground truth."""
    pred, ref = _aligned(predictor, truth, pattern, base)
    return float(np.count_nonzero(pred > ref)) / len(ref)


def avg_heuristic(source, pattern: Pattern | None = None, base: PatternDatabase | None = None) -> float:
    v = heuristic_values(source, pattern, base)
    return float(np.mean(v, dtype=np.float64))


@dataclass
class ClassSummary:
    value: int
    states: int
    exact: int
    over: int
    under: int
    mean_prediction: float
    max_prediction: int


def confusion_summary(pred: np.ndarray, ref: np.ndarray) -> list[ClassSummary]:
    out = []
    for v in np.unique(ref):
        sel = pred[ref == v]
        out.append(ClassSummary(int(v), len(sel), int(np.count_nonzero(sel == v)),
                                int(np.count_nonzero(sel > v)), int(np.count_nonzero(sel < v)),
                                float(sel.mean()), int(sel.max())))
    return out


# ---------------------------------------------------------------------------
# sizes
# ---------------------------------------------------------------------------

@dataclass
class SizeReport:
    raw_bytes: int  # one byte per entry, or bytes per stored parameter
    packed_bytes: int  # four bits per entry for tables; equal to raw for networks
    disk_bytes: int | None = None

    @property
    def megabytes(self) -> float:
        return self.packed_bytes / MB


def size_accounting(obj, path: str | Path | None = None) -> SizeReport:
    """Storage of a table or network.

    Tables are charged four bits per entry in ``packed_bytes`` (every value
    in the cube tables fits a nibble); ``raw_bytes`` is the in-memory size.
    """
    disk = Path(path).stat().st_size if path is not None else None
    if isinstance(obj, Network):
        per = 2 if obj.dtype == np.float16 else obj.dtype.itemsize
        raw = obj.arch.parameter_count * per
        return SizeReport(raw, raw, disk)
    entries = obj.entries
    if int(entries.max(initial=0)) >= 16:
        packed = entries.size
    else:
        packed = -(-entries.size // 2)
    return SizeReport(int(entries.size), int(packed), disk)


def compression_rate(source: SizeReport, model: SizeReport) -> float:
    return source.packed_bytes / model.packed_bytes


@dataclass
class EvalReport:
    method: str
    pattern: str
    avg_heuristic: float
    overestimation_rate: float
    model_size_bytes: int
    pdb_size_bytes: int
    compression_rate: float
    confusion: list[ClassSummary] = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.overestimation_rate <= 1:
            raise EvaluationError("overestimation rate outside [0, 1]")


def evaluate(predictor, truth: PatternDatabase, method: str,
             base: PatternDatabase | None = None) -> EvalReport:
    pred, ref = _aligned(predictor, truth, truth.pattern, base)
    model = size_accounting(predictor) if not isinstance(predictor, np.ndarray) else None
    source = size_accounting(truth)
    model_bytes = model.packed_bytes if model else 0
    return EvalReport(
        method, truth.pattern.spec(),
        float(np.mean(pred, dtype=np.float64)),
        float(np.count_nonzero(pred > ref)) / len(ref),
        model_bytes, source.packed_bytes,
        source.packed_bytes / model_bytes if model_bytes else float("nan"),
        confusion_summary(pred, ref))


REPORT_COLUMNS = ("method", "pattern", "avg_heuristic", "overestimation_rate",
                  "model_size_bytes", "pdb_size_bytes", "compression_rate")


def reports_csv(reports: Sequence[EvalReport], header: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        d = asdict(r)
        w.writerow([d[c] for c in REPORT_COLUMNS])
    return buf.getvalue()


def reports_table(reports: Sequence[EvalReport]) -> str:
    head = ("Heuristic", "Pattern", "Avg. h", "Overest. rate", "Size (MB)", "Compression")
    rows = [(r.method, r.pattern, f"{r.avg_heuristic:.4f}", f"{r.overestimation_rate:.3g}",
             f"{r.model_size_bytes / MB:.3f}", f"{r.compression_rate:.2f}x") for r in reports]
    widths = [max(len(x) for x in col) for col in zip(head, *rows)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*row) for row in rows]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# generalization gap on the 8-puzzle
# ---------------------------------------------------------------------------

def psi_table(h: Callable, hstar: dict, successors: Callable) -> dict:
    """Min over optimal paths of the path maximum of ``h - h*`` for every state.

    One bottleneck pass over all states in increasing ``h*``.
    """
    best = {}
    for v in sorted(hstar, key=hstar.__getitem__):
        gap = h(v) - hstar[v]
        d = hstar[v]
        if d == 0:
            best[v] = gap
            continue
        follow = min(best[w] for w, c in successors(v) if hstar.get(w) == d - c)
        best[v] = max(gap, follow)
    return best


def noisy_heuristic(hstar: dict, rng: np.random.Generator, low: int = -2, high: int = 3) -> dict:
    """``h* + noise`` clipped at 0, with ``h = 0`` at the goal; inadmissible
    whenever ``high > 0``."""
    states = sorted(hstar)
    noise = rng.integers(low, high + 1, size=len(states))
    return {s: (0 if hstar[s] == 0 else max(0, hstar[s] + int(e))) for s, e in zip(states, noise)}


@dataclass
class GapCurve:
    sample_sizes: list[int]
    empirical_means: list[float]  # trial average of the sample mean of psi
    exact_expectation: float
    gaps: list[float]  # trial average of |sample mean - exact|
    trials: int
    seed: int

    def csv(self, header: Iterable[str] = ()) -> str:
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        buf.write("n,empirical_mean,exact_expectation,mean_abs_gap\n")
        for n, m, g in zip(self.sample_sizes, self.empirical_means, self.gaps):
            buf.write(f"{n},{m!r},{self.exact_expectation!r},{g!r}\n")
        return buf.getvalue()


def generalization_gap(psi_values, sample_sizes: Sequence[int] = (64, 256, 1024, 4096),
                       trials: int = 30, seed: int = 0) -> GapCurve:
    """Sample starts uniformly with replacement and compare the sample mean of
    psi with its exact mean over the whole domain."""
    values = np.asarray(psi_values, dtype=np.float64)
    if values.size == 0:
        raise EvaluationError("empty domain")
    exact = float(values.mean())
    rng = np.random.default_rng(seed)
    means, gaps = [], []
    for n in sample_sizes:
        sample_means = np.array([values[rng.integers(0, len(values), size=n)].mean()
                                 for _ in range(trials)])
        means.append(float(sample_means.mean()))
        gaps.append(float(np.abs(sample_means - exact).mean()))
    return GapCurve(list(sample_sizes), means, exact, gaps, trials, seed)


def tile_gap_experiment(sample_sizes=(64, 256, 1024, 4096), trials: int = 30, seed: int = 0,
                        heuristic_seed: int = 0, hstar: dict | None = None) -> GapCurve:
    """Gap curve on the 8-puzzle with a fixed noisy heuristic; the start
    distribution is uniform over all solvable states."""
    if hstar is None:
        hstar = dijkstra_all(tiles.GOAL, tiles.unit_successors)
    h = noisy_heuristic(hstar, np.random.default_rng(heuristic_seed))
    psi = psi_table(h.__getitem__, hstar, tiles.unit_successors)
    values = [psi[s] for s in sorted(psi)]
    return generalization_gap(values, sample_sizes, trials, seed)
