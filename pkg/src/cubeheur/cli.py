"""Command-line entry point: ``cubeheur <command> [flags]``.

Settings resolve as command-line flag, then the matching key of the JSON
config file (``--config``; top-level keys apply to every command, a section
named after the command overrides them), then the built-in default.  Every
command echoes the resolved settings as ``#`` lines before its results.

Exit codes: 0 success, 1 verification failure, 2 budget exceeded, 3 bad input.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import evaluate as E
from . import learn as L
from . import pdb as P
from . import tiles
from .cube import CubieState, SOLVED, apply_move, apply_moves, parse_moves, random_state
from .encoding import encode_ranks
from .pattern import Pattern, parse_pattern, state_count
from .search import (BudgetExceeded, DEFAULT_EXPANSION_BUDGET, SearchError, SearchProblem, astar,
                     check_suboptimality_bound, dijkstra_all, min_path_max_gap, random_graph)

OUTPUT_DIR_ENV = "CUBEHEUR_OUTPUT_DIR"

EXIT_OK, EXIT_VERIFY, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3

# Per-pattern training presets: (lr, batch size, beta, eta)
TRAIN_PRESETS = {
    "corner": (1e-3, 100_000, 1.0, 0.01),
    "edge6": (3e-3, 100_000, 0.7, 0.001),
    "edge7": (3e-3, 500_000, 0.6, 0.001),
    "delta": (3e-3, 100_000, 0.9, 0.001),
}

DEFAULTS = {
    "seed": 0,
    "threads": 1,
    "build-pdb": {"memory_budget": P.DEFAULT_MEMORY_BUDGET, "allow_large": False},
    "compress": {"group": 23},
    "delta": {"verify": True},
    "train": {"loss": "cea", "optimizer": "adam", "epochs": 200, "hidden": "512,512",
              "schedule_window": 20, "schedule": True, "lr_decay": "none", "sample": 0,
              "checkpoint_every": 1, "half": False, "time_limit": 0.0},
    "evaluate": {},
    "solve": {"domain": "tile8", "heuristic": "pdb", "max_expansions": DEFAULT_EXPANSION_BUDGET},
    "instances": {"domain": "tile8", "count": 100, "scramble": 8},
    "gap": {"sizes": "64,256,1024,4096", "trials": 30, "heuristic_seed": 0},
    "bound-check": {"domain": "graph", "trials": 1000, "max_nodes": 200,
                    "max_expansions": DEFAULT_EXPANSION_BUDGET},
}


class InputError(ValueError):
    pass


class ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    values: dict

    def __getattr__(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None

    def header(self) -> list[str]:
        lines = [f"command={self.command}"]
        lines += [f"{k}={self.values[k]}" for k in sorted(self.values)]
        return lines


def resolve(args: argparse.Namespace, command: str) -> RunConfig:
    file_cfg = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
    section = file_cfg.get(command, {})
    builtin = {k: v for k, v in DEFAULTS.items() if not isinstance(v, dict)}
    builtin.update(DEFAULTS.get(command, {}))
    values = {}
    for key, flag in vars(args).items():
        if key in ("config", "func", "command", "verbose"):
            continue
        if flag is not None:
            values[key] = flag
        elif key in section:
            values[key] = section[key]
        elif key in file_cfg and not isinstance(file_cfg[key], dict):
            values[key] = file_cfg[key]
        else:
            values[key] = builtin.get(key)
    return RunConfig(command, values)


def echo(cfg: RunConfig, out=None) -> None:
    out = out or sys.stdout
    for line in cfg.header():
        out.write(f"# {line}\n")


def output_path(path: str | None, default_name: str) -> Path:
    if path:
        return Path(path)
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / default_name


def set_threads(n: int) -> None:
    import numba
    with warnings.catch_warnings():
        # numba may complain about the TBB version while picking a threading layer
        warnings.simplefilter("ignore")
        try:
            numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
        except ValueError:
            pass


def write_csv(path: Path | None, cfg: RunConfig, header: str, rows: list[str]) -> str:
    text = "".join(f"# {line}\n" for line in cfg.header()) + header + "\n"
    text += "".join(r + "\n" for r in rows)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return text


def load_any_pdb(path: str):
    try:
        return P.load(path)
    except OSError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def stem(p: Pattern) -> str:
    return f"{p.kind}s_" + "_".join(str(c) for c in p.tracked)


def pattern_from_args(cfg: RunConfig) -> Pattern:
    if bool(cfg.corners) == bool(cfg.edges):
        raise InputError("give exactly one of --corners / --edges")
    return parse_pattern("corner", cfg.corners) if cfg.corners else parse_pattern("edge", cfg.edges)


def cmd_build_pdb(cfg: RunConfig) -> int:
    p = pattern_from_args(cfg)
    if p.kind == "edge" and p.k >= 7 and not cfg.allow_large:
        raise InputError(f"{p.label} has {state_count(p):,} states; pass --allow-large to build it")
    echo(cfg)
    t0 = time.perf_counter()
    db = P.build_pdb(p, memory_budget=int(cfg.memory_budget))
    elapsed = time.perf_counter() - t0
    out = output_path(cfg.out, f"{stem(p)}.apdb")
    out.parent.mkdir(parents=True, exist_ok=True)
    n = P.save(db, out)
    print("h,states")
    for h, c in db.distribution().items():
        print(f"{h},{c}")
    print(f"# states={len(db)} average={db.average():.4f} max={db.max_value} "
          f"file={out} bytes={n} seconds={elapsed:.1f}")
    return EXIT_OK


def cmd_compress(cfg: RunConfig) -> int:
    db = load_any_pdb(cfg.input)
    if not isinstance(db, P.PatternDatabase):
        raise InputError("compress needs an uncompressed PDB")
    echo(cfg)
    c = P.min_compress(db, int(cfg.group))
    out = output_path(cfg.out, f"{stem(db.pattern)}.g{cfg.group}.apdb")
    n = P.save(c, out)
    over = E.overestimation_rate(c, db)
    print(f"# entries={len(c.entries)} average={c.average():.4f} overestimation_rate={over} "
          f"file={out} bytes={n}")
    return EXIT_VERIFY if over else EXIT_OK


def cmd_delta(cfg: RunConfig) -> int:
    large, base = load_any_pdb(cfg.large), load_any_pdb(cfg.base)
    if not (isinstance(large, P.PatternDatabase) and isinstance(base, P.PatternDatabase)):
        raise InputError("delta needs two uncompressed PDBs")
    echo(cfg)
    try:
        d = P.build_delta(large, base)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = output_path(cfg.out, f"delta_{stem(large.pattern)}_{stem(base.pattern)}.apdb")
    n = P.save(d, out)
    print("delta,states")
    for h, c in d.distribution().items():
        print(f"{h},{c}")
    status = EXIT_OK
    if cfg.verify:
        rebuilt = P.load(out).reconstruct(base)
        bad = np.flatnonzero(rebuilt != large.entries)
        print(f"# verify mismatches={len(bad)}")
        if len(bad):
            print(f"# first mismatch rank={bad[0]} rebuilt={rebuilt[bad[0]]} "
                  f"expected={large.entries[bad[0]]}", file=sys.stderr)
            status = EXIT_VERIFY
    print(f"# file={out} bytes={n}")
    return status


def _preset(pattern: Pattern, is_delta: bool) -> tuple:
    if is_delta:
        return TRAIN_PRESETS["delta"]
    if pattern.kind == "corner":
        return TRAIN_PRESETS["corner"]
    return TRAIN_PRESETS["edge7" if pattern.k >= 7 else "edge6"]


def training_data(db, cfg: RunConfig, pattern: Pattern):
    # a delta PDB is learned as its own difference values
    labels = (db.entries if isinstance(db, P.DeltaPdb) else E.heuristic_values(db)).astype(np.int64)
    if cfg.sample:
        rng = np.random.default_rng([int(cfg.seed), 1])
        ranks = np.sort(rng.choice(len(labels), size=min(int(cfg.sample), len(labels)), replace=False))
    else:
        ranks = np.arange(len(labels))
    return encode_ranks(ranks, pattern), labels[ranks], int(labels.max()) + 1


def cmd_train(cfg: RunConfig) -> int:
    db = load_any_pdb(cfg.pdb)
    is_delta = isinstance(db, P.DeltaPdb)
    pattern = db.large if is_delta else db.pattern
    lr, batch, beta, eta = _preset(pattern, is_delta)
    # unset hyperparameters fall back to the per-pattern preset
    for key, value in (("lr", lr), ("batch_size", batch), ("beta", beta), ("eta", eta)):
        if cfg.values.get(key) is None:
            cfg.values[key] = value
    try:
        hidden = tuple(int(w) for w in str(cfg.hidden).split(",") if w)
        tc = L.TrainConfig(epochs=int(cfg.epochs), batch_size=int(cfg.batch_size), lr=float(cfg.lr),
                           optimizer=cfg.optimizer, seed=int(cfg.seed), hidden=hidden,
                           loss=L.LossConfig(cfg.loss, float(cfg.beta), float(cfg.eta)),
                           schedule_window=int(cfg.schedule_window),
                           schedule_enabled=bool(cfg.schedule), lr_decay=cfg.lr_decay)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    echo(cfg)
    x, y, classes = training_data(db, cfg, pattern)
    state = L.load_checkpoint(cfg.resume, tc) if cfg.resume else None
    state = state or L.start_training(x, y, tc, classes)
    model_out = output_path(cfg.out, f"{stem(pattern)}.{cfg.loss}.anet")
    log_out = output_path(cfg.log, f"{stem(pattern)}.{cfg.loss}.log.csv")
    ckpt = Path(cfg.checkpoint) if cfg.checkpoint else None
    t0 = time.perf_counter()
    status = EXIT_OK
    try:
        while state.epoch < tc.epochs:
            stop = min(tc.epochs, state.epoch + int(cfg.checkpoint_every))
            L.train(x, y, tc, state=state, stop_epoch=stop)
            if ckpt:
                L.save_checkpoint(state, ckpt)
            r = state.history[-1]
            print(f"# epoch {r.epoch} loss={r.loss:.6f} over={r.overestimation_rate:.3g} "
                  f"avg={r.avg_predicted_h:.4f} beta={r.beta:g} eta={r.eta:g}", flush=True)
            if cfg.time_limit and time.perf_counter() - t0 > float(cfg.time_limit):
                print(f"# time limit reached after epoch {state.epoch}", file=sys.stderr)
                status = EXIT_BUDGET
                break
    except L.TrainingDiverged as exc:
        bad = output_path(None, f"{stem(pattern)}.{cfg.loss}.diverged.anet")
        L.save_model(exc.checkpoint, bad)
        print(f"# {exc}; last good network written to {bad}", file=sys.stderr)
        return EXIT_VERIFY
    net = L.quantize_half(state.net) if cfg.half else state.net
    model_out.parent.mkdir(parents=True, exist_ok=True)
    n = L.save_model(net, model_out)
    L.write_log_csv(state.history, log_out, cfg.header())
    print(f"# model={model_out} bytes={n} log={log_out}")
    return status


def _load_predictor(path: str):
    if path.endswith(".anet"):
        try:
            return L.load_model(path)
        except (OSError, ValueError) as exc:
            raise InputError(str(exc)) from None
    return load_any_pdb(path)


def cmd_evaluate(cfg: RunConfig) -> int:
    truth = load_any_pdb(cfg.truth)
    if isinstance(truth, P.DeltaPdb):
        # predictors of a delta table are scored on the difference values
        truth = P.PatternDatabase(truth.large, truth.entries)
    if not isinstance(truth, P.PatternDatabase):
        raise InputError("ground truth must be an uncompressed PDB")
    echo(cfg)
    reports = []
    for path in cfg.predictors:
        pred = _load_predictor(path)
        if isinstance(pred, P.DeltaPdb):
            pred = P.PatternDatabase(pred.large, pred.entries)
        try:
            reports.append(E.evaluate(pred, truth, Path(path).name))
        except E.EvaluationError as exc:
            raise InputError(f"{path}: {exc}") from None
    if cfg.csv:
        Path(cfg.csv).write_text(E.reports_csv(reports, cfg.header()))
    print(E.reports_table(reports))
    print(E.reports_csv(reports), end="")
    return EXIT_OK


# --- solving ---------------------------------------------------------------

def read_instances(path: str, domain: str) -> list:
    out = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(str(exc)) from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if domain == "tile8":
                out.append(tiles.parse_state(line))
            elif line[0].isalpha():
                out.append(apply_moves(SOLVED, parse_moves(line)))
            else:
                out.append(CubieState.parse(line))
        except ValueError as exc:
            raise InputError(f"{path}:{n}: {exc}") from None
    return out


def _cube_key(s: CubieState):
    return (s.corner_perm, s.corner_orient, s.edge_perm, s.edge_orient)


def _cube_successors(s: CubieState):
    return [(apply_move(s, m), 1) for m in range(18)]


def cube_heuristic(spec: str):
    if spec == "zero":
        return lambda s: 0
    dbs = [load_any_pdb(p) for p in spec.split(",")]
    for db in dbs:
        if isinstance(db, P.DeltaPdb):
            raise InputError("delta PDBs cannot be used directly as a search heuristic")
    return lambda s: max(db.lookup(s) for db in dbs)


def tile_heuristic(spec: str, hstar: dict):
    if spec == "pdb":
        return tiles.default_pdb_heuristic()
    if spec == "zero":
        return lambda s: 0
    if spec == "exact":
        return hstar.__getitem__
    if spec.startswith("noisy"):
        seed = int(spec.partition(":")[2] or 0)
        return E.noisy_heuristic(hstar, np.random.default_rng(seed)).__getitem__
    raise InputError(f"unknown tile heuristic {spec!r} (pdb, zero, exact, noisy[:seed])")


def cmd_solve(cfg: RunConfig) -> int:
    instances = read_instances(cfg.instances, cfg.domain)
    echo(cfg)
    rows = []
    if cfg.domain == "tile8":
        hstar = dijkstra_all(tiles.GOAL, tiles.unit_successors)
        h = tile_heuristic(cfg.heuristic, hstar)
        for i, s in enumerate(instances):
            res = astar(SearchProblem(tiles.unit_successors, s, lambda x: x == tiles.GOAL), h,
                        budget=int(cfg.max_expansions))
            psi = min_path_max_gap(tiles.unit_successors, h, hstar, s)
            opt = hstar[s]
            rows.append(f"{i},{res.cost},{opt},{res.expansions},{res.reopenings},{psi},"
                        f"{psi - (res.cost - opt)}")
    else:
        h = cube_heuristic(cfg.heuristic)
        for i, s in enumerate(instances):
            res = astar(SearchProblem(_cube_successors, s, CubieState.is_solved, _cube_key), h,
                        budget=int(cfg.max_expansions))
            # every table heuristic is admissible, so the A* cost is the optimum
            rows.append(f"{i},{res.cost},{res.cost},{res.expansions},{res.reopenings},,")
    out = output_path(cfg.out, "solve.csv") if cfg.out or os.environ.get(OUTPUT_DIR_ENV) else None
    text = write_csv(out, cfg, "instance_id,cost,optimal_cost,expansions,reopenings,psi,bound_slack",
                     rows)
    print(text.split("\n", len(cfg.header()))[-1], end="")
    return EXIT_OK


def cmd_instances(cfg: RunConfig) -> int:
    rng = np.random.default_rng(int(cfg.seed))
    lines = []
    for _ in range(int(cfg.count)):
        if cfg.domain == "tile8":
            lines.append(tiles.serialize(tiles.random_state(rng)))
        else:
            lines.append(random_state(rng, int(cfg.scramble)).serialize())
    text = "".join(l + "\n" for l in lines)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- theorem experiments -----------------------------------------------------

def cmd_gap(cfg: RunConfig) -> int:
    try:
        sizes = [int(n) for n in str(cfg.sizes).split(",")]
    except ValueError:
        raise InputError(f"bad --sizes {cfg.sizes!r}") from None
    echo(cfg)
    curve = E.tile_gap_experiment(sizes, int(cfg.trials), int(cfg.seed), int(cfg.heuristic_seed))
    text = curve.csv(cfg.header())
    if cfg.out:
        Path(cfg.out).write_text(text)
    print(text.split("\n", len(cfg.header()))[-1], end="")
    ok = all(b <= a for a, b in zip(curve.gaps, curve.gaps[1:])) and curve.gaps[-1] < curve.gaps[0]
    print(f"# trend {'non-increasing' if ok else 'VIOLATED'}")
    return EXIT_OK if ok else EXIT_VERIFY


class LazyNoise:
    """``h* + U{-2..3}`` drawn on first use per state, ``0`` at the goal."""

    def __init__(self, hstar: dict, rng: np.random.Generator):
        self.hstar, self.rng, self.memo = hstar, rng, {}

    def __call__(self, s) -> int:
        v = self.memo.get(s)
        if v is None:
            d = self.hstar[s]
            v = self.memo[s] = 0 if d == 0 else max(0, d + int(self.rng.integers(-2, 4)))
        return v


def bound_trials(domain: str, trials: int, seed: int, max_nodes: int = 200,
                 budget: int = DEFAULT_EXPANSION_BUDGET):
    """Yield ``(trial, description, BoundCheck)`` for randomized heuristics."""
    if domain == "graph":
        for t in range(trials):
            rng = np.random.default_rng([seed, t])
            g = random_graph(rng, int(rng.integers(2, max_nodes + 1)), float(rng.uniform(1.5, 4.0)))
            hstar = dijkstra_all(g.goal, g.predecessors)
            h = {v: float(rng.uniform(0, d + 5)) for v, d in hstar.items()}
            h[g.goal] = 0.0
            start = int(rng.integers(len(g.adjacency)))
            chk = check_suboptimality_bound(g.problem(start), h.__getitem__, hstar, budget)
            yield t, {"adjacency": g.adjacency, "h": h, "start": start}, chk
    elif domain == "tile8":
        hstar = dijkstra_all(tiles.GOAL, tiles.unit_successors)
        for t in range(trials):
            rng = np.random.default_rng([seed, t])
            start = tiles.random_state(rng)
            h = LazyNoise(hstar, rng)
            problem = SearchProblem(tiles.unit_successors, start, lambda x: x == tiles.GOAL)
            chk = check_suboptimality_bound(problem, h, hstar, budget)
            yield t, {"start": list(start), "h": {tiles.serialize(k): v for k, v in h.memo.items()}}, chk
    else:
        raise InputError(f"unknown domain {domain!r}")


def cmd_bound_check(cfg: RunConfig) -> int:
    echo(cfg)
    rows, violations = [], []
    for t, desc, chk in bound_trials(cfg.domain, int(cfg.trials), int(cfg.seed),
                                     int(cfg.max_nodes), int(cfg.max_expansions)):
        rows.append(f"{t},{chk.cost},{chk.optimal_cost},{chk.bound!r},{chk.slack!r},"
                    f"{chk.expansions},{chk.reopenings},{int(chk.holds)}")
        if not chk.holds:
            violations.append({"trial": t, "cost": chk.cost, "optimal_cost": chk.optimal_cost,
                               "bound": chk.bound, **desc})
    out = output_path(cfg.out, "bound_check.csv") if cfg.out or os.environ.get(OUTPUT_DIR_ENV) else None
    write_csv(out, cfg, "trial,cost,optimal_cost,bound,slack,expansions,reopenings,holds", rows)
    reopened = sum(1 for r in rows if r.split(",")[6] != "0")
    print(f"trials={len(rows)} violations={len(violations)} runs_with_reopenings={reopened}")
    if violations:
        dump = output_path(None, "bound_counterexample.json")
        dump.write_text(json.dumps(violations[0], default=str, indent=1))
        print(f"# counterexample written to {dump}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, help="cap on worker threads")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    parser = ArgParser(prog="cubeheur", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgParser)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("build-pdb", cmd_build_pdb, "build a pattern database by breadth-first search")
    sp.add_argument("--corners", help="tracked corners, e.g. 0..7 or 0,1,2")
    sp.add_argument("--edges", help="tracked edges, e.g. 0..2,4,5,8")
    sp.add_argument("--out")
    sp.add_argument("--memory-budget", type=int)
    sp.add_argument("--allow-large", action="store_true", default=None,
                    help="permit edge patterns of seven or more cubies")

    sp = add("compress", cmd_compress, "min-compress a PDB over consecutive ranks")
    sp.add_argument("input")
    sp.add_argument("--group", type=int)
    sp.add_argument("--out")

    sp = add("delta", cmd_delta, "store a large PDB as differences against a base PDB")
    sp.add_argument("large")
    sp.add_argument("base")
    sp.add_argument("--out")
    sp.add_argument("--no-verify", dest="verify", action="store_false", default=None)

    sp = add("train", cmd_train, "train a heuristic classifier on a PDB")
    sp.add_argument("pdb")
    sp.add_argument("--loss", choices=("ce", "cea"))
    sp.add_argument("--beta", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--lr", type=float)
    sp.add_argument("--optimizer", choices=("adam", "sgd"))
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--batch-size", type=int)
    sp.add_argument("--hidden", help="hidden widths, e.g. 512,512")
    sp.add_argument("--schedule-window", type=int)
    sp.add_argument("--no-schedule", dest="schedule", action="store_false", default=None)
    sp.add_argument("--lr-decay", choices=("none", "cosine"))
    sp.add_argument("--sample", type=int, help="train on this many sampled states (0 = all)")
    sp.add_argument("--checkpoint")
    sp.add_argument("--checkpoint-every", type=int)
    sp.add_argument("--resume")
    sp.add_argument("--half", action="store_true", default=None, help="store 16-bit weights")
    sp.add_argument("--time-limit", type=float, help="seconds; stop after the current epoch")
    sp.add_argument("--out")
    sp.add_argument("--log")

    sp = add("evaluate", cmd_evaluate, "compare predictors with a ground-truth PDB")
    sp.add_argument("truth")
    sp.add_argument("predictors", nargs="+")
    sp.add_argument("--csv")

    sp = add("solve", cmd_solve, "run A* on instances from a file")
    sp.add_argument("--domain", choices=("tile8", "cube"))
    sp.add_argument("--heuristic",
                    help="tile8: pdb|zero|exact|noisy[:seed]; cube: comma-separated .apdb files or zero")
    sp.add_argument("--instances", required=True)
    sp.add_argument("--max-expansions", type=int)
    sp.add_argument("--out")

    sp = add("instances", cmd_instances, "write random start states")
    sp.add_argument("--domain", choices=("tile8", "cube"))
    sp.add_argument("--count", type=int)
    sp.add_argument("--scramble", type=int, help="cube random-walk length")
    sp.add_argument("--out")

    sp = add("gap", cmd_gap, "generalization-gap curve on the 8-puzzle")
    sp.add_argument("--sizes")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--heuristic-seed", type=int)
    sp.add_argument("--out")

    sp = add("bound-check", cmd_bound_check, "check A* suboptimality against the path-gap bound")
    sp.add_argument("--domain", choices=("graph", "tile8"))
    sp.add_argument("--trials", type=int)
    sp.add_argument("--max-nodes", type=int)
    sp.add_argument("--max-expansions", type=int)
    sp.add_argument("--out")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("numba").setLevel(logging.WARNING)
    try:
        cfg = resolve(args, args.command)
        set_threads(cfg.threads)
        return args.func(cfg)
    except (InputError, P.PdbFormatError) as exc:
        print(f"cubeheur: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (P.MemoryBudgetError, BudgetExceeded) as exc:
        print(f"cubeheur: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SearchError as exc:
        print(f"cubeheur: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as exc:
        print(f"cubeheur: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
