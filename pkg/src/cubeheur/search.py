"""A* with node reopening, exact distance oracles and inadmissibility measures."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping

import numpy as np

DEFAULT_EXPANSION_BUDGET = 10_000_000

State = Hashable
Heuristic = Callable[[Any], float]


class SearchError(RuntimeError):
    pass


class UnreachableGoal(SearchError):
    def __init__(self, expansions: int, generated: int):
        super().__init__(f"open list exhausted after {expansions} expansions")
        self.expansions = expansions
        self.generated = generated


class BudgetExceeded(SearchError):
    def __init__(self, expansions: int, generated: int, reopenings: int):
        super().__init__(f"expansion budget exhausted ({expansions} expansions, "
                         f"{generated} generated, {reopenings} reopenings)")
        self.expansions = expansions
        self.generated = generated
        self.reopenings = reopenings


@dataclass
class SearchProblem:
    """Unit-cost search problem.

    ``successors`` yields ``(child, cost)`` pairs.  ``order_key`` gives the
    strict total order used to break ties on f; by default the state itself.
    """

    successors: Callable[[Any], Iterable[tuple[Any, float]]]
    start: Any
    is_goal: Callable[[Any], bool]
    order_key: Callable[[Any], Any] = lambda s: s


@dataclass
class SearchResult:
    cost: float
    path: list
    expansions: int
    reopenings: int
    generated: int
    trace: list | None = None


def astar(problem: SearchProblem, h: Heuristic, allow_reopen: bool = True,
          budget: int = DEFAULT_EXPANSION_BUDGET, record_trace: bool = False) -> SearchResult:
    """A* that returns when a goal is selected for expansion.

    OPEN is a binary heap of ``(f, order_key, g, state)``; an entry is stale
    once its state has left OPEN or been given a smaller g, and stale entries
    are dropped on pop.  Without reopening, a cheaper path to a CLOSED state
    is ignored.
    """
    start = problem.start
    g = {start: 0}
    parent = {start: None}
    hval = {}

    def heur(s):
        v = hval.get(s)
        if v is None:
            v = hval[s] = h(s)
        return v

    open_set = {start}
    closed = set()
    heap = [(heur(start), problem.order_key(start), 0, start)]
    expansions = reopenings = 0
    generated = 1
    trace = [] if record_trace else None
    while heap:
        f, _, gs, s = heapq.heappop(heap)
        if s not in open_set or gs != g[s]:
            continue
        if problem.is_goal(s):
            return SearchResult(gs, _path(parent, s), expansions + 1, reopenings, generated, trace)
        if expansions >= budget:
            raise BudgetExceeded(expansions, generated, reopenings)
        expansions += 1
        if trace is not None:
            trace.append((s, gs))
        open_set.discard(s)
        closed.add(s)
        for child, cost in problem.successors(s):
            generated += 1
            g_new = gs + cost
            if child not in g:
                g[child] = g_new
                parent[child] = s
                open_set.add(child)
            elif g_new < g[child]:
                if child in open_set:
                    g[child] = g_new
                    parent[child] = s
                elif allow_reopen:
                    g[child] = g_new
                    parent[child] = s
                    closed.discard(child)
                    open_set.add(child)
                    reopenings += 1
                else:
                    continue
            else:
                continue
            heapq.heappush(heap, (g_new + heur(child), problem.order_key(child), g_new, child))
    raise UnreachableGoal(expansions, generated)


def _path(parent: Mapping, s) -> list:
    out = []
    while s is not None:
        out.append(s)
        s = parent[s]
    return out[::-1]


def dijkstra_all(goal, predecessors: Callable[[Any], Iterable[tuple[Any, float]]],
                 budget: int | None = None) -> dict:
    """Exact cost-to-goal for every state that can reach ``goal``.

    ``predecessors(v)`` yields ``(u, cost)`` for each edge ``u -> v``.
    """
    dist = {goal: 0}
    heap = [(0, 0, goal)]
    tick = 0
    done = set()
    while heap:
        d, _, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if budget is not None and len(done) > budget:
            raise BudgetExceeded(len(done), len(dist), 0)
        for u, c in predecessors(v):
            nd = d + c
            if nd < dist.get(u, math.inf):
                dist[u] = nd
                tick += 1
                heapq.heappush(heap, (nd, tick, u))
    return dist


def inconsistency(h: Heuristic, parent, child, cost: float) -> float:
    return max(h(parent) - h(child) - cost, 0)


@dataclass
class OptimalPathGap:
    optimal_cost: float
    gaps: list
    psi: float


def psi(h: Heuristic, optimal_path: list, hstar: Mapping, cost: float = 1) -> OptimalPathGap:
    """Largest overestimate ``h(v) - h*(v)`` along a verified optimal path."""
    if not optimal_path:
        raise ValueError("empty path")
    optimal = hstar[optimal_path[0]]
    if hstar[optimal_path[-1]] != 0 or (len(optimal_path) - 1) * cost != optimal:
        raise ValueError("path is not an optimal path to the goal")
    for a, b in zip(optimal_path, optimal_path[1:]):
        if hstar[a] != hstar[b] + cost:
            raise ValueError(f"step {a!r} -> {b!r} is not on an optimal path")
    gaps = [h(v) - hstar[v] for v in optimal_path]
    return OptimalPathGap(optimal, gaps, max(gaps))


def optimal_successors(successors, hstar: Mapping, v) -> list:
    return [w for w, c in successors(v) if w in hstar and hstar[v] == c + hstar[w]]


def min_path_max_gap(successors, h: Heuristic, hstar: Mapping, start) -> float:
    """``min`` over optimal paths from ``start`` of the path maximum of ``h - h*``.

    Bottleneck dynamic programme over the subgraph of optimal edges, visited in
    increasing ``h*``.
    """
    nodes = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in optimal_successors(successors, hstar, v):
            if w not in nodes:
                nodes.add(w)
                stack.append(w)
    best = {}
    for v in sorted(nodes, key=lambda x: hstar[x]):
        gap = h(v) - hstar[v]
        if hstar[v] == 0:
            best[v] = gap
        else:
            best[v] = max(gap, min(best[w] for w in optimal_successors(successors, hstar, v)))
    return best[start]


def enumerate_optimal_paths(successors, hstar: Mapping, start, limit: int = 100_000) -> list:
    """Every optimal path from ``start`` (brute force; for small graphs)."""
    paths = []
    stack = [[start]]
    while stack:
        path = stack.pop()
        v = path[-1]
        if hstar[v] == 0:
            paths.append(path)
            if len(paths) > limit:
                raise SearchError("too many optimal paths to enumerate")
            continue
        for w in optimal_successors(successors, hstar, v):
            stack.append(path + [w])
    return paths


@dataclass
class BoundCheck:
    cost: float
    optimal_cost: float
    bound: float
    expansions: int
    reopenings: int

    @property
    def suboptimality(self) -> float:
        return self.cost - self.optimal_cost

    @property
    def slack(self) -> float:
        return self.bound - self.suboptimality

    @property
    def holds(self) -> bool:
        return self.suboptimality <= self.bound + 1e-9


def check_suboptimality_bound(problem: SearchProblem, h: Heuristic, hstar: Mapping,
                              budget: int = DEFAULT_EXPANSION_BUDGET) -> BoundCheck:
    """Run A* with reopening and compare its excess cost with the optimal-path gap."""
    if h(_find_goal(problem, hstar)) != 0:
        raise ValueError("heuristic must be zero at the goal")
    res = astar(problem, h, allow_reopen=True, budget=budget)
    bound = min_path_max_gap(problem.successors, h, hstar, problem.start)
    return BoundCheck(res.cost, hstar[problem.start], bound, res.expansions, res.reopenings)


def _find_goal(problem: SearchProblem, hstar: Mapping):
    for v, d in hstar.items():
        if d == 0 and problem.is_goal(v):
            return v
    raise ValueError("no goal in the distance map")


# ---------------------------------------------------------------------------
# random graphs for bound checking
# ---------------------------------------------------------------------------

@dataclass
class Graph:
    adjacency: list[list[int]]
    goal: int = 0
    reverse: list[list[int]] = field(init=False)

    def __post_init__(self):
        self.reverse = [[] for _ in self.adjacency]
        for u, outs in enumerate(self.adjacency):
            for v in outs:
                self.reverse[v].append(u)

    def successors(self, v: int):
        return [(w, 1) for w in self.adjacency[v]]

    def predecessors(self, v: int):
        return [(u, 1) for u in self.reverse[v]]

    def problem(self, start: int) -> SearchProblem:
        goal = self.goal
        return SearchProblem(self.successors, start, lambda s: s == goal)


def random_graph(rng: np.random.Generator, n_nodes: int, mean_degree: float = 3.0) -> Graph:
    """Random directed unit-cost graph in which every node reaches node 0."""
    adjacency = [set() for _ in range(n_nodes)]
    order = rng.permutation(n_nodes - 1) + 1
    reached = [0]
    for v in order:
        # spanning in-tree towards the goal
        adjacency[int(v)].add(int(reached[int(rng.integers(len(reached)))]))
        reached.append(int(v))
    extra = int(max(0.0, mean_degree - 1.0) * n_nodes)
    for u, v in rng.integers(0, n_nodes, size=(extra, 2)):
        if u != v:
            adjacency[int(u)].add(int(v))
    return Graph([sorted(a) for a in adjacency])
