"""Branch-and-bound driver: best-first node selection (optionally guided by
expected optimality scores on near-tied bounds), lazy child bounding, incumbent
management, time limit, and metric collection."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

import numpy as np

from .errors import BranchingExhausted, ConfigError, InfeasibleSubproblem, TspBnbError
from .heuristics import initial_incumbent
from .instance import Instance, Tour, validate_tour
from .onetree import (Edge, EdgeState, FractionalScores, OneTree, choose_branch_edge,
                      fix_edges, select_root, subgradient_ascent)
from .probability import ProbabilityMatrix, expected_optimality

MODE_CLASSIC = "classic"
MODE_GCBB = "gcbb"
MODES = (MODE_CLASSIC, MODE_GCBB)


@dataclass
class SolverConfig:
    mode: str = MODE_CLASSIC
    time_limit: float = 600.0
    tie_eps: float | None = None  # None: resolved to 1e-3 * root bound at solve time
    root_iters: int | None = None  # None: 5n
    node_iters: int | None = None  # None: n
    seed: int | None = None  # instance seed, recorded in the report
    prune_eps: float = 1e-9
    fixing: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.time_limit <= 0:
            raise ConfigError(f"time_limit must be positive, got {self.time_limit}")
        if self.tie_eps is not None and self.tie_eps < 0:
            raise ConfigError(f"tie_eps must be >= 0, got {self.tie_eps}")


@dataclass
class BBNode:
    """One subproblem. Bounds are lazy: at creation lb, pi and expected_score
    are inherited from the parent. The node's own ascent runs the first time
    it is popped, after which it re-enters the queue; it branches only when
    popped again with its refined bound. Branching therefore happens in true
    best-first order of refined bounds, so an explored node's bound never
    exceeds the optimum of any still-open subproblem."""

    state: EdgeState
    lb: float
    pi: np.ndarray
    depth: int
    expected_score: float
    id: int
    closed: bool = False
    explored: bool = False
    bounded: bool = False
    tree: OneTree | None = None
    scores: FractionalScores | None = None


@dataclass
class SolveReport:
    solved: bool
    optimum: Tour | None
    total_time: float
    bb_time: float
    time_to_best: float
    tree_depth: int
    opt_depth: int
    generated_nodes: int
    explored_nodes: int
    nodes_before_opt: int
    incumbent_source: str
    opt_score_normalized: float | None
    incumbent_trajectory: tuple[tuple[float, float], ...]
    mode: str = MODE_CLASSIC
    n: int = 0
    seed: int | None = None

    def to_record(self) -> dict:
        """Flat record with the benchmark metric names in snake_case."""
        return {
            "n": self.n,
            "seed": self.seed,
            "mode": self.mode,
            "rng": "PCG64",
            "solved": self.solved,
            "optimum_length": None if self.optimum is None else self.optimum.length,
            "optimum_order": None if self.optimum is None else list(self.optimum.order),
            "incumbent_source": self.incumbent_source,
            "total_time": self.total_time,
            "bb_time": self.bb_time,
            "time_to_best": self.time_to_best,
            "bb_tree_depth": self.tree_depth,
            "depth_of_the_optimum": self.opt_depth,
            "generated_bb_nodes": self.generated_nodes,
            "explored_bb_nodes": self.explored_nodes,
            "bb_nodes_before_optimum": self.nodes_before_opt,
            "optimality_score": self.opt_score_normalized,
            "trajectory": [[t, l] for t, l in self.incumbent_trajectory],
        }

    @staticmethod
    def from_record(rec: dict) -> "SolveReport":
        optimum = None
        if rec.get("optimum_order") is not None:
            optimum = Tour(order=tuple(rec["optimum_order"]), length=rec["optimum_length"])
        return SolveReport(
            solved=rec["solved"],
            optimum=optimum,
            total_time=rec["total_time"],
            bb_time=rec["bb_time"],
            time_to_best=rec["time_to_best"],
            tree_depth=rec["bb_tree_depth"],
            opt_depth=rec["depth_of_the_optimum"],
            generated_nodes=rec["generated_bb_nodes"],
            explored_nodes=rec["explored_bb_nodes"],
            nodes_before_opt=rec["bb_nodes_before_optimum"],
            incumbent_source=rec["incumbent_source"],
            opt_score_normalized=rec.get("optimality_score"),
            incumbent_trajectory=tuple((t, l) for t, l in rec.get("trajectory", [])),
            mode=rec["mode"],
            n=rec["n"],
            seed=rec.get("seed"),
        )


def compare_nodes(a: BBNode, b: BBNode, cfg: SolverConfig) -> int:
    """Best-first ordering: negative when a should be popped before b.

    Classic: ascending lower bound, ties by creation id. Guided: bounds within
    tie_eps are tied and the higher expected score wins, then creation id.
    """
    if cfg.mode == MODE_GCBB:
        eps = cfg.tie_eps if cfg.tie_eps is not None else 0.0
        if abs(a.lb - b.lb) <= eps:
            if a.expected_score != b.expected_score:
                return -1 if a.expected_score > b.expected_score else 1
            return -1 if a.id < b.id else (1 if a.id > b.id else 0)
    if a.lb != b.lb:
        return -1 if a.lb < b.lb else 1
    return -1 if a.id < b.id else (1 if a.id > b.id else 0)


def child_nodes(parent: BBNode, edge: Edge, state: EdgeState, *, first_id: int,
                n: int) -> tuple[BBNode, BBNode]:
    """Include/exclude children of `parent` branching on `edge`.

    `state` is the parent's post-fixing state. Children detected infeasible at
    creation (third forced edge at a vertex, a vertex left without two usable
    edges) come back already closed; they still count as generated.
    """
    def make(child_state: EdgeState | None) -> BBNode:
        closed = child_state is None or _starved_vertex(child_state, n)
        return BBNode(state=child_state if child_state is not None else state,
                      lb=parent.lb, pi=parent.pi, depth=parent.depth + 1,
                      expected_score=parent.expected_score, id=0, closed=closed)

    try:
        include_state: EdgeState | None = state.force(edge)
    except InfeasibleSubproblem:
        include_state = None
    try:
        exclude_state: EdgeState | None = state.forbid(edge)
    except InfeasibleSubproblem:
        exclude_state = None
    include, exclude = make(include_state), make(exclude_state)
    include.id = first_id
    exclude.id = first_id + 1
    return include, exclude


def _starved_vertex(state: EdgeState, n: int) -> bool:
    """True when some vertex has fewer than two admissible incident edges."""
    mask = state.admissible_mask(n)
    return bool((mask.sum(axis=1) < 2).any())


def _tour_from_onetree(inst: Instance, tree: OneTree) -> Tour:
    adj: dict[int, list[int]] = {}
    for i, j in tree.edges():
        adj.setdefault(i, []).append(j)
        adj.setdefault(j, []).append(i)
    order = [tree.root]
    prev = -1
    cur = tree.root
    for _ in range(inst.n - 1):
        a, b = sorted(adj[cur])
        nxt = b if a == prev else a
        order.append(nxt)
        prev, cur = cur, nxt
    return Tour.from_order(inst, order)


def solve(inst: Instance, P: ProbabilityMatrix | None = None,
          cfg: SolverConfig | None = None, *, ascent_observer=None) -> SolveReport:
    """Solve an instance to proven optimality (or best incumbent on timeout).

    The probability matrix only steers search order (root tie-break, initial
    tour, branching and node-selection tie-breaks); it can never change the
    returned optimum. Runs are deterministic for fixed (inst, P, cfg) up to
    the timing fields.

    `ascent_observer(node, lagrange_state)`, when given, is called after every
    subgradient ascent; it exists for bound-validity instrumentation.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    gcbb = cfg.mode == MODE_GCBB
    if gcbb and P is None:
        raise ConfigError("gcbb mode requires a probability matrix")
    if P is not None and P.n != inst.n:
        raise ConfigError(f"probability matrix n={P.n} does not match instance n={inst.n}")

    t0 = time.perf_counter()
    incumbent, source = initial_incumbent(inst, P if gcbb else None, cfg.mode)
    ub = incumbent.length
    trajectory: list[tuple[float, float]] = [(time.perf_counter() - t0, ub)]
    nodes_before_opt = 0
    opt_depth = 0
    time_to_best = 0.0

    bb_start = time.perf_counter()
    root_iters = cfg.root_iters if cfg.root_iters is not None else 5 * inst.n
    node_iters = cfg.node_iters if cfg.node_iters is not None else inst.n

    root_vertex, root_tree = select_root(inst, EdgeState.empty(),
                                         P if gcbb else None, cfg.mode, cfg.tie_eps)
    tie_eps = cfg.tie_eps if cfg.tie_eps is not None else 1e-3 * abs(root_tree.lagrangian_cost)
    cmp_cfg = dataclasses.replace(cfg, tie_eps=tie_eps)

    root_score = expected_optimality(root_tree, P).value if gcbb else 0.0
    root_node = BBNode(state=EdgeState.empty(), lb=root_tree.lagrangian_cost,
                       pi=np.zeros(inst.n), depth=0, expected_score=root_score, id=0)
    generated = 1
    explored = 0
    tree_depth = 0
    open_nodes: list[BBNode] = [root_node]
    timed_out = False

    while open_nodes:
        if time.perf_counter() - t0 > cfg.time_limit:
            timed_out = True
            break
        best_idx = 0
        for idx in range(1, len(open_nodes)):
            if compare_nodes(open_nodes[idx], open_nodes[best_idx], cmp_cfg) < 0:
                best_idx = idx
        node = open_nodes.pop(best_idx)

        if node.lb >= ub - cfg.prune_eps:
            continue

        if not node.bounded:
            iters = root_iters if node.depth == 0 else node_iters
            try:
                lstate, tree, scores = subgradient_ascent(
                    inst, node.state, root_vertex, node.pi, iters, ub,
                    prune_eps=cfg.prune_eps)
            except InfeasibleSubproblem:
                continue
            if ascent_observer is not None:
                ascent_observer(node, lstate)
            node.lb = max(node.lb, lstate.best_lb)
            node.pi = lstate.pi
            node.tree = tree
            node.scores = scores
            node.bounded = True
            if gcbb:
                node.expected_score = expected_optimality(tree, P).value

            if tree.is_tour():
                length = tree.plain_cost
                if length < ub - cfg.prune_eps:
                    tour = _tour_from_onetree(inst, tree)
                    incumbent, ub = tour, tour.length
                    trajectory.append((time.perf_counter() - t0, ub))
                    time_to_best = time.perf_counter() - bb_start
                    opt_depth = node.depth
                    nodes_before_opt = generated
                continue
            if node.lb < ub - cfg.prune_eps:
                open_nodes.append(node)  # branch when popped with the refined bound
            continue

        state = node.state
        if cfg.fixing:
            try:
                state = fix_edges(inst, state, node.tree, node.pi, node.lb, ub,
                                  prune_eps=cfg.prune_eps)
            except InfeasibleSubproblem:
                continue
        try:
            edge = choose_branch_edge(inst, node.scores, state, node.tree, node.pi,
                                      P if gcbb else None, cfg.mode)
        except BranchingExhausted:
            continue

        explored += 1
        node.explored = True
        include, exclude = child_nodes(node, edge, state, first_id=generated, n=inst.n)
        generated += 2
        tree_depth = max(tree_depth, include.depth)
        for child in (include, exclude):
            if not child.closed:
                open_nodes.append(child)

    end = time.perf_counter()
    if not validate_tour(inst, incumbent):
        raise TspBnbError("internal error: incumbent failed tour validation")
    score = expected_optimality(incumbent, P).normalized if (gcbb and P is not None) else None
    return SolveReport(
        solved=not timed_out,
        optimum=incumbent,
        total_time=end - t0,
        bb_time=end - bb_start,
        time_to_best=time_to_best,
        tree_depth=tree_depth,
        opt_depth=opt_depth,
        generated_nodes=generated,
        explored_nodes=explored,
        nodes_before_opt=nodes_before_opt,
        incumbent_source=source,
        opt_score_normalized=score,
        incumbent_trajectory=tuple(trajectory),
        mode=cfg.mode,
        n=inst.n,
        seed=cfg.seed if cfg.seed is not None else inst.seed,
    )
