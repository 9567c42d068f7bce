"""Held-Karp 1-tree machinery: construction under edge decisions, root
selection, subgradient ascent on the degree multipliers, reduced-cost edge
fixing, and fractional-score branching-edge selection.

A 1-tree is a minimum spanning tree over all vertices except a designated
root, plus the two cheapest admissible edges incident to the root. Every tour
is a 1-tree, so its reduced cost minus twice the multiplier sum lower-bounds
the optimal tour length for any multipliers pi.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import BranchingExhausted, InfeasibleSubproblem, InputError
from .instance import Instance
from .probability import ProbabilityMatrix, expected_optimality

Edge = tuple[int, int]

PRUNE_EPS = 1e-9


def edge_key(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class EdgeState:
    """Branching decisions: forced edges must appear, forbidden edges must not.

    A vertex may carry at most two forced edges; once it has two, every other
    incident edge is inadmissible for relaxation purposes even though it is
    not explicitly forbidden.
    """

    forced: frozenset[Edge] = frozenset()
    forbidden: frozenset[Edge] = frozenset()

    @staticmethod
    def empty() -> "EdgeState":
        return EdgeState()

    def is_forced(self, e: Edge) -> bool:
        return edge_key(*e) in self.forced

    def is_forbidden(self, e: Edge) -> bool:
        return edge_key(*e) in self.forbidden

    def is_free(self, e: Edge) -> bool:
        e = edge_key(*e)
        return e not in self.forced and e not in self.forbidden

    def forced_degrees(self, n: int) -> np.ndarray:
        deg = np.zeros(n, dtype=int)
        for i, j in self.forced:
            deg[i] += 1
            deg[j] += 1
        return deg

    def force(self, e: Edge) -> "EdgeState":
        e = edge_key(*e)
        if e in self.forced:
            return self
        if e in self.forbidden:
            raise InfeasibleSubproblem(f"edge {e} is forbidden, cannot force it")
        for v in e:
            if sum(1 for f in self.forced if v in f) >= 2:
                raise InfeasibleSubproblem(f"vertex {v} already has two forced edges")
        return EdgeState(forced=self.forced | {e}, forbidden=self.forbidden)

    def forbid(self, e: Edge) -> "EdgeState":
        e = edge_key(*e)
        if e in self.forbidden:
            return self
        if e in self.forced:
            raise InfeasibleSubproblem(f"edge {e} is forced, cannot forbid it")
        return EdgeState(forced=self.forced, forbidden=self.forbidden | {e})

    def admissible_mask(self, n: int) -> np.ndarray:
        """Boolean (n, n) matrix of edges usable in a 1-tree under this state."""
        closed = self.forced_degrees(n) == 2
        mask = np.ones((n, n), dtype=bool)
        np.fill_diagonal(mask, False)
        mask[closed, :] = False
        mask[:, closed] = False
        for i, j in self.forced:
            mask[i, j] = mask[j, i] = True
        for i, j in self.forbidden:
            mask[i, j] = mask[j, i] = False
        return mask


@dataclass(frozen=True, eq=False)
class OneTree:
    """Spanning tree on V minus root plus two root edges, with its bound."""

    root: int
    tree_edges: tuple[Edge, ...]
    root_edges: tuple[Edge, ...]
    degrees: np.ndarray
    lagrangian_cost: float
    plain_cost: float

    @property
    def n(self) -> int:
        return len(self.degrees)

    def edges(self) -> list[Edge]:
        return list(self.tree_edges) + list(self.root_edges)

    def is_tour(self) -> bool:
        return bool(np.all(self.degrees == 2))


@dataclass(frozen=True)
class LagrangeState:
    """Outcome of one subgradient ascent: multipliers at the best bound,
    the final step size, and the per-iteration raw bounds."""

    pi: np.ndarray
    step: float
    best_lb: float
    iteration: int
    bounds: tuple[float, ...] = ()


@dataclass(frozen=True)
class FractionalScores:
    """Per-edge appearance counts over the last `window` ascent 1-trees."""

    counts: Mapping[Edge, int]
    window: int

    def score(self, e: Edge) -> float:
        return self.counts.get(edge_key(*e), 0) / self.window

    def fractional_edges(self) -> list[Edge]:
        return [e for e, c in self.counts.items() if 0 < c < self.window]


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, u: int) -> int:
        p = self.parent
        while p[u] != u:
            p[u] = p[p[u]]
            u = p[u]
        return u

    def union(self, u: int, v: int) -> bool:
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return False
        self.parent[rv] = ru
        return True


def build_one_tree(inst: Instance, state: EdgeState, pi: np.ndarray, root: int) -> OneTree:
    """Minimum 1-tree under reduced costs c + pi_i + pi_j and the edge state.

    Kruskal on V minus root with forced edges seeded first; equal reduced
    costs are broken by (i, j) index order for determinism. Raises
    InfeasibleSubproblem on disconnection or fewer than two admissible root
    edges.
    """
    n = inst.n
    pi = np.asarray(pi, dtype=float)
    red = inst.dist + pi[:, None] + pi[None, :]
    admissible = state.admissible_mask(n)

    uf = _UnionFind(n)
    tree_edges: list[Edge] = []
    forced_sorted = sorted(e for e in state.forced if root not in e)
    for i, j in forced_sorted:
        if not uf.union(i, j):
            raise InfeasibleSubproblem(f"forced edges cycle at {(i, j)}")
        tree_edges.append((i, j))

    if len(tree_edges) < n - 2:
        ii, jj = np.triu_indices(n, k=1)
        keep = admissible[ii, jj] & (ii != root) & (jj != root)
        ii, jj = ii[keep], jj[keep]
        w = red[ii, jj]
        for k in np.lexsort((jj, ii, w)):
            i, j = int(ii[k]), int(jj[k])
            if state.is_forced((i, j)):
                continue  # already seeded
            if uf.union(i, j):
                tree_edges.append((i, j))
                if len(tree_edges) == n - 2:
                    break
    if len(tree_edges) < n - 2:
        raise InfeasibleSubproblem("forbidden edges disconnect the non-root vertices")

    root_edges: list[Edge] = sorted(e for e in state.forced if root in e)
    others = [j for j in range(n) if j != root and admissible[root, j]
              and not state.is_forced((root, j))]
    others.sort(key=lambda j: (red[root, j], j))
    for j in others:
        if len(root_edges) == 2:
            break
        root_edges.append(edge_key(root, j))
    if len(root_edges) < 2:
        raise InfeasibleSubproblem("fewer than two admissible root edges")

    degrees = np.zeros(n, dtype=int)
    plain = 0.0
    for i, j in tree_edges + root_edges:
        degrees[i] += 1
        degrees[j] += 1
        plain += inst.dist[i, j]
    bound = plain + float(np.dot(pi, degrees - 2))
    return OneTree(root=root, tree_edges=tuple(tree_edges), root_edges=tuple(root_edges),
                   degrees=degrees, lagrangian_cost=bound, plain_cost=plain)


def select_root(inst: Instance, state: EdgeState, P: ProbabilityMatrix | None = None,
                mode: str = "classic", tie_eps: float | None = None) -> tuple[int, OneTree]:
    """Root vertex whose zero-multiplier 1-tree has the largest bound.

    Bounds within tie_eps of the maximum are tied; classic mode keeps the
    lowest vertex index, guided mode the root whose 1-tree has the highest
    expected optimality. tie_eps=None defaults to 1e-3 of the best bound.
    """
    zero = np.zeros(inst.n)
    candidates: list[tuple[int, OneTree]] = []
    last_err: InfeasibleSubproblem | None = None
    for r in range(inst.n):
        try:
            candidates.append((r, build_one_tree(inst, state, zero, r)))
        except InfeasibleSubproblem as err:
            last_err = err
    if not candidates:
        assert last_err is not None
        raise last_err
    best_bound = max(t.lagrangian_cost for _, t in candidates)
    eps = tie_eps if tie_eps is not None else 1e-3 * abs(best_bound)
    tied = [(r, t) for r, t in candidates if t.lagrangian_cost >= best_bound - eps]
    if mode == "gcbb" and P is not None:
        tied.sort(key=lambda rt: (-expected_optimality(rt[1], P).value, rt[0]))
    else:
        tied.sort(key=lambda rt: rt[0])
    return tied[0]


def subgradient_ascent(inst: Instance, state: EdgeState, root: int, init_pi,
                       iters: int, ub: float, *, prune_eps: float = PRUNE_EPS,
                       ) -> tuple[LagrangeState, OneTree, FractionalScores]:
    """Maximize the 1-tree bound over degree multipliers.

    Updates pi_i += t_k (d_i - 2) with a geometric step schedule
    t_1 = |first bound| / (2n), t_{k+1} = 0.95 t_k. Stops early when the best
    bound reaches ub - prune_eps (node will be pruned) or the current 1-tree
    is a tour (zero subgradient). Fractional scores are collected over the
    final ceil(iters / 2) iterations actually performed.
    """
    if iters < 1:
        raise InputError(f"iters must be >= 1, got {iters}")
    n = inst.n
    pi = np.array(init_pi, dtype=float).copy()
    window: deque[tuple[Edge, ...]] = deque(maxlen=max(1, math.ceil(iters / 2)))
    best = -math.inf
    best_tree: OneTree | None = None
    best_pi = pi.copy()
    bounds: list[float] = []
    step = 0.0
    k = 0
    for k in range(1, iters + 1):
        tree = build_one_tree(inst, state, pi, root)
        b = tree.lagrangian_cost
        bounds.append(b)
        window.append(tuple(tree.edges()))
        if b > best:
            best, best_tree, best_pi = b, tree, pi.copy()
        elif tree.is_tour() and b >= best - 1e-12:
            best_tree, best_pi = tree, pi.copy()  # prefer handing back the tour
        if tree.is_tour():
            break
        if best >= ub - prune_eps:
            break
        if k == iters:
            break
        if step == 0.0:
            step = abs(bounds[0]) / (2 * n) or 1e-12
        pi = pi + step * (tree.degrees - 2)
        step *= 0.95

    assert best_tree is not None
    counts: dict[Edge, int] = {}
    for edges in window:
        for e in edges:
            counts[e] = counts.get(e, 0) + 1
    scores = FractionalScores(counts=counts, window=len(window))
    lstate = LagrangeState(pi=best_pi, step=step, best_lb=best, iteration=k,
                           bounds=tuple(bounds))
    return lstate, best_tree, scores


# ---------------------------------------------------------------------------
# Reduced-cost edge fixing via 1-tree exchange arguments. All tests are made
# against the bound-attaining tree `t` and its multipliers; `lb` must be the
# Lagrangian bound of that tree.
# ---------------------------------------------------------------------------

def fix_edges(inst: Instance, state: EdgeState, t: OneTree, pi: np.ndarray,
              lb: float, ub: float, *, prune_eps: float = PRUNE_EPS) -> EdgeState:
    """Forbid non-tree edges and force tree edges proven in/out of every
    improving solution; returns a superset of the input decisions."""
    threshold = ub - prune_eps
    if not math.isfinite(threshold):
        return state
    n = inst.n
    root = t.root
    pi = np.asarray(pi, dtype=float)
    red = inst.dist + pi[:, None] + pi[None, :]
    admissible = state.admissible_mask(n)
    in_tree = set(t.tree_edges)
    root_set = set(t.root_edges)

    parent, depth, pcost, pforced = _root_tree_arrays(n, root, t.tree_edges, red, state)
    tin, tout = _subtree_intervals(n, root, parent)

    free_root_costs = [red[i, j] for i, j in t.root_edges if state.is_free((i, j))]
    max_free_root = max(free_root_costs) if free_root_costs else None

    # candidate arrays for the tree-edge force tests: admissible non-tree edges
    # joining two non-root vertices
    cand_i, cand_j, cand_w = [], [], []
    new_forbidden: list[Edge] = []
    for i in range(n):
        for j in range(i + 1, n):
            e = (i, j)
            if e in in_tree or e in root_set:
                continue
            if not state.is_free(e):
                continue
            if not admissible[i, j]:
                continue
            if root in e:
                # exchanging e in means dropping the costlier free root edge
                if max_free_root is None or lb + red[i, j] - max_free_root >= threshold:
                    new_forbidden.append(e)
                continue
            cand_i.append(i)
            cand_j.append(j)
            cand_w.append(red[i, j])
            swap = _path_max_free(i, j, parent, depth, pcost, pforced)
            if swap is None or lb + red[i, j] - swap >= threshold:
                new_forbidden.append(e)

    cand_i = np.array(cand_i, dtype=int)
    cand_j = np.array(cand_j, dtype=int)
    cand_w = np.array(cand_w, dtype=float)

    new_forced: list[Edge] = []
    for i, j in t.tree_edges:
        if not state.is_free((i, j)):
            continue
        child = j if parent[j] == i else i
        lo, hi = tin[child], tout[child]
        if cand_w.size:
            side_i = (tin[cand_i] >= lo) & (tin[cand_i] < hi)
            side_j = (tin[cand_j] >= lo) & (tin[cand_j] < hi)
            crossing = cand_w[side_i != side_j]
        else:
            crossing = cand_w
        reconnect = crossing.min() if crossing.size else math.inf
        if lb + reconnect - red[i, j] >= threshold:
            new_forced.append((i, j))

    root_reconnect = [red[root, j] for j in range(n)
                      if j != root and admissible[root, j]
                      and edge_key(root, j) not in root_set and state.is_free((root, j))]
    cheapest_root_reconnect = min(root_reconnect) if root_reconnect else math.inf
    for e in t.root_edges:
        if not state.is_free(e):
            continue
        if lb + cheapest_root_reconnect - red[e[0], e[1]] >= threshold:
            new_forced.append(e)

    out = state
    for e in new_forbidden:
        out = out.forbid(e)
    for e in new_forced:
        out = out.force(e)  # raises InfeasibleSubproblem on a third forced edge
    return out


def _root_tree_arrays(n: int, root: int, tree_edges: Iterable[Edge], red: np.ndarray,
                      state: EdgeState):
    """Parent/depth arrays of the spanning tree on V minus root, plus the
    reduced cost and forced flag of each vertex's parent edge."""
    adj: dict[int, list[int]] = {v: [] for v in range(n) if v != root}
    for i, j in tree_edges:
        adj[i].append(j)
        adj[j].append(i)
    start = min(adj)
    parent = [-1] * n
    depth = [0] * n
    pcost = [0.0] * n
    pforced = [False] * n
    parent[start] = start
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if parent[v] == -1:
                parent[v] = u
                depth[v] = depth[u] + 1
                pcost[v] = red[u, v]
                pforced[v] = state.is_forced((u, v))
                stack.append(v)
    parent[start] = start
    return parent, depth, pcost, pforced


def _subtree_intervals(n: int, root: int, parent: list[int]) -> tuple[np.ndarray, np.ndarray]:
    """Euler in/out times so that subtree membership is an interval test."""
    children: dict[int, list[int]] = {v: [] for v in range(n)}
    start = -1
    for v in range(n):
        if v == root or parent[v] == -1:
            continue
        if parent[v] == v:
            start = v
        else:
            children[parent[v]].append(v)
    tin = np.zeros(n, dtype=int)
    tout = np.zeros(n, dtype=int)
    timer = 0
    stack = [(start, False)]
    while stack:
        v, done = stack.pop()
        if done:
            tout[v] = timer
            continue
        tin[v] = timer
        timer += 1
        stack.append((v, True))
        for c in children[v]:
            stack.append((c, False))
    return tin, tout


def _path_max_free(u: int, v: int, parent, depth, pcost, pforced) -> float | None:
    """Largest reduced cost of a non-forced edge on the tree path u -> v;
    None when every path edge is forced (the path cannot be broken)."""
    best = None
    while u != v:
        if depth[u] < depth[v]:
            u, v = v, u
        if not pforced[u]:
            best = pcost[u] if best is None else max(best, pcost[u])
        u = parent[u]
    return best


def choose_branch_edge(inst: Instance, scores: FractionalScores, state: EdgeState,
                       tree: OneTree, pi: np.ndarray, P: ProbabilityMatrix | None = None,
                       mode: str = "classic") -> Edge:
    """Branching edge: the free edge with fractional score closest to 0.5.

    Score ties go to the lexicographically smallest edge in classic mode and
    to the highest-probability edge in guided mode. When every score is 0 or
    1, fall back to the maximum-reduced-cost tree edge at an over-degree
    vertex; as a last resort (completeness), any free admissible edge.
    """
    admissible = state.admissible_mask(inst.n)

    def usable(e: Edge) -> bool:
        return state.is_free(e) and admissible[e[0], e[1]]

    fractional = [e for e in scores.fractional_edges() if usable(e)]
    if fractional:
        if mode == "gcbb" and P is not None:
            fractional.sort(key=lambda e: (abs(scores.score(e) - 0.5), -P.p[e[0], e[1]], e))
        else:
            fractional.sort(key=lambda e: (abs(scores.score(e) - 0.5), e))
        return fractional[0]

    pi = np.asarray(pi, dtype=float)
    over = np.flatnonzero(tree.degrees > 2)
    fallback = [e for e in tree.edges() if (e[0] in over or e[1] in over) and usable(e)]
    if not fallback:
        ii, jj = np.triu_indices(inst.n, k=1)
        fallback = [(int(i), int(j)) for i, j in zip(ii, jj) if usable((int(i), int(j)))]
        if not fallback:
            raise BranchingExhausted("no free admissible edge to branch on")
        return min(fallback)
    red = inst.dist + pi[:, None] + pi[None, :]
    if mode == "gcbb" and P is not None:
        fallback.sort(key=lambda e: (-red[e[0], e[1]], -P.p[e[0], e[1]], e))
    else:
        fallback.sort(key=lambda e: (-red[e[0], e[1]], e))
    return fallback[0]
