"""Upper-bound tour construction: multi-start nearest neighbor and its
probability-guided variant, plus the initial-incumbent selection rule."""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .instance import Instance, Tour
from .probability import ProbabilityMatrix

INCUMBENT_NN = "NN"
INCUMBENT_PNN = "PNN"


def nearest_neighbor(inst: Instance, start: int) -> Tour:
    """Greedy tour from `start`; distance ties go to the lowest vertex index."""
    n = inst.n
    visited = np.zeros(n, dtype=bool)
    visited[start] = True
    order = [start]
    cur = start
    for _ in range(n - 1):
        row = np.where(visited, np.inf, inst.dist[cur])
        cur = int(np.argmin(row))  # argmin returns the first minimum: lowest index
        visited[cur] = True
        order.append(cur)
    return Tour.from_order(inst, order)


def multistart_nn(inst: Instance) -> Tour:
    """Best nearest-neighbor tour over all start vertices (tie: lowest start)."""
    best: Tour | None = None
    for s in range(inst.n):
        t = nearest_neighbor(inst, s)
        if best is None or t.length < best.length:
            best = t
    assert best is not None
    return best


def probabilistic_nn(inst: Instance, P: ProbabilityMatrix) -> Tour:
    """Greedy tour following maximum-probability edges to unvisited vertices.

    Ties on probability fall back to the cheaper edge, then the lower index,
    so an uninformative matrix degrades to plain nearest neighbor. Multi-start
    over every vertex; returns the shortest tour found.
    """
    if P.n != inst.n:
        raise InputError(f"dimension mismatch: instance n={inst.n}, matrix n={P.n}")
    n = inst.n
    best: Tour | None = None
    for s in range(n):
        visited = np.zeros(n, dtype=bool)
        visited[s] = True
        order = [s]
        cur = s
        for _ in range(n - 1):
            cand = np.flatnonzero(~visited)
            if cand.size == 0:
                break  # cannot happen on a complete graph; guards sparse futures
            keys = np.lexsort((cand, inst.dist[cur, cand], -P.p[cur, cand]))
            cur = int(cand[keys[0]])
            visited[cur] = True
            order.append(cur)
        if len(order) != n:
            continue
        t = Tour.from_order(inst, order)
        if best is None or t.length < best.length:
            best = t
    assert best is not None
    return best


def initial_incumbent(inst: Instance, P: ProbabilityMatrix | None, mode: str) -> tuple[Tour, str]:
    """Initial feasible tour and the tag of the heuristic that produced it.

    Classic mode runs multi-start nearest neighbor only. Guided mode also runs
    the probabilistic variant and keeps the strictly better tour (ties: NN).
    """
    nn = multistart_nn(inst)
    if mode != "gcbb" or P is None:
        return nn, INCUMBENT_NN
    pnn = probabilistic_nn(inst, P)
    if pnn.length < nn.length:
        return pnn, INCUMBENT_PNN
    return nn, INCUMBENT_NN
