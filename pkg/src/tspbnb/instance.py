"""Euclidean TSP instances: generation, TSPLIB subset I/O, tours, brute-force oracle.

Distances are exact double-precision L2 lengths. We deliberately do not apply
the nearest-integer rounding used for classic EUC_2D benchmark files: with
unit-square coordinates that rounding would collapse every distance to 0 or 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import InvalidInstanceError, OracleSizeError, ParseError

# numpy's default bit generator; its stream is stable across platforms, so a
# recorded seed reproduces the same instances anywhere.
RNG_NAME = "PCG64"

MAX_BRUTE_FORCE_N = 12

LENGTH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Instance:
    """Complete weighted graph over 2D points, costs = pairwise Euclidean lengths."""

    coords: np.ndarray
    name: str = "instance"
    seed: int | None = None
    dist: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise InvalidInstanceError("coords must be an (n, 2) array of points")
        if coords.shape[0] < 3:
            raise InvalidInstanceError(f"need at least 3 vertices, got {coords.shape[0]}")
        if not np.all(np.isfinite(coords)):
            raise InvalidInstanceError("coordinates must be finite")
        object.__setattr__(self, "coords", coords)
        dx = coords[:, 0][:, None] - coords[:, 0][None, :]
        dy = coords[:, 1][:, None] - coords[:, 1][None, :]
        object.__setattr__(self, "dist", np.hypot(dx, dy))

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def cost(self, i: int, j: int) -> float:
        if i == j:
            raise InvalidInstanceError("self-loop cost is undefined")
        return float(self.dist[i, j])


@dataclass(frozen=True)
class Tour:
    """A Hamiltonian cycle given as a visiting order, plus its closed length."""

    order: tuple[int, ...]
    length: float

    @staticmethod
    def from_order(inst: Instance, order: Iterable[int]) -> "Tour":
        order = tuple(int(v) for v in order)
        return Tour(order=order, length=tour_length(inst, order))

    @property
    def n(self) -> int:
        return len(self.order)

    def edges(self) -> list[tuple[int, int]]:
        """The n undirected edges of the cycle, each as (min, max)."""
        out = []
        for k, u in enumerate(self.order):
            v = self.order[(k + 1) % len(self.order)]
            out.append((u, v) if u < v else (v, u))
        return out


def tour_length(inst: Instance, order: Iterable[int]) -> float:
    order = tuple(order)
    total = 0.0
    for k, u in enumerate(order):
        total += inst.dist[u, order[(k + 1) % len(order)]]
    return float(total)


def generate(n: int, seed: int) -> Instance:
    """Sample n points i.i.d. uniform on the unit square; deterministic per seed."""
    if n < 3:
        raise InvalidInstanceError(f"need at least 3 vertices, got {n}")
    rng = np.random.default_rng(seed)
    coords = rng.random((n, 2))
    return Instance(coords=coords, name=f"rnd-n{n}-s{seed}", seed=seed)


def validate_tour(inst: Instance, t: Tour) -> bool:
    """True iff t is a Hamiltonian cycle on inst with a consistent length.

    The visiting-order representation makes the single-cycle condition
    structural; what is left to check is that the order is a permutation and
    that the stored length matches the recomputed one within LENGTH_TOL.
    """
    if len(t.order) != inst.n:
        return False
    if sorted(t.order) != list(range(inst.n)):
        return False
    return abs(tour_length(inst, t.order) - t.length) <= LENGTH_TOL


def brute_force_optimum(inst: Instance) -> Tour:
    """Globally optimal tour by exhaustive permutation enumeration (n <= 12).

    Vertex 0 is fixed first; each cycle is visited in one direction only.
    Partial sums are abandoned once they reach the best complete tour, which
    does not change the set of tours considered.
    """
    n = inst.n
    if n > MAX_BRUTE_FORCE_N:
        raise OracleSizeError(f"brute force capped at n={MAX_BRUTE_FORCE_N}, got {n}")
    d = [list(map(float, row)) for row in inst.dist]
    d0 = d[0]
    best_len = math.inf
    best_perm: tuple[int, ...] | None = None
    for perm in itertools.permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue
        total = d0[perm[0]]
        prev = perm[0]
        abandoned = False
        for v in perm[1:]:
            total += d[prev][v]
            if total >= best_len:
                abandoned = True
                break
            prev = v
        if abandoned:
            continue
        total += d[prev][0]
        if total < best_len:
            best_len = total
            best_perm = perm
    assert best_perm is not None
    return Tour.from_order(inst, (0,) + best_perm)


# ---------------------------------------------------------------------------
# TSPLIB subset I/O (NAME, TYPE, DIMENSION, EDGE_WEIGHT_TYPE, NODE_COORD_SECTION,
# EOF). Vertex indices are 1-based on disk, 0-based in memory.
# ---------------------------------------------------------------------------

def parse_tsplib(source: str | IO[str]) -> Instance:
    """Parse a EUC_2D TSPLIB file from a string or text stream."""
    text = source.read() if hasattr(source, "read") else source
    lines = text.splitlines()

    name = "instance"
    dimension: int | None = None
    weight_type: str | None = None
    coords: list[tuple[float, float]] | None = None

    k = 0
    while k < len(lines):
        line = lines[k].strip()
        k += 1
        if not line:
            continue
        key, _, value = line.partition(":")
        key = key.strip().upper()
        value = value.strip()
        if key == "NAME":
            name = value
        elif key == "DIMENSION":
            try:
                dimension = int(value)
            except ValueError:
                raise ParseError(f"line {k}: DIMENSION is not an integer: {value!r}")
            if dimension < 3:
                raise ParseError(f"line {k}: DIMENSION must be at least 3, got {dimension}")
        elif key == "EDGE_WEIGHT_TYPE":
            weight_type = value.upper()
            if weight_type != "EUC_2D":
                raise ParseError(f"line {k}: unsupported EDGE_WEIGHT_TYPE {value!r} (only EUC_2D)")
        elif key == "NODE_COORD_SECTION":
            if dimension is None:
                raise ParseError(f"line {k}: NODE_COORD_SECTION before DIMENSION")
            coords = _read_coord_lines(lines, k, dimension)
            k += dimension
        elif key == "EOF":
            break
        # other header keys (TYPE, COMMENT, ...) are accepted and ignored

    if dimension is None:
        raise ParseError(f"line {len(lines)}: missing DIMENSION")
    if weight_type is None:
        raise ParseError(f"line {len(lines)}: missing EDGE_WEIGHT_TYPE")
    if coords is None:
        raise ParseError(f"line {len(lines)}: missing NODE_COORD_SECTION")
    return Instance(coords=np.array(coords, dtype=float), name=name)


def _read_coord_lines(lines: list[str], start: int, n: int) -> list[tuple[float, float]]:
    coords: list[tuple[float, float] | None] = [None] * n
    for off in range(n):
        lineno = start + off + 1
        if start + off >= len(lines):
            raise ParseError(f"line {lineno}: expected {n} coordinate lines, file ended early")
        parts = lines[start + off].split()
        if len(parts) < 3:
            raise ParseError(f"line {lineno}: expected 'index x y', got {lines[start + off]!r}")
        try:
            idx = int(parts[0])
            x, y = float(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric coordinate entry in {lines[start + off]!r}")
        if not 1 <= idx <= n:
            raise ParseError(f"line {lineno}: vertex index {idx} outside 1..{n}")
        if coords[idx - 1] is not None:
            raise ParseError(f"line {lineno}: duplicate vertex index {idx}")
        coords[idx - 1] = (x, y)
    return coords  # type: ignore[return-value]


def render_tsplib(inst: Instance) -> str:
    """Serialize an instance; coordinates round-trip bit-exactly (repr floats)."""
    out = [
        f"NAME: {inst.name}",
        "TYPE: TSP",
        f"DIMENSION: {inst.n}",
        "EDGE_WEIGHT_TYPE: EUC_2D",
        "NODE_COORD_SECTION",
    ]
    for i, (x, y) in enumerate(inst.coords, start=1):
        out.append(f"{i} {float(x)!r} {float(y)!r}")
    out.append("EOF")
    return "\n".join(out) + "\n"


def read_tsplib(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_tsplib(fh)


def write_tsplib(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_tsplib(inst))
