"""Edge-probability matrices and the expected optimality score of a 1-tree.

The matrix file format (the contract with external producers):
line 1 holds the integer dimension n, followed by n lines of n space-separated
reals (row i = p[i, :]). Lines starting with '#' are comments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import InputError, OracleSizeError
from .instance import Instance, brute_force_optimum

SYMMETRY_TOL = 1e-6
RANGE_TOL = 1e-9


class ProbabilityMatrix:
    """Symmetric n x n edge probabilities, zero diagonal, entries in [0, 1].

    Construction normalizes tolerable noise: asymmetries up to SYMMETRY_TOL are
    averaged away, range/diagonal violations up to RANGE_TOL are clamped.
    Anything larger is rejected.
    """

    def __init__(self, p):
        p = np.asarray(p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise InputError(f"probability matrix must be square, got shape {p.shape}")
        asym = np.abs(p - p.T).max() if p.size else 0.0
        if asym > SYMMETRY_TOL:
            raise InputError(f"matrix asymmetry {asym:g} exceeds tolerance {SYMMETRY_TOL:g}")
        p = (p + p.T) / 2.0
        diag = np.abs(np.diagonal(p)).max() if p.size else 0.0
        if diag > RANGE_TOL:
            raise InputError(f"diagonal entries must be zero, found {diag:g}")
        np.fill_diagonal(p, 0.0)
        lo, hi = p.min(initial=0.0), p.max(initial=0.0)
        if lo < -RANGE_TOL or hi > 1.0 + RANGE_TOL:
            raise InputError(f"entries must lie in [0, 1], found range [{lo:g}, {hi:g}]")
        self.p = np.clip(p, 0.0, 1.0)

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def edge(self, i: int, j: int) -> float:
        return float(self.p[i, j])


@dataclass(frozen=True)
class OptimalityScore:
    """Expected number of a 1-tree's edges that lie in an optimal tour."""

    value: float
    normalized: float


def expected_optimality(tree, P: ProbabilityMatrix) -> OptimalityScore:
    """Sum the edge probabilities over the n edges of a 1-tree (or tour).

    `tree` is anything exposing n and edges() -> [(i, j), ...]; a tour is a
    1-tree whose vertices all have degree two, so both shapes are accepted.
    """
    if tree.n != P.n:
        raise InputError(f"dimension mismatch: structure has n={tree.n}, matrix n={P.n}")
    value = float(sum(P.p[i, j] for i, j in tree.edges()))
    return OptimalityScore(value=value, normalized=value / P.n)


def oracle_matrix(inst: Instance) -> ProbabilityMatrix:
    """Perfect predictions: 1 on the brute-force optimal tour's edges, else 0."""
    opt = brute_force_optimum(inst)
    p = np.zeros((inst.n, inst.n))
    for i, j in opt.edges():
        p[i, j] = p[j, i] = 1.0
    return ProbabilityMatrix(p)


def noisy_oracle_matrix(inst: Instance, noise: float, seed: int) -> ProbabilityMatrix:
    """Oracle matrix with each entry shifted toward 0.5 by at most `noise`."""
    if not 0.0 <= noise <= 0.5:
        raise InputError(f"noise must lie in [0, 0.5], got {noise}")
    if inst.n > 12:
        raise OracleSizeError(f"noisy oracle capped at n=12, got {inst.n}")
    base = oracle_matrix(inst).p
    rng = np.random.default_rng(seed)
    p = np.zeros_like(base)
    for i in range(inst.n):
        for j in range(i + 1, inst.n):
            u = rng.random()
            p[i, j] = p[j, i] = 1.0 - u * noise if base[i, j] == 1.0 else u * noise
    return ProbabilityMatrix(p)


def load_matrix(source: str | IO[str]) -> ProbabilityMatrix:
    """Load and validate a matrix from a path, file object, or raw text."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        source = str(source)
        if "\n" in source:
            text = source
        else:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
    rows = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            try:
                n = int(line)
            except ValueError:
                raise InputError(f"line {lineno}: expected integer dimension, got {line!r}")
            if n < 1:
                raise InputError(f"line {lineno}: dimension must be positive, got {n}")
            continue
        try:
            row = [float(tok) for tok in line.split()]
        except ValueError:
            raise InputError(f"line {lineno}: non-numeric matrix entry in {line!r}")
        if len(row) != n:
            raise InputError(f"line {lineno}: expected {n} entries, got {len(row)}")
        rows.append(row)
    if n is None:
        raise InputError("empty matrix file")
    if len(rows) != n:
        raise InputError(f"declared n={n} but found {len(rows)} matrix rows")
    return ProbabilityMatrix(np.array(rows))


def render_matrix(P: ProbabilityMatrix) -> str:
    lines = [str(P.n)]
    for row in P.p:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def save_matrix(P: ProbabilityMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_matrix(P))
