"""Experiment harness: batch paired solving (classic vs guided), aggregate
tables with confidence intervals and significance flags, time-based
performance profiles, and the paired Wilcoxon signed-rank test."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BenchError, ConfigError, InsufficientDataError
from .heuristics import INCUMBENT_NN, INCUMBENT_PNN
from .instance import RNG_NAME, generate
from .probability import ProbabilityMatrix, load_matrix, noisy_oracle_matrix, oracle_matrix
from .solver import MODE_CLASSIC, MODE_GCBB, SolveReport, SolverConfig, solve

PROFILE_HEADER = "Time,Hybrid,Classic"

# report metrics aggregated in the table, keyed by serialized name
_METRIC_FIELDS = (
    ("total_time", "total_time"),
    ("bb_time", "bb_time"),
    ("time_to_best", "time_to_best"),
    ("bb_tree_depth", "tree_depth"),
    ("depth_of_the_optimum", "opt_depth"),
    ("generated_bb_nodes", "generated_nodes"),
    ("explored_bb_nodes", "explored_nodes"),
    ("bb_nodes_before_optimum", "nodes_before_opt"),
    ("optimality_score", "opt_score_normalized"),
)


@dataclass(frozen=True)
class ExperimentSpec:
    """One batch: `count` seeded instances per size, each solved by both modes.

    prob_source is "oracle", "noisy:<level>", or a directory containing
    per-instance files named <n>_<seed>.prob; a mapping from size to source
    selects per size.
    """

    sizes: tuple[int, ...]
    count: int
    seed_base: int = 0
    time_limit: float = 600.0
    tie_eps: float | None = None
    prob_source: str | Mapping[int, str] = "oracle"
    workers: int = 1
    fixing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if self.count < 1:
            raise ConfigError(f"count must be >= 1, got {self.count}")
        if any(s < 3 for s in self.sizes):
            raise ConfigError(f"all sizes must be >= 3, got {self.sizes}")


@dataclass(frozen=True)
class PairedReport:
    n: int
    seed: int
    classic: SolveReport
    gcbb: SolveReport


@dataclass(frozen=True)
class ProfilePoint:
    time: float
    hybrid: float
    classic: float


def _source_for(spec: ExperimentSpec, n: int) -> str:
    if isinstance(spec.prob_source, Mapping):
        try:
            return spec.prob_source[n]
        except KeyError:
            raise ConfigError(f"no probability source configured for size {n}")
    return spec.prob_source


def _probability_for(source: str, inst, n: int, seed: int) -> ProbabilityMatrix:
    if source == "oracle":
        return oracle_matrix(inst)
    if source.startswith("noisy:"):
        level = float(source.split(":", 1)[1])
        return noisy_oracle_matrix(inst, level, seed=seed + 1_000_003)
    return load_matrix(Path(source) / f"{n}_{seed}.prob")


def _check_sources(spec: ExperimentSpec) -> None:
    """Fail before any solving when a file-backed source is incomplete."""
    for n in spec.sizes:
        source = _source_for(spec, n)
        if source == "oracle" or source.startswith("noisy:"):
            continue
        for i in range(spec.count):
            path = Path(source) / f"{n}_{spec.seed_base + i}.prob"
            if not path.exists():
                raise ConfigError(f"missing probability file: {path}")


def _solve_pair(args) -> PairedReport:
    n, seed, time_limit, tie_eps, fixing, source = args
    inst = generate(n, seed)
    P = _probability_for(source, inst, n, seed)
    classic = solve(inst, cfg=SolverConfig(mode=MODE_CLASSIC, time_limit=time_limit,
                                           tie_eps=tie_eps, fixing=fixing, seed=seed))
    guided = solve(inst, P, cfg=SolverConfig(mode=MODE_GCBB, time_limit=time_limit,
                                             tie_eps=tie_eps, fixing=fixing, seed=seed))
    return PairedReport(n=n, seed=seed, classic=classic, gcbb=guided)


def run_experiment(spec: ExperimentSpec) -> list[PairedReport]:
    """Solve every instance with both modes; results ordered by (n, seed)."""
    _check_sources(spec)
    jobs = [(n, spec.seed_base + i, spec.time_limit, spec.tie_eps, spec.fixing,
             _source_for(spec, n))
            for n in spec.sizes for i in range(spec.count)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            pairs = list(pool.map(_solve_pair, jobs))
    else:
        pairs = [_solve_pair(job) for job in jobs]
    return sorted(pairs, key=lambda p: (p.n, p.seed))


# ---------------------------------------------------------------------------
# Aggregate table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricRow:
    name: str
    classic_mean: float | None
    classic_ci: float | None
    gcbb_mean: float | None
    gcbb_ci: float | None
    p_value: float | None
    significant: bool | None


@dataclass(frozen=True)
class AggregateTable:
    total: int
    population: int
    solved_pct: dict
    with_nn_pct: dict
    with_pnn_pct: dict
    rows: list
    meta: dict


def _mean_ci(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    half = 1.96 * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return mean, half


def aggregate_table(pairs: Sequence[PairedReport]) -> AggregateTable:
    """Per-mode means and 95% normal-approximation confidence intervals over
    the instances solved by both modes, plus solved / heuristic-hit rates."""
    if len(pairs) < 2:
        raise BenchError(f"need at least 2 paired reports, got {len(pairs)}")
    total = len(pairs)
    both = [p for p in pairs if p.classic.solved and p.gcbb.solved]
    if not both:
        raise BenchError("empty population: no instance was solved by both modes")

    def pct(flag) -> float:
        return 100.0 * sum(1 for p in pairs if flag(p)) / total

    def initial_won(rep: SolveReport, tag: str) -> bool:
        return rep.solved and rep.nodes_before_opt == 0 and rep.incumbent_source == tag

    solved_pct = {MODE_CLASSIC: pct(lambda p: p.classic.solved),
                  MODE_GCBB: pct(lambda p: p.gcbb.solved)}
    with_nn = {MODE_CLASSIC: pct(lambda p: initial_won(p.classic, INCUMBENT_NN)),
               MODE_GCBB: pct(lambda p: initial_won(p.gcbb, INCUMBENT_NN))}
    with_pnn = {MODE_CLASSIC: None,  # PNN is undefined for the classic solver
                MODE_GCBB: pct(lambda p: initial_won(p.gcbb, INCUMBENT_PNN))}

    rows = []
    for name, attr in _METRIC_FIELDS:
        cvals = [getattr(p.classic, attr) for p in both]
        gvals = [getattr(p.gcbb, attr) for p in both]
        cmean = cci = None
        if all(v is not None for v in cvals):
            cmean, cci = _mean_ci(cvals)
        gmean = gci = None
        if all(v is not None for v in gvals):
            gmean, gci = _mean_ci(gvals)
        p_value = significant = None
        if cmean is not None and gmean is not None:
            try:
                p_value = wilcoxon_signed_rank(np.asarray(gvals) - np.asarray(cvals))
                significant = p_value < 0.05
            except InsufficientDataError:
                pass
        rows.append(MetricRow(name, cmean, cci, gmean, gci, p_value, significant))

    meta = {
        "total_instances": total,
        "population": len(both),
        "population_rule": "means over instances solved by both modes",
        "ci": "95% normal approximation, mean +/- 1.96*sd/sqrt(k)",
        "significance": "paired two-sided Wilcoxon signed-rank (normal approximation, "
                        "tie-corrected) at the 5% level",
        "rng": RNG_NAME,
    }
    return AggregateTable(total=total, population=len(both), solved_pct=solved_pct,
                          with_nn_pct=with_nn, with_pnn_pct=with_pnn, rows=rows, meta=meta)


def _cell(v, fmt="{:.6g}") -> str:
    return "-" if v is None else fmt.format(v)


def render_aggregate_csv(table: AggregateTable) -> str:
    lines = ["metric,classic_mean,classic_ci95,gcbb_mean,gcbb_ci95,significant"]
    lines.append(f"instances_solved_pct,{table.solved_pct[MODE_CLASSIC]:.6g},,"
                 f"{table.solved_pct[MODE_GCBB]:.6g},,")
    lines.append(f"with_nn_pct,{table.with_nn_pct[MODE_CLASSIC]:.6g},,"
                 f"{table.with_nn_pct[MODE_GCBB]:.6g},,")
    lines.append(f"with_pnn_pct,{_cell(table.with_pnn_pct[MODE_CLASSIC])},,"
                 f"{_cell(table.with_pnn_pct[MODE_GCBB])},,")
    for row in table.rows:
        sig = "" if row.significant is None else str(row.significant).lower()
        lines.append(f"{row.name},{_cell(row.classic_mean)},{_cell(row.classic_ci)},"
                     f"{_cell(row.gcbb_mean)},{_cell(row.gcbb_ci)},{sig}")
    return "\n".join(lines) + "\n"


def render_aggregate_text(table: AggregateTable) -> str:
    w = 28
    out = [f"{'metric':<{w}} {'classic':>22} {'gcbb':>22}",
           "-" * (w + 46)]

    def line(name, c, g):
        out.append(f"{name:<{w}} {c:>22} {g:>22}")

    line("instances solved (%)", f"{table.solved_pct[MODE_CLASSIC]:.1f}",
         f"{table.solved_pct[MODE_GCBB]:.1f}")
    line("  with NN (%)", f"{table.with_nn_pct[MODE_CLASSIC]:.1f}",
         f"{table.with_nn_pct[MODE_GCBB]:.1f}")
    line("  with PNN (%)", _cell(table.with_pnn_pct[MODE_CLASSIC], "{:.1f}"),
         _cell(table.with_pnn_pct[MODE_GCBB], "{:.1f}"))
    for row in table.rows:
        mark = " *" if row.significant else ""
        c = "-" if row.classic_mean is None else f"{row.classic_mean:.4g} ± {row.classic_ci:.3g}"
        g = "-" if row.gcbb_mean is None else f"{row.gcbb_mean:.4g} ± {row.gcbb_ci:.3g}"
        line(row.name + mark, c, g)
    out.append("")
    out.append(f"population: {table.population}/{table.total} instances solved by both modes")
    out.append(f"ci: {table.meta['ci']}")
    out.append(f"*: {table.meta['significance']}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Performance profiles
# ---------------------------------------------------------------------------

def profile_grid(time_limit: float, points: int = 512) -> np.ndarray:
    """Log-spaced time grid from 1 ms to the time limit."""
    return np.logspace(math.log10(1e-3), math.log10(time_limit), points)


def cumulative_profile(pairs: Sequence[PairedReport], grid) -> list[ProfilePoint]:
    """Fraction of instances solved to proven optimality by each time point."""
    grid = np.asarray(grid, dtype=float)
    if grid.size and np.any(np.diff(grid) < 0):
        raise BenchError("time grid must be ascending")
    total = len(pairs)
    g_times = np.sort([p.gcbb.total_time for p in pairs if p.gcbb.solved])
    c_times = np.sort([p.classic.total_time for p in pairs if p.classic.solved])
    out = []
    for t in grid:
        hybrid = float(np.searchsorted(g_times, t, side="right")) / total
        classic = float(np.searchsorted(c_times, t, side="right")) / total
        out.append(ProfilePoint(time=float(t), hybrid=hybrid, classic=classic))
    return out


def _incumbent_at(trajectory, t: float) -> float:
    best = math.inf
    for elapsed, length in trajectory:
        if elapsed <= t:
            best = length
        else:
            break
    return best


def better_solution_profile(pairs: Sequence[PairedReport], grid,
                            prune_eps: float = 1e-9) -> list[ProfilePoint]:
    """Fraction of instances on which each mode holds a strictly better
    incumbent at each time; equal incumbents count for neither side."""
    grid = np.asarray(grid, dtype=float)
    for p in pairs:
        if not p.classic.incumbent_trajectory or not p.gcbb.incumbent_trajectory:
            raise BenchError(f"missing incumbent trajectory for n={p.n} seed={p.seed}")
    total = len(pairs)
    out = []
    for t in grid:
        hybrid = classic = 0
        for p in pairs:
            g = _incumbent_at(p.gcbb.incumbent_trajectory, t)
            c = _incumbent_at(p.classic.incumbent_trajectory, t)
            if g < c - prune_eps:
                hybrid += 1
            elif c < g - prune_eps:
                classic += 1
        out.append(ProfilePoint(time=float(t), hybrid=hybrid / total, classic=classic / total))
    return out


def render_profile_csv(points: Iterable[ProfilePoint]) -> str:
    lines = [PROFILE_HEADER]
    for p in points:
        lines.append(f"{p.time},{p.hybrid},{p.classic}")
    return "\n".join(lines) + "\n"


def write_profile_csvs(pairs: Sequence[PairedReport], n: int, out_dir,
                       time_limit: float, points: int = 512) -> list[Path]:
    """Write <n>_cumulative_profile.csv and <n>_performance_profile.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    subset = [p for p in pairs if p.n == n]
    grid = profile_grid(time_limit, points)
    paths = []
    for name, prof in ((f"{n}_cumulative_profile.csv", cumulative_profile(subset, grid)),
                       (f"{n}_performance_profile.csv", better_solution_profile(subset, grid))):
        path = out_dir / name
        path.write_text(render_profile_csv(prof), encoding="utf-8")
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank test (normal approximation)
# ---------------------------------------------------------------------------

def _rank_average(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=float)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def wilcoxon_signed_rank(diffs) -> float:
    """Two-sided p-value of the paired signed-rank test.

    Normal approximation with tie correction and no continuity correction;
    zero differences are dropped. Requires at least 10 nonzero pairs.
    """
    d = np.asarray(list(diffs), dtype=float)
    d = d[d != 0.0]
    m = d.size
    if m < 10:
        raise InsufficientDataError(f"need >= 10 nonzero pairs, got {m}")
    absd = np.abs(d)
    ranks = _rank_average(absd)
    w_plus = float(ranks[d > 0].sum())
    mean = m * (m + 1) / 4.0
    var = m * (m + 1) * (2 * m + 1) / 24.0
    _, counts = np.unique(absd, return_counts=True)
    var -= float((counts.astype(float) ** 3 - counts).sum()) / 48.0
    if var <= 0:
        return 1.0
    z = (w_plus - mean) / math.sqrt(var)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


# ---------------------------------------------------------------------------
# Report persistence (newline-delimited records)
# ---------------------------------------------------------------------------

def write_reports(pairs: Sequence[PairedReport], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            for rep in (p.classic, p.gcbb):
                fh.write(json.dumps(rep.to_record()) + "\n")


def load_reports(path) -> list[PairedReport]:
    by_key: dict[tuple[int, int], dict[str, SolveReport]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rep = SolveReport.from_record(json.loads(line))
            by_key.setdefault((rep.n, rep.seed), {})[rep.mode] = rep
    pairs = []
    for (n, seed), modes in sorted(by_key.items()):
        if MODE_CLASSIC not in modes or MODE_GCBB not in modes:
            raise BenchError(f"incomplete pair for n={n} seed={seed}")
        pairs.append(PairedReport(n=n, seed=seed, classic=modes[MODE_CLASSIC],
                                  gcbb=modes[MODE_GCBB]))
    return pairs
