"""Acceptance suite: one test per release criterion, each printing a PASS/FAIL
line (run with `pytest tests/test_acceptance.py -v -s`). All tolerances are
fixed here; nothing is calibrated at runtime."""

import csv
import io
import time
from dataclasses import dataclass

import numpy as np
import pytest

from tspbnb import (ExperimentSpec, Instance, MODE_CLASSIC, MODE_GCBB,
                    ProbabilityMatrix, SolveReport, SolverConfig, Tour,
                    aggregate_table, better_solution_profile, brute_force_optimum,
                    cumulative_profile, generate, noisy_oracle_matrix, oracle_matrix,
                    profile_grid, render_aggregate_csv, render_profile_csv,
                    run_experiment, solve, wilcoxon_signed_rank)
from oracles import closed_form_wilcoxon_p

TOL = 1e-9
SWEEP_SIZE = 200
SWEEP_BUDGET_S = 120.0


def _report(name: str, ok: bool, detail: str = ""):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name} failed: {detail}"


@dataclass
class SweepRun:
    seed: int
    n: int
    inst: Instance
    optimum: Tour
    oracle: ProbabilityMatrix
    noisy: ProbabilityMatrix
    classic: SolveReport
    gcbb_oracle: SolveReport
    gcbb_noisy: SolveReport


@pytest.fixture(scope="module")
def sweep():
    """200 seeded instances, n in 5..10, solved classic / gcbb-oracle /
    gcbb-noisy(0.3). Shared by several criteria below."""
    runs = []
    t0 = time.perf_counter()
    for i in range(SWEEP_SIZE):
        n = 5 + (i % 6)
        inst = generate(n, seed=i)
        optimum = brute_force_optimum(inst)
        oracle = oracle_matrix(inst)
        noisy = noisy_oracle_matrix(inst, 0.3, seed=i + 1_000_003)
        classic = solve(inst, cfg=SolverConfig(mode=MODE_CLASSIC, seed=i))
        g_oracle = solve(inst, oracle, SolverConfig(mode=MODE_GCBB, seed=i))
        g_noisy = solve(inst, noisy, SolverConfig(mode=MODE_GCBB, seed=i))
        runs.append(SweepRun(i, n, inst, optimum, oracle, noisy,
                             classic, g_oracle, g_noisy))
    elapsed = time.perf_counter() - t0
    return runs, elapsed


def test_exactness_oracle_sweep(sweep):
    runs, elapsed = sweep
    mismatches = []
    for r in runs:
        for tag, rep in (("classic", r.classic), ("gcbb-oracle", r.gcbb_oracle),
                         ("gcbb-noisy", r.gcbb_noisy)):
            assert rep.solved
            if abs(rep.optimum.length - r.optimum.length) > TOL:
                mismatches.append((r.seed, tag))
    _report("exactness-oracle-sweep",
            not mismatches and elapsed < SWEEP_BUDGET_S,
            f"{len(runs)} instances x 3 modes, {elapsed:.1f}s")


def test_search_order_safety(sweep):
    runs, _ = sweep
    bad = []
    for r in runs:
        uniform = np.full((r.n, r.n), 0.5)
        np.fill_diagonal(uniform, 0.0)
        inverted = 1.0 - r.oracle.p
        np.fill_diagonal(inverted, 0.0)
        lengths = {"classic": r.classic.optimum.length,
                   "oracle": r.gcbb_oracle.optimum.length,
                   "noisy": r.gcbb_noisy.optimum.length}
        for tag, P in (("uniform", ProbabilityMatrix(uniform)),
                       ("inverted", ProbabilityMatrix(inverted))):
            rep = solve(r.inst, P, SolverConfig(mode=MODE_GCBB, seed=r.seed))
            lengths[tag] = rep.optimum.length
        if max(lengths.values()) - min(lengths.values()) > TOL:
            bad.append((r.seed, lengths))
    _report("search-order-safety", not bad,
            f"{len(runs)} instances x (classic, oracle, noisy, uniform, inverted)")


def test_bound_validity():
    violations = 0
    non_monotone = 0
    for i in range(100):
        inst = generate(8, seed=2000 + i)
        opt = brute_force_optimum(inst).length
        seen = []

        def observer(node, lstate):
            seen.append((node, lstate.bounds))

        rep = solve(inst, cfg=SolverConfig(mode=MODE_CLASSIC, seed=2000 + i),
                    ascent_observer=observer)
        assert rep.solved
        for node, bounds in seen:
            running = np.maximum.accumulate(bounds)
            if np.any(np.diff(running) < 0):
                non_monotone += 1
            if node.explored and running[-1] > opt + TOL:
                violations += 1
    _report("bound-validity", violations == 0 and non_monotone == 0,
            f"100 instances n=8: {violations} explored-node violations, "
            f"{non_monotone} non-monotone ascents")


@pytest.fixture(scope="module")
def guidance_runs():
    runs = []
    for i in range(100):
        n = 8 + (i % 3)
        inst = generate(n, seed=3000 + i)
        oracle = oracle_matrix(inst)
        classic = solve(inst, cfg=SolverConfig(mode=MODE_CLASSIC, seed=3000 + i))
        guided = solve(inst, oracle, SolverConfig(mode=MODE_GCBB, seed=3000 + i))
        runs.append((classic, guided))
    return runs


def test_guidance_effect(guidance_runs):
    classic_nbo = np.mean([c.nodes_before_opt for c, _ in guidance_runs])
    gcbb_nbo = np.mean([g.nodes_before_opt for _, g in guidance_runs])
    classic_depth = np.mean([c.opt_depth for c, _ in guidance_runs])
    gcbb_depth = np.mean([g.opt_depth for _, g in guidance_runs])
    all_zero = all(g.nodes_before_opt == 0 for _, g in guidance_runs)
    ok = gcbb_nbo <= classic_nbo and gcbb_depth <= classic_depth and all_zero
    _report("guidance-effect", ok,
            f"nodes_before_opt {gcbb_nbo:.2f} vs {classic_nbo:.2f}, "
            f"opt_depth {gcbb_depth:.2f} vs {classic_depth:.2f}, oracle all-zero={all_zero}")


def test_optimality_score_ceiling(sweep):
    runs, _ = sweep
    scores = [r.gcbb_oracle.opt_score_normalized for r in runs]
    mean = float(np.mean(scores))
    _report("optimality-score-ceiling", mean == 1.0 and all(s == 1.0 for s in scores),
            f"mean E[O]/n = {mean}")


def test_edge_fixing_soundness(sweep):
    runs, _ = sweep
    mismatches = 0
    increased = 0
    for r in runs:
        nofix = solve(r.inst, cfg=SolverConfig(mode=MODE_CLASSIC, fixing=False,
                                               seed=r.seed))
        if abs(nofix.optimum.length - r.classic.optimum.length) > TOL:
            mismatches += 1
        if r.classic.generated_nodes > nofix.generated_nodes:
            increased += 1
    frac = increased / len(runs)
    _report("edge-fixing-soundness", mismatches == 0 and frac <= 0.05,
            f"{mismatches} optimum mismatches, fixing grew the tree on "
            f"{100 * frac:.1f}% of instances")


def _check_report_invariants(rep: SolveReport) -> list:
    problems = []
    if rep.explored_nodes > rep.generated_nodes:
        problems.append("explored > generated")
    if rep.nodes_before_opt > rep.generated_nodes:
        problems.append("nodes_before_opt > generated")
    if rep.opt_depth > rep.tree_depth:
        problems.append("opt_depth > tree_depth")
    if not (0.0 <= rep.time_to_best <= rep.bb_time <= rep.total_time + 1e-12):
        problems.append("time ordering broken")
    lengths = [l for _, l in rep.incumbent_trajectory]
    if not all(b < a - TOL for a, b in zip(lengths, lengths[1:])):
        problems.append("trajectory not strictly decreasing")
    if rep.incumbent_trajectory[-1][1] != rep.optimum.length:
        problems.append("trajectory does not end at the optimum")
    return problems


@pytest.fixture(scope="module")
def experiment_pairs():
    spec = ExperimentSpec(sizes=(8, 9), count=8, seed_base=0, time_limit=120.0,
                          prob_source="noisy:0.2")
    return spec, run_experiment(spec)


def test_metric_and_profile_invariants(sweep, experiment_pairs):
    runs, _ = sweep
    _, pairs = experiment_pairs
    problems = []
    for r in runs:
        for rep in (r.classic, r.gcbb_oracle, r.gcbb_noisy):
            problems.extend(_check_report_invariants(rep))
    grid = profile_grid(120.0, points=128)
    cum = cumulative_profile(pairs, grid)
    for a, b in zip(cum, cum[1:]):
        if b.hybrid < a.hybrid or b.classic < a.classic:
            problems.append("cumulative profile not monotone")
    for p in better_solution_profile(pairs, grid):
        if p.hybrid + p.classic > 1.0 + 1e-12:
            problems.append("better-solution fractions exceed 1")
    header = render_profile_csv([]).splitlines()[0]
    if header != "Time,Hybrid,Classic":
        problems.append(f"profile header {header!r}")
    _report("metric-and-profile-invariants", not problems,
            f"{len(problems)} violations" if problems else
            f"{3 * len(runs)} reports + profiles clean")


def _non_timing_signature(pairs):
    sig = []
    for p in pairs:
        for rep in (p.classic, p.gcbb):
            sig.append((p.n, p.seed, rep.mode, rep.solved, rep.optimum.order,
                        round(rep.optimum.length, 12), rep.generated_nodes,
                        rep.explored_nodes, rep.tree_depth, rep.opt_depth,
                        rep.nodes_before_opt, rep.incumbent_source))
    return sig


_TIME_METRICS = {"total_time", "bb_time", "time_to_best"}


def _non_timing_csv_rows(table) -> list:
    rows = list(csv.reader(io.StringIO(render_aggregate_csv(table))))
    return [row for row in rows if row and row[0] not in _TIME_METRICS]


def test_determinism(experiment_pairs):
    spec, pairs = experiment_pairs
    again = run_experiment(spec)
    same_runs = _non_timing_signature(pairs) == _non_timing_signature(again)
    same_csv = _non_timing_csv_rows(aggregate_table(pairs)) == \
        _non_timing_csv_rows(aggregate_table(again))
    _report("determinism", same_runs and same_csv,
            f"runs identical={same_runs}, tables identical={same_csv}")


def test_wilcoxon_correctness():
    rng = np.random.default_rng(12345)
    cases = [
        list(range(1, 21)),                       # all positive
        [v for k in range(1, 11) for v in (k, -k)],  # antisymmetric
        [1, 1, 1, -1, 2, 2, -2, 3, 3, 3, -3, 4],  # heavy ties
        [0.5] * 12 + [-0.5] * 3,                  # a single tie group
        list(range(1, 15)) + [-1, -2],
    ]
    while len(cases) < 20:
        d = np.round(rng.normal(size=rng.integers(12, 30)), 1)
        d = d[d != 0]
        if len(d) >= 10:
            cases.append(list(d))
    worst = 0.0
    for d in cases:
        got = wilcoxon_signed_rank(d)
        want = closed_form_wilcoxon_p(d)
        worst = max(worst, abs(got - want))
    all_pos_p = wilcoxon_signed_rank(list(range(1, 21)))
    anti_p = wilcoxon_signed_rank([v for k in range(1, 11) for v in (k, -k)])
    ok = worst <= TOL and all_pos_p < 0.05 and abs(anti_p - 1.0) <= TOL
    _report("wilcoxon-correctness", ok,
            f"20 cases, max |p - closed form| = {worst:.2e}")
