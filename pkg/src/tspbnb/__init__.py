"""Exact Euclidean TSP solving with a 1-tree Lagrangian branch and bound.

The solver runs in two modes: "classic" best-first search, and "gcbb", which
consumes an externally supplied edge-probability matrix to steer root
selection, the initial tour, branching-variable tie-breaks, and open-node
ordering. Probabilities never change the returned optimum, only the order in
which the tree is searched.
"""

from .bench import (AggregateTable, ExperimentSpec, PairedReport, ProfilePoint,
                    aggregate_table, better_solution_profile, cumulative_profile,
                    load_reports, profile_grid, render_aggregate_csv,
                    render_aggregate_text, render_profile_csv, run_experiment,
                    wilcoxon_signed_rank, write_profile_csvs, write_reports)
from .errors import (BenchError, BranchingExhausted, ConfigError, InfeasibleSubproblem,
                     InputError, InsufficientDataError, InvalidInstanceError,
                     OracleSizeError, ParseError, TspBnbError)
from .heuristics import (INCUMBENT_NN, INCUMBENT_PNN, initial_incumbent, multistart_nn,
                         nearest_neighbor, probabilistic_nn)
from .instance import (Instance, Tour, brute_force_optimum, generate, parse_tsplib,
                       read_tsplib, render_tsplib, tour_length, validate_tour,
                       write_tsplib)
from .onetree import (EdgeState, FractionalScores, LagrangeState, OneTree,
                      build_one_tree, choose_branch_edge, fix_edges, select_root,
                      subgradient_ascent)
from .probability import (OptimalityScore, ProbabilityMatrix, expected_optimality,
                          load_matrix, noisy_oracle_matrix, oracle_matrix,
                          render_matrix, save_matrix)
from .solver import (MODE_CLASSIC, MODE_GCBB, BBNode, SolveReport, SolverConfig,
                     child_nodes, compare_nodes, solve)

__version__ = "0.1.0"
