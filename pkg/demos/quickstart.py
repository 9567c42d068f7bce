"""Quickstart: generate a random instance, solve it exactly, inspect the report.

Run:  python3 demos/quickstart.py
"""

import json

from tspbnb import SolverConfig, brute_force_optimum, generate, solve, validate_tour

# 12 points sampled uniformly in the unit square, reproducible via the seed
inst = generate(12, seed=42)
print(f"instance {inst.name}: n={inst.n}")

report = solve(inst, cfg=SolverConfig(mode="classic", seed=42))

print(f"solved            : {report.solved}")
print(f"optimal length    : {report.optimum.length:.6f}")
print(f"optimal order     : {report.optimum.order}")
print(f"valid tour        : {validate_tour(inst, report.optimum)}")
print(f"generated nodes   : {report.generated_nodes}")
print(f"explored nodes    : {report.explored_nodes}")
print(f"tree depth        : {report.tree_depth}")
print(f"initial incumbent : {report.incumbent_source}")

# cross-check against exhaustive enumeration (n <= 12)
oracle = brute_force_optimum(inst)
assert abs(oracle.length - report.optimum.length) <= 1e-9
print(f"matches brute force optimum ({oracle.length:.6f})")

print("\nfull machine-readable record:")
print(json.dumps(report.to_record(), indent=2)[:600] + " ...")
