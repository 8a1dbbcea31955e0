"""Headless convergence study with simulated users.

Runs the reproducible multi-run experiment behind `evoart simulate`: each run
fixes a random target preference, votes 4/3/2/1 for the closest individuals,
and tracks how quickly the heaviest values and continuous means reach the
target. Writes the machine-readable report next to this script.
"""

import json
from pathlib import Path

from evoart import default_schema, simulate

OUT = Path(__file__).parent / "output"
OUT.mkdir(parents=True, exist_ok=True)

schema = default_schema()
report = simulate(schema, runs=30, iterations=6, seed=12345)

print(report.table())

final = report.rows[-1]
print("\nAfter", report.iterations, "iterations over", report.runs, "runs:")
for attr, rate in sorted(final.match_rate.items()):
    print(f"  heaviest {attr:<11} matches the target in {rate:5.1%} of runs")
for attr, mae in sorted(final.continuous_mae.items()):
    within = final.continuous_within[attr]
    print(f"  {attr:<12} mean abs error {mae:.3f}; within 0.20 in {within:5.1%} of runs")

path = OUT / "convergence_report.json"
path.write_text(json.dumps(report.to_doc(), indent=2, sort_keys=True) + "\n")
print(f"\nwrote {path}")
print("reports are pure functions of the seed: rerun with the same seed, get the same bytes")
