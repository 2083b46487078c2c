"""From a TLC-style trip CSV to a validated run report.

Run with ``python demos/taxi_fixture.py [records.csv]``; defaults to the
bundled 1000-row test fixture.
"""
import sys
from pathlib import Path

import numpy as np

from ridepool.ingest import ingest_trip_records
from ridepool.instance import Instance, InstanceConfig, random_vehicles
from ridepool.pipeline import run_pipeline

path = sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parents[1] / "tests" / "data" / "tlc_sample.csv"

# Keep trips that start and end in the bbox and are picked up between 8:15
# and 8:30; coordinates are projected to meters around the bbox centre.
config = InstanceConfig()
res = ingest_trip_records(path, config)
print(f"kept {len(res)} of {res.rows} rows: {res.outside_bbox} outside the bbox, "
      f"{res.outside_window} outside the window, {res.skipped} unreadable")

# Trip records carry no taxi positions, so twenty are placed at random.
vehicles = random_vehicles(np.random.default_rng(0), 20, config)
report = run_pipeline(Instance(res.requests, vehicles, config.params), config, timing=True)

for name, entry in report.solvers.items():
    print(f"{name:5s} serves {entry['served']:3d} riders, weight {entry['weight']:.2f}, "
          f"{len(entry['violations'])} violations, {entry['elapsed']:.3f} s")
print("instance summary:", report.summary)
