"""Flow-heuristic running time against |B||P| + |B|^2, on a reduced grid.

Run with ``python demos/scaling.py``; the full grid is ``ridepool bench``.
"""
from ridepool.bench import branch_count_suite, scaling_suite

# Requests arrive pre-grouped into tight clusters, so only the flow part
# is timed. Taxis and clusters share one fixed square.
out = scaling_suite(p_sizes=(100, 1000, 3000), b_sizes=(10, 100, 300), seed=0)
print(f"{'P':>6} {'B':>5} {'work':>10} {'seconds':>9} {'served':>7}")
for r in out["rows"]:
    print(f"{r['requests']:>6} {r['vehicles']:>5} {r['work']:>10} {r['seconds']:>9.4f} {r['served']:>7}")
print(f"log-log slope {out['slope']:.3f}")

# The exact solver's node counts, next to the 1.2321^|E| reference curve.
for r in branch_count_suite(n_instances=8, seed=0)["rows"]:
    print(f"|E|={r['edges']:3d} nodes={r['nodes_expanded']:5d} nodes/1.2321^|E|={r['ratio']:.3g}")
