"""Build finite graphs and the Poisson clock schedules that drive everything.

Every simulation in this package is a deterministic replay of one
ClockSchedule: per vertex, a rate-1 heal clock and a rate-lambda infect
clock, merged into a single time-ordered event list.
"""
import numpy as np

from tocp import build_schedule, build_torus, build_tree, merged_events, parse_graph_spec

# a periodic 2d torus: every vertex has degree 4, vertex 0 is the origin
torus = build_torus(d=2, L=8)
print(f"torus(2,8): {torus.n_vertices} vertices, degree {torus.deg[0]}")
print("origin neighbours:", torus.adjacency(0), "->", [torus.torus_coord(i) for i in torus.adjacency(0)])

# a depth-truncated rooted tree with oriented sons
tree = build_tree(n=3, depth=4)
print(f"tree(3,4): {tree.n_vertices} vertices; root sons {tree.sons_of(0)}")

# graph descriptions used by the command line
print("parsed:", parse_graph_spec("torus:d=1,L=10").params)

# clocks: same inputs give bit-identical schedules
s1 = build_schedule(torus, lam=0.5, horizon=2.0, seed=42)
s2 = build_schedule(torus, lam=0.5, horizon=2.0, seed=42)
print(f"schedule: {s1.n_events} events; deterministic: {np.array_equal(s1.times, s2.times)}")

# expected count is V * (1 + lambda) * T
expect = torus.n_vertices * 1.5 * 2.0
print(f"event count {s1.n_events} vs expectation {expect:.0f}")

for i, ev in enumerate(merged_events(s1)):
    print("  event", i, ev)
    if i >= 4:
        break
