"""Word distances in Z2 wr Z and Z2 wr_Z Z^2, computed two ways.

The zone-tsp engine plans a tour of the zones whose lamps differ; BFS walks
the Cayley graph. They should agree, and the tour comes with a replayable
witness word.
"""
from wreathlab.cli import format_state
from wreathlab.lamp import lamp_distance, replay_witness, stock_lamp_graph

g = stock_lamp_graph("z2wr_z")
a = g.state({}, (0,))
b = g.state({(-2,): 1, (3,): 1}, (1,))
r = lamp_distance(g, a, b)
print("Z2 wr Z:", format_state(a), "->", format_state(b))
print("  zone-tsp", r.value, "bfs", lamp_distance(g, a, b, "bfs").value)
print("  witness", " ".join(r.witness))
assert replay_witness(g, a, r.witness) == b

# over Z^2 the lamps sit on vertical lines, so moving up and down is free of lamp work
g2 = stock_lamp_graph("z2wr_z_z2")
a = g2.state({}, (0, 0))
for target in [g2.state({(1,): 1}, (0, 3)), g2.state({(-1,): 1, (2,): 1}, (0, -2))]:
    r = lamp_distance(g2, a, target)
    print("Z2 wr_Z Z^2:", format_state(target), "distance", r.value, "witness", " ".join(r.witness))
