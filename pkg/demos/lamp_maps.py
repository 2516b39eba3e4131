"""Two lamplighter self-maps with opposite behaviour on leaves.

The sign-twisting map is 2-bilipschitz, yet the leaf of the empty colouring
spreads over two leaves, farther apart as the window grows. The subgroup
translation keeps leaves, but its base components drift apart in proportion
to the support of the colouring, so it has no product form.
"""
from wreathlab.certify import LampWindow, certify_lamp, component_distance, leaf_analysis
from wreathlab.groups import make_model
from wreathlab.lamp import Coloring, LampGraph, stock_lamp_graph
from wreathlab.maps import SignTwistMap, SupportShiftMap

g = stock_lamp_graph("z2wr_z_z2")
f = SignTwistMap(g)
c = certify_lamp(f, LampWindow(g, 6), g, seed=0, n_random=500).constants
print(f"sign-twisting map: C={c.C} K={c.K}")
for R in (4, 6, 8):
    rec = leaf_analysis(f, Coloring(2), LampWindow(g, R), g)
    print(f"  window {R}: empty leaf hits {len(rec.leaves_hit)} leaves, deviation {rec.deviation}")

h = LampGraph(make_model("z2h"), 2)
t = SupportShiftMap(h, (1, 0))
one = t.base_component(Coloring(2))
for k in range(1, 6):
    ck = Coloring.delta(2, *[(i,) for i in range(k)])
    print(f"translation map, support {k}: base component offset {component_distance(t.base_component(ck), one, h.model, 6)}")
