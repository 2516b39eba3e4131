"""Graph products of finite cyclic groups and their hyperplanes.

Balls in these Cayley graphs satisfy the quasi-median axioms away from the
window edge, and graph distance equals the number of separating hyperplanes.
"""
from wreathlab.quasimedian import STOCK_SPECS, audit_hyperplanes, hyperplanes, qm_ball, qm_validate, stock_spec

for name in sorted(STOCK_SPECS):
    spec = stock_spec(name)
    b = qm_ball(spec, 5)
    rep = qm_validate(b, 2)
    hs = hyperplanes(b)
    audit = audit_hyperplanes(b, hs, 3, spec.clique_number())
    print(f"{name:9s} {len(b):5d} vertices  {len(hs):4d} hyperplanes  axioms {'ok' if rep.ok else 'FAIL'}  "
          f"distance audit {'ok' if audit.ok else 'FAIL'} on {audit.pairs} pairs")
