"""Fibre counting for measure-scaling maps, and where bounded n-to-one maps exist.

Halving the line is 2-to-one with no boundary error. The free group has a
2-to-one map at bounded displacement; the line does not, and the matching
search returns a Hall set to prove it.
"""
import random

from wreathlab.errors import NonAmenableRequired
from wreathlab.groups import Zd, make_model
from wreathlab.metrics import ball
from wreathlab.scaling import default_family, n_to_one_map, quasi_k_check

Z = Zd(1, 1)
tgt = ball(Z, 20)
fam = default_family(tgt, 3, random.Random(0))
c = quasi_k_check(lambda x: (x[0] // 2,), ball(Z, 42), tgt, 2, fam)
print(f"floor(x/2): {len(c.tests)} test sets, deviation {c.max_deviation}, C={c.C}")

m = n_to_one_map(make_model("f2"), 4, 2, 2)
print("F2, 2-to-one:", m.audit())
try:
    n_to_one_map(Z, 10, 2, 2)
except NonAmenableRequired as e:
    w = e.witness
    print(f"Z, 2-to-one: impossible, a set of {w['set_size']} points has only {w['neighborhood_size']} neighbours")
