"""The r-fold split of Z^m into Z^m and its inverse merge.

Both are bilipschitz with constant r. They carry each vertical coset onto a
vertical coset up to a bounded Hausdorff distance, and on the quotient line
the merge is exactly r-to-one.
"""
from wreathlab.certify import certify_base, induced_fibre_check, induced_map, pairs_certificate
from wreathlab.maps import SplitMergeMap

for r in (2, 3):
    for kind in ("gamma", "eta"):
        f = SplitMergeMap(kind, 2, r)
        c = certify_base(f, 8).constants
        pc = pairs_certificate(f, f.source, f.target, 24, C=r, K=0, q_max=2)
        im = induced_map(pc)
        print(f"{kind} r={r}: C={c.C} K={c.K}  cosets within Q={pc.Q}  "
              f"quotient map {sorted((a[0], b[0]) for a, b in im.mapping.items() if 0 <= a[0] <= 3)}")
    e = SplitMergeMap("eta", 2, r)
    sc = induced_fibre_check(induced_map(pairs_certificate(e, e.source, e.target, 24, C=r, K=0, q_max=2)), r)
    print(f"  merge on the quotient: {r}-to-one with deviation {sc.max_deviation} on {len(sc.tests)} intervals")

# gamma at r=3 needs Q=2: coset k lands on 3k+1 in the quotient, and coset 3k
# is two steps from part of the image
