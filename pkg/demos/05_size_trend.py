"""
Aligned versus per-node boosting
================================

Both variants compile the same seeded threshold functions exactly. The
aligned diagrams share one split per layer, which lets the merge step
collapse more of the frontier; the per-node variant grows wider.
"""

import statistics

from abdd.compare import compare_batch, entropy_trend_holds

rows = compare_batch(range(20), n=10)
print("seed   rho    abdd  mm    gates(abdd/mm)")
for r in rows:
    print(f"{r.seed:>4}  {r.rho:.3f}  {r.abdd_size:>4}  {r.mm_size:>4}  "
          f"{r.abdd_gates}/{r.mm_gates}")

med = statistics.median
print(f"\nmedian size: aligned {med(r.abdd_size for r in rows)}, "
      f"per-node {med(r.mm_size for r in rows)}")
print(f"entropy per depth no higher for aligned: "
      f"{sum(entropy_trend_holds(r) for r in rows)}/{len(rows)} seeds")

r = rows[0]
print("\nentropy by depth, seed 0")
for d, (a, m) in enumerate(zip(r.abdd_entropy, r.mm_entropy)):
    print(f"  depth {d}: aligned {a:.4f}  per-node {m:.4f}")
