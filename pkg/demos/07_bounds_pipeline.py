"""Bound aggregation: max per critical value, summed.

The upper-bound rule takes critical components with assigned subspace
complexities, groups them by value, keeps the per-value maximum and sums.
Closed forms: k(r-1)+1 for products of k odd spheres (exact against the
reference table), and r+1 for the frame bundle over S^(4m-1), exact because
the fiber S^(4m-2) forces the same lower bound.  The pipeline check feeds
*detected* critical data, with complexity 1 justified by running the planner
on every component, through the same aggregation.
"""
import numpy as np

from lsnav import (
    BoundInput,
    Sphere,
    find_critical_components,
    ls_upper_bound,
    nav_field,
    product_spheres_bound,
    unit_tangent_bound,
)
from lsnav.bounds import bound_input_from_components
from lsnav.manifolds import random_points

print("== closed forms ==")
for k in (1, 2, 3):
    row = [product_spheres_bound(k, r).bound for r in range(2, 7)]
    print(f"  k={k} odd-sphere factors, r=2..6: {row}")
for m in (1, 2, 3):
    row = [unit_tangent_bound(m, r).bound for r in range(2, 7)]
    print(f"  frame bundle over S^{4*m-1},  r=2..6: {row} (all exact)")

print("\n== breakdown for the frame bundle, r = 4 ==")
print(unit_tangent_bound(1, 4).table())

print("\n== pipeline: detected critical data -> same numbers ==")
rng = np.random.default_rng(0)
field = nav_field(Sphere(1), 2)
comps = find_critical_components(field, random_points(field.spec, 150, rng))
inp = bound_input_from_components(comps, complexity=1)
print(f"  detected values {[round(c.value, 5) for c in comps]} -> "
      f"bound {ls_upper_bound(inp).bound} "
      f"(closed form {product_spheres_bound(1, 2).bound})")

signs = BoundInput.fiber_signs(r=3, complexity=1)
print(f"  sign tuples for r=3 -> bound {ls_upper_bound(signs).bound} "
      f"(closed form {unit_tangent_bound(1, 3).bound})")
