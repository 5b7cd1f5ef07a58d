"""Embedded manifolds: descriptors, projections, tangent spaces.

Walks through the supported manifold kinds, projects ambient points onto
them, projects vectors onto tangent spaces, and shows the complex and
quaternionic multiplications that power the planners.
"""
import numpy as np

from lsnav import (
    Ellipsoid,
    ProductSpheres,
    Sphere,
    StiefelV2,
    mult_i,
    mult_j,
    project_to_manifold,
    spec_to_json,
    tangent_project,
)
from lsnav.manifolds import constraint_residual, random_points

rng = np.random.default_rng(0)

print("== projections ==")
p = project_to_manifold(Sphere(2), [3.0, 4.0, 0.0])
print("sphere:    (3,4,0) ->", p.coords)

p = project_to_manifold(Ellipsoid((1.0, 2.0, 3.0)), [2.0, 0.0, 0.0])
print("ellipsoid: (2,0,0) ->", p.coords, " (Newton steps along grad g)")

frames = StiefelV2(4)
raw = rng.standard_normal(8)
q = project_to_manifold(frames, raw)
print("frames:    random 4x2 ->", np.round(q.coords, 4), " residual", q.residual)

print("\n== tangent projection ==")
base = project_to_manifold(Sphere(1), [1.0, 0.0])
v = tangent_project(base, [1.0, 1.0])
print("at e1, project e1+e2 ->", v.vec, " (radial part removed)")

print("\n== product manifolds concatenate factor coordinates ==")
prod = ProductSpheres((1, 3))
pts = random_points(prod, 3, rng)
print("3 random points on S^1 x S^3, residuals:",
      constraint_residual(prod, pts))
print("JSON form:", spec_to_json(prod))

print("\n== the multiplication maps ==")
x = np.array([1.0, 0.0, 0.0, 0.0])
print("i * e1 =", mult_i(x), "  (pairwise rotation; i^2 = -id)")
print("j * e1 =", mult_j(x), "  (orthogonal to both x and i x)")
y = rng.standard_normal(8)
print("random y in R^8: <y, iy> =", float(np.dot(y, mult_i(y))),
      " <iy, jy> =", float(np.dot(mult_i(y), mult_j(y))))
