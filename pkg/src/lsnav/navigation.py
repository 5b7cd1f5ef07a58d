"""Chained-distance navigation functions and their critical structure.

The r-point navigation function on an embedded manifold M is
F(x_1,...,x_r) = sum |x_i - x_{i+1}|^2.  It vanishes exactly on the diagonal,
and on spheres and products of spheres its critical tuples are exactly those
with every slot equal to plus or minus the first slot, factorwise.  The value
of a critical tuple is 4 per consecutive sign change, summed over factors.

Also here: the multistart search for pairs (x, y) on a compact hypersurface
with a common tangent plane perpendicular to the chord, whose count bounds
the topological complexity of the surface from below.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from . import manifolds as mf
from .errors import (
    InvalidPoint,
    NoPairsFound,
    NotCriticalTuple,
    WrongSpec,
)
from .flow import ScalarField
from .manifolds import (
    Ellipsoid,
    ImplicitHypersurface,
    PointOnM,
    ProductSpheres,
    Sphere,
    TangentVector,
)


# ---------------------------------------------------------------------------
# Tuples on M^r
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NavTuple:
    """An r-tuple of points on a common manifold, stored as an (r, d) array."""

    spec: mf.ManifoldSpec
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.spec.ambient_dim:
            raise InvalidPoint("points must be an (r, ambient_dim) array")
        if pts.shape[0] < 2:
            raise InvalidPoint("navigation tuples need r >= 2 slots")
        res = mf.constraint_residual(self.spec, pts)
        if not (res <= mf.POINT_TOL).all():
            raise InvalidPoint(f"tuple slot violates constraint ({res.max():.3e})")
        object.__setattr__(self, "points", pts)

    @property
    def r(self) -> int:
        return self.points.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return self.points.reshape(-1)

    def point(self, i: int) -> PointOnM:
        return PointOnM(self.points[i], self.spec)

    @classmethod
    def from_flat(cls, spec, r: int, flat) -> "NavTuple":
        flat = np.asarray(flat, dtype=float).reshape(r, -1)
        return cls(spec, flat)

    def to_json(self) -> dict:
        return {
            "manifold": mf.spec_to_json(self.spec),
            "points": [[float(v) for v in row] for row in self.points],
        }


def power_spec(spec, r: int):
    """The manifold M^r as a product-of-spheres spec (slot-major layout)."""
    if isinstance(spec, Sphere):
        return ProductSpheres((spec.dim,) * r)
    if isinstance(spec, ProductSpheres):
        return ProductSpheres(spec.dims * r)
    if isinstance(spec, mf.Euclidean):
        return mf.Euclidean(spec.dim * r)
    raise WrongSpec("power spec is only defined for spheres and their products")


# ---------------------------------------------------------------------------
# Values and gradients
# ---------------------------------------------------------------------------

def _chain_value(pts):
    diff = pts[..., :-1, :] - pts[..., 1:, :]
    return np.sum(diff * diff, axis=(-2, -1))


def _chain_euclidean_gradient(pts):
    diff = pts[..., :-1, :] - pts[..., 1:, :]
    grad = np.zeros_like(pts)
    grad[..., :-1, :] += 2.0 * diff
    grad[..., 1:, :] -= 2.0 * diff
    return grad


def nav_value(t: NavTuple) -> float:
    """Sum of squared consecutive Euclidean distances; zero iff diagonal."""
    return float(_chain_value(t.points))


def nav_gradient(t: NavTuple):
    """Factor-wise tangent projections of the chain gradient, one per slot."""
    grad = _chain_euclidean_gradient(t.points)
    out = []
    for i in range(t.r):
        vec = mf.project_tangent(t.spec, t.points[i], grad[i])
        out.append(TangentVector(t.point(i), vec))
    return out


def nav_field(spec, r: int) -> ScalarField:
    """The navigation function as a scalar field on M^r (flat coordinates)."""
    pspec = power_spec(spec, r)
    d = spec.ambient_dim

    def value(x):
        x = np.asarray(x, dtype=float)
        return _chain_value(x.reshape(x.shape[:-1] + (r, d)))

    def grad(x):
        x = np.asarray(x, dtype=float)
        g = _chain_euclidean_gradient(x.reshape(x.shape[:-1] + (r, d)))
        return g.reshape(x.shape)

    classifier = None
    if isinstance(spec, (Sphere, ProductSpheres)):
        def classifier(coords):
            t = NavTuple.from_flat(spec, r, coords)
            try:
                return classify_sphere_critical(t, tol=1e-4).label
            except NotCriticalTuple:
                return None

    return ScalarField(pspec, value, grad, name=f"nav(r={r})", classifier=classifier)


# ---------------------------------------------------------------------------
# Sign patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignPattern:
    """Per-factor, per-slot signs of a critical tuple; the first slot is +1."""

    signs: tuple

    def __post_init__(self):
        signs = tuple(tuple(int(s) for s in factor) for factor in self.signs)
        object.__setattr__(self, "signs", signs)
        if not signs or any(len(f) < 2 for f in signs):
            raise ValueError("pattern needs at least one factor and two slots")
        if any(f[0] != 1 for f in signs):
            raise ValueError("slot 1 is +1 by convention")
        if any(s not in (-1, 1) for f in signs for s in f):
            raise ValueError("signs must be +1 or -1")

    @property
    def n_factors(self) -> int:
        return len(self.signs)

    @property
    def r(self) -> int:
        return len(self.signs[0])

    @property
    def flips(self) -> tuple:
        """Per-factor count of consecutive sign changes along the slots."""
        return tuple(
            sum(1 for a, b in zip(f, f[1:]) if a != b) for f in self.signs
        )

    @property
    def label(self) -> str:
        return "|".join("".join("+" if s == 1 else "-" for s in f) for f in self.signs)


def pattern_value(p: SignPattern) -> float:
    """Navigation value of a tuple realizing the pattern: 4 per sign change."""
    return 4.0 * sum(p.flips)


def classify_sphere_critical(t: NavTuple, tol: float = 1e-9) -> SignPattern:
    """Accept a tuple iff every slot of every factor is within tol of +-(slot 1).

    Rejected tuples are certified noncritical: NotCriticalTuple carries the
    norm of the projected gradient, which is the value of the differential
    along the normalized gradient direction.
    """
    if not isinstance(t.spec, (Sphere, ProductSpheres)):
        raise WrongSpec("structural classification needs a sphere or product of spheres")
    blocks = mf.sphere_blocks(t.spec)
    signs = []
    ok = True
    for s, e in blocks:
        x1 = t.points[0, s:e]
        factor = [1]
        for i in range(1, t.r):
            xi = t.points[i, s:e]
            d_plus = np.linalg.norm(xi - x1)
            d_minus = np.linalg.norm(xi + x1)
            if d_plus <= tol:
                factor.append(1)
            elif d_minus <= tol:
                factor.append(-1)
            else:
                ok = False
                break
        if not ok:
            break
        signs.append(tuple(factor))
    if ok:
        return SignPattern(tuple(signs))
    grad = np.concatenate([g.vec for g in nav_gradient(t)])
    witness = float(np.linalg.norm(grad))
    direction = grad / witness if witness > 0 else grad
    raise NotCriticalTuple(
        f"tuple is not of the +-x1 form; |DF| along the gradient direction is {witness:.3e}",
        witness=witness,
        direction=direction,
    )


def critical_tuple(spec, pattern: SignPattern, base: np.ndarray) -> NavTuple:
    """The critical tuple realizing a sign pattern over a base point of M."""
    blocks = mf.sphere_blocks(spec)
    if len(blocks) != pattern.n_factors:
        raise WrongSpec("pattern factor count does not match the manifold")
    base = np.asarray(base, dtype=float)
    pts = np.tile(base, (pattern.r, 1))
    for (s, e), factor in zip(blocks, pattern.signs):
        for i, sign in enumerate(factor):
            pts[i, s:e] = sign * base[s:e]
    return NavTuple(spec, pts)


def random_critical_tuple(spec, r: int, rng: np.random.Generator) -> NavTuple:
    """Random base point and random sign pattern (slot 1 fixed at +1)."""
    base = mf.random_points(spec, 1, rng)[0]
    signs = tuple(
        (1,) + tuple(int(s) for s in rng.choice([-1, 1], size=r - 1))
        for _ in mf.sphere_blocks(spec)
    )
    return critical_tuple(spec, SignPattern(signs), base)


# ---------------------------------------------------------------------------
# Parallel-pair search on hypersurfaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairSearchConfig:
    n_seeds: int = 10000
    rng_seed: int = 0
    max_iter: int = 80
    residual_tol: float = 1e-11
    dedup_tol: float = 1e-3
    min_separation: float = 1e-3
    continuum_threshold: int = 50


@dataclass(frozen=True, eq=False)
class CriticalPair:
    """An unordered pair {x, y} with aligned normals perpendicular to the chord."""

    x: np.ndarray
    y: np.ndarray
    value: float
    alignment_residual: float

    def to_json(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "y": [float(v) for v in self.y],
            "value": float(self.value),
            "alignment_residual": float(self.alignment_residual),
        }


@dataclass(eq=False)
class PairCensus:
    """Deduplicated critical pairs and the resulting count (or continuum flag)."""

    pairs: list
    alpha: object
    n_converged: int
    nn_distance: Optional[float] = None

    @property
    def is_continuum(self) -> bool:
        return self.alpha == "continuum"

    def to_json(self) -> dict:
        return {
            "schema": "v1",
            "alpha": self.alpha,
            "n_converged": self.n_converged,
            "nn_distance": self.nn_distance,
            "pairs": [p.to_json() for p in self.pairs],
        }


def _hypersurface_of(spec):
    if isinstance(spec, Sphere):
        # the unit sphere is the unit-ellipsoid special case
        return mf.Ellipsoid((1.0,) * spec.ambient_dim)
    if isinstance(spec, (Ellipsoid, ImplicitHypersurface)):
        return spec
    raise WrongSpec("parallel-pair search needs a hypersurface (ellipsoid, implicit, sphere)")


def pair_system_residual(fld, level, z):
    """Residual of the parallel-pair system at z = (x, y), vectorized.

    Components: g(x) - level, g(y) - level, then the 2x2 minors of
    (grad g(x), d) and (grad g(y), d) with d the normalized chord.  Minors
    avoid Lagrange multipliers at the cost of redundancy, handled by
    least-squares steps.
    """
    z = np.asarray(z, dtype=float)
    n = z.shape[-1] // 2
    x, y = z[..., :n], z[..., n:]
    chord = x - y
    dist = np.linalg.norm(chord, axis=-1, keepdims=True)
    d = chord / np.maximum(dist, 1e-12)
    gx = fld.grad(x)
    gy = fld.grad(y)
    parts = [fld.value(x) - level, fld.value(y) - level]
    for u in (gx, gy):
        for a, b in combinations(range(n), 2):
            parts.append(u[..., a] * d[..., b] - u[..., b] * d[..., a])
    return np.stack(parts, axis=-1)


def pair_system_jacobian(fld, level, z):
    """Analytic Jacobian of pair_system_residual with respect to (x, y)."""
    z = np.asarray(z, dtype=float)
    n = z.shape[-1] // 2
    x, y = z[..., :n], z[..., n:]
    chord = x - y
    dist = np.linalg.norm(chord, axis=-1, keepdims=True)
    dist = np.maximum(dist, 1e-12)
    d = chord / dist
    # derivative of the normalized chord: (I - d d^T)/|x-y| wrt x, negated wrt y
    eye = np.eye(n)
    dd_dx = (eye - d[..., :, None] * d[..., None, :]) / dist[..., None]
    gx = fld.grad(x)
    gy = fld.grad(y)
    hx = fld.hess(x)
    hy = fld.hess(y)
    m = 2 + 2 * (n * (n - 1) // 2)
    jac = np.zeros(z.shape[:-1] + (m, 2 * n))
    jac[..., 0, :n] = gx
    jac[..., 1, n:] = gy
    row = 2
    for a, b in combinations(range(n), 2):
        # minor of (grad g(x), d)
        jac[..., row, :n] = (
            hx[..., a, :] * d[..., b, None]
            - hx[..., b, :] * d[..., a, None]
            + gx[..., a, None] * dd_dx[..., b, :]
            - gx[..., b, None] * dd_dx[..., a, :]
        )
        jac[..., row, n:] = -(
            gx[..., a, None] * dd_dx[..., b, :]
            - gx[..., b, None] * dd_dx[..., a, :]
        )
        row += 1
    for a, b in combinations(range(n), 2):
        # minor of (grad g(y), d)
        jac[..., row, n:] = (
            hy[..., a, :] * d[..., b, None]
            - hy[..., b, :] * d[..., a, None]
            - (gy[..., a, None] * dd_dx[..., b, :] - gy[..., b, None] * dd_dx[..., a, :])
        )
        jac[..., row, :n] = (
            gy[..., a, None] * dd_dx[..., b, :]
            - gy[..., b, None] * dd_dx[..., a, :]
        )
        row += 1
    return jac


def _gauss_newton_pairs(fld, level, z0, cfg: PairSearchConfig):
    from .numerics import levenberg_marquardt

    return levenberg_marquardt(
        lambda z: pair_system_residual(fld, level, z),
        lambda z: pair_system_jacobian(fld, level, z),
        z0,
        tol=cfg.residual_tol,
        max_iter=cfg.max_iter,
    )


def _alignment_residual(fld, x, y):
    """Relative norm of the normal components orthogonal to the chord."""
    d = (x - y) / np.linalg.norm(x - y, axis=-1, keepdims=True)
    out = np.zeros(x.shape[:-1])
    for p in (x, y):
        g = fld.grad(p)
        perp = g - np.sum(g * d, axis=-1, keepdims=True) * d
        out = np.maximum(
            out, np.linalg.norm(perp, axis=-1) / np.linalg.norm(g, axis=-1)
        )
    return out


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("LSNAV_THREADS", "1")))
    except ValueError:
        return 1


def _run_chunked(fn, arr, workers):
    if workers <= 1 or arr.shape[0] < 2 * workers:
        return fn(arr)
    from concurrent.futures import ThreadPoolExecutor

    chunks = np.array_split(arr, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(fn, chunks))
    return tuple(np.concatenate(parts) for parts in zip(*results))


def find_parallel_pairs(spec, search: PairSearchConfig = None) -> PairCensus:
    """Multistart damped Newton for pairs with a common tangent plane.

    Seeds are random surface points paired up; converged solutions are
    deduplicated as unordered pairs at the dedup threshold.  When the
    deduplicated pairs exceed the continuum threshold they form a curve or
    larger family and the census reports a continuum instead of a count.
    """
    search = search or PairSearchConfig()
    surf = _hypersurface_of(spec)
    fld, level = surf.field, surf.level
    rng = np.random.default_rng(search.rng_seed)
    pts = mf.random_points(surf, 2 * search.n_seeds, rng)
    z0 = np.concatenate([pts[: search.n_seeds], pts[search.n_seeds:]], axis=1)
    # drop nearly coincident seed pairs, the diagonal is a spurious solution set
    sep = np.linalg.norm(z0[:, : fld.ambient_dim] - z0[:, fld.ambient_dim:], axis=-1)
    z0 = z0[sep > 10 * search.min_separation]

    solve = lambda chunk: _gauss_newton_pairs(fld, level, chunk, search)
    z, rn = _run_chunked(solve, z0, _worker_count())

    n = fld.ambient_dim
    good = rn <= search.residual_tol
    x, y = z[good, :n], z[good, n:]
    sep = np.linalg.norm(x - y, axis=-1)
    keep = sep >= search.min_separation
    x, y = x[keep], y[keep]
    n_converged = int(keep.sum())
    if n_converged == 0:
        raise NoPairsFound("no admissible pair converged; try more seeds")

    # canonical order inside each unordered pair (on rounded coordinates so
    # solver noise cannot flip it), then greedy dedup against both orders
    grid = 0.1 * search.dedup_tol
    xr = np.round(x / grid).astype(int)
    yr = np.round(y / grid).astype(int)
    swap = np.array([tuple(a) > tuple(b) for a, b in zip(xr, yr)])
    x[swap], y[swap] = y[swap].copy(), x[swap].copy()
    cand = np.concatenate([x, y], axis=1)
    order = np.lexsort(cand.T[::-1])
    cand = cand[order]
    kept = []
    kept_swapped = []
    cap = 4 * search.continuum_threshold
    for row in cand:
        if kept:
            dist = np.linalg.norm(np.array(kept) - row, axis=-1)
            dist_sw = np.linalg.norm(np.array(kept_swapped) - row, axis=-1)
            if (np.minimum(dist, dist_sw) <= search.dedup_tol).any():
                continue
        kept.append(row)
        kept_swapped.append(np.concatenate([row[n:], row[:n]]))
        if len(kept) > cap:
            break
    reps = np.array(kept)

    nn = None
    if reps.shape[0] > 1:
        sub = reps[: 256]
        dmat = np.linalg.norm(sub[:, None, :] - sub[None, :, :], axis=-1)
        np.fill_diagonal(dmat, np.inf)
        nn = float(dmat.min())

    if reps.shape[0] > search.continuum_threshold:
        return PairCensus(pairs=[], alpha="continuum", n_converged=n_converged,
                          nn_distance=nn)

    pairs = []
    for row in reps:
        px, py = row[:n], row[n:]
        val = float(np.sum((px - py) ** 2))
        ares = float(_alignment_residual(fld, px[None], py[None])[0])
        pairs.append(CriticalPair(px, py, val, ares))
    pairs.sort(key=lambda p: (p.value, tuple(p.x), tuple(p.y)))
    return PairCensus(pairs=pairs, alpha=len(pairs), n_converged=n_converged,
                      nn_distance=nn)
