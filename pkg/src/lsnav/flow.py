"""Pseudo-gradient flows and critical-component detection.

The pseudo-gradient of a C^1 field F is X = grad F / rho(|grad F|), with rho
the C^1 ramp that is 1 below 1 and the identity above 2.  It satisfies
|X| <= 2 min(|grad F|, 1) and DF(X) >= min(|grad F|, |grad F|^2), so the
negative flow is a strict Lyapunov descent away from critical points.

Flows integrate with fixed-step RK4 and re-projection onto the manifold after
every stage.  Seed batches are vectorized; detection clusters converged
endpoints by value, then by structural label or point distance.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import manifolds as mf
from .errors import NegativeInput, NoConvergedSeeds
from .manifolds import PointOnM, TangentVector


def rho(s):
    """Ramp used to normalize large gradients.

    1 on [0, 1], identity on [2, inf); on [1, 2] the C^1 Hermite blend
    rho(1+t) = 1 + 2 t^2 - t^3, which is monotone and satisfies rho(s) <= s.
    """
    s = np.asarray(s, dtype=float)
    if (s < 0).any():
        raise NegativeInput("rho is defined for nonnegative arguments")
    t = s - 1.0
    blend = 1.0 + 2.0 * t**2 - t**3
    out = np.where(s <= 1.0, 1.0, np.where(s >= 2.0, s, blend))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass
class FlowConfig:
    step: float = 1e-2
    max_time: float = 200.0
    grad_tol: float = 1e-8
    cluster_tol: float = 1e-4

    def __post_init__(self):
        if min(self.step, self.max_time, self.grad_tol, self.cluster_tol) <= 0:
            raise ValueError("all flow parameters must be strictly positive")
        if not self.step < self.max_time:
            raise ValueError("step must be smaller than max_time")


@dataclass(eq=False)
class ScalarField:
    """A scalar field on a manifold with an ambient (Euclidean) gradient.

    ``value`` and ``euclidean_gradient`` take coordinate arrays of shape
    (..., ambient_dim) and broadcast.  When no analytic gradient is given,
    central finite differences with step 1e-6 * (1 + |x|) are used.
    ``classifier`` optionally maps a critical point to a structural label.
    """

    spec: mf.ManifoldSpec
    value: Callable[[np.ndarray], np.ndarray]
    euclidean_gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""
    classifier: Optional[Callable[[np.ndarray], Optional[str]]] = None
    fd_scale: float = 1e-6

    def value_at(self, coords):
        return np.asarray(self.value(np.asarray(coords, dtype=float)), dtype=float)

    def euclidean_gradient_at(self, coords):
        coords = np.asarray(coords, dtype=float)
        if self.euclidean_gradient is not None:
            return np.asarray(self.euclidean_gradient(coords), dtype=float)
        return self.fd_gradient(coords)

    def fd_gradient(self, coords):
        """Central finite differences of ``value``, step 1e-6 * (1 + |x|)."""
        coords = np.asarray(coords, dtype=float)
        h = self.fd_scale * (1.0 + np.linalg.norm(coords, axis=-1))
        grad = np.empty_like(coords)
        for k in range(coords.shape[-1]):
            plus = coords.copy()
            minus = coords.copy()
            plus[..., k] += h
            minus[..., k] -= h
            grad[..., k] = (self.value_at(plus) - self.value_at(minus)) / (2.0 * h)
        return grad

    def riemannian_gradient(self, coords):
        """Tangent projection of the ambient gradient (induced metric)."""
        coords = np.asarray(coords, dtype=float)
        return mf.project_tangent(self.spec, coords, self.euclidean_gradient_at(coords))

    def gradient_norm(self, coords):
        return np.linalg.norm(self.riemannian_gradient(coords), axis=-1)


def pseudo_gradient_coords(field: ScalarField, coords):
    """Array form of the pseudo-gradient X = grad F / rho(|grad F|)."""
    grad = field.riemannian_gradient(coords)
    gn = np.linalg.norm(grad, axis=-1)
    h = 1.0 / rho(gn)
    return np.asarray(h)[..., None] * grad


def pseudo_gradient(field: ScalarField, p: PointOnM) -> TangentVector:
    """Pseudo-gradient at a point, as a tangent vector."""
    vec = pseudo_gradient_coords(field, p.coords)
    return TangentVector(p, vec)


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

def _rk4_step(vfield, project, x, h):
    k1 = vfield(x)
    k2 = vfield(project(x + 0.5 * h * k1))
    k3 = vfield(project(x + 0.5 * h * k2))
    k4 = vfield(project(x + h * k3))
    return project(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def _flow_batch(vfield, project, grad_norm, starts, cfg: FlowConfig):
    """Flow a batch until grad_norm <= grad_tol per row or max_time elapses.

    Returns (endpoints, final gradient norms, converged mask).
    """
    x = project(np.array(starts, dtype=float))
    n = x.shape[0]
    active = np.ones(n, dtype=bool)
    gn = np.asarray(grad_norm(x), dtype=float)
    active &= gn > cfg.grad_tol
    t = 0.0
    while active.any() and t < cfg.max_time:
        h = min(cfg.step, cfg.max_time - t)
        x[active] = _rk4_step(vfield, project, x[active], h)
        t += h
        gn[active] = grad_norm(x[active])
        active = active & (gn > cfg.grad_tol)
    return x, gn, gn <= cfg.grad_tol


@dataclass(eq=False)
class FlowTrace:
    """Time series produced by a single negative pseudo-gradient flow."""

    times: np.ndarray
    coords: np.ndarray
    values: np.ndarray
    grad_norms: np.ndarray
    spec: mf.ManifoldSpec

    @property
    def points(self):
        return [PointOnM(c, self.spec) for c in self.coords]

    def max_value_increase(self) -> float:
        """Largest Lyapunov violation along the trace (0 for monotone descent)."""
        if len(self.values) < 2:
            return 0.0
        return float(np.max(np.diff(self.values), initial=0.0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        d = self.coords.shape[1]
        writer.writerow(["t"] + [f"x{k}" for k in range(d)] + ["F", "gradnorm"])
        for i in range(len(self.times)):
            writer.writerow(
                [repr(float(self.times[i]))]
                + [repr(float(v)) for v in self.coords[i]]
                + [repr(float(self.values[i])), repr(float(self.grad_norms[i]))]
            )
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "schema": "v1",
            "manifold": mf.spec_to_json(self.spec),
            "times": [float(t) for t in self.times],
            "points": [[float(v) for v in row] for row in self.coords],
            "values": [float(v) for v in self.values],
            "grad_norms": [float(g) for g in self.grad_norms],
        }


def integrate_flow(field: ScalarField, start: PointOnM, cfg: FlowConfig = None,
                   direction: int = -1) -> FlowTrace:
    """Integrate the flow of direction * pseudo-gradient from a single point.

    Fixed-step RK4 with projection after every stage; terminates once the
    gradient norm falls below cfg.grad_tol or max_time is reached.
    """
    cfg = cfg or FlowConfig()

    def vfield(x):
        return direction * pseudo_gradient_coords(field, x)

    def project(x):
        return mf.project_points(field.spec, x)

    x = project(start.coords[None, :].copy())
    times = [0.0]
    coords = [x[0].copy()]
    t = 0.0
    gn = float(field.gradient_norm(x)[0])
    gns = [gn]
    while gn > cfg.grad_tol and t < cfg.max_time:
        h = min(cfg.step, cfg.max_time - t)
        x = _rk4_step(vfield, project, x, h)
        t += h
        gn = float(field.gradient_norm(x)[0])
        times.append(t)
        coords.append(x[0].copy())
        gns.append(gn)
    coords = np.array(coords)
    return FlowTrace(
        times=np.array(times),
        coords=coords,
        values=field.value_at(coords),
        grad_norms=np.array(gns),
        spec=field.spec,
    )


def flow_endpoints(field: ScalarField, starts, cfg: FlowConfig = None, direction: int = -1):
    """Batched flow; returns (endpoints, gradient norms, converged mask)."""
    cfg = cfg or FlowConfig()

    def vfield(x):
        return direction * pseudo_gradient_coords(field, x)

    def project(x):
        return mf.project_points(field.spec, x)

    return _flow_batch(vfield, project, field.gradient_norm, starts, cfg)


def time_one_map(field: ScalarField, starts, cfg: FlowConfig = None):
    """Time-1 map of the negative pseudo-gradient flow, batched.

    Integrates for exactly unit time with n = round(1/step) equal RK4 steps.
    """
    cfg = cfg or FlowConfig()

    def vfield(x):
        return -pseudo_gradient_coords(field, x)

    def project(x):
        return mf.project_points(field.spec, x)

    x = project(np.array(starts, dtype=float))
    n = max(1, int(round(1.0 / cfg.step)))
    h = 1.0 / n
    for _ in range(n):
        x = _rk4_step(vfield, project, x, h)
    return x


# ---------------------------------------------------------------------------
# Critical components
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class CriticalComponent:
    """A detected critical component: value, representative points, structural label."""

    value: float
    representatives: np.ndarray
    label: str = "unclassified"
    spec: mf.ManifoldSpec = None

    @property
    def points(self):
        return [PointOnM(c, self.spec) for c in self.representatives]

    def to_json(self) -> dict:
        return {
            "value": float(self.value),
            "label": self.label,
            "n_representatives": int(self.representatives.shape[0]),
            "representative": [float(v) for v in self.representatives[0]],
        }


def components_to_json(components) -> dict:
    return {
        "schema": "v1",
        "values": [float(c.value) for c in components],
        "components": [c.to_json() for c in components],
    }


def _split_by_gaps(sorted_vals, gap):
    cuts = np.flatnonzero(np.diff(sorted_vals) > gap)
    return np.split(np.arange(len(sorted_vals)), cuts + 1)


def _distance_clusters(points, threshold):
    """Single-linkage clusters of rows of points at the given threshold."""
    n = points.shape[0]
    labels = -np.ones(n, dtype=int)
    current = 0
    for i in range(n):
        if labels[i] >= 0:
            continue
        stack = [i]
        labels[i] = current
        while stack:
            j = stack.pop()
            dist = np.linalg.norm(points - points[j], axis=-1)
            near = np.flatnonzero((dist <= threshold) & (labels < 0))
            labels[near] = current
            stack.extend(near.tolist())
        current += 1
    return labels


def _cluster_endpoints(field, endpoints, cfg, point_merge_dist):
    values = field.value_at(endpoints)
    order = np.argsort(values, kind="stable")
    endpoints = endpoints[order]
    values = values[order]
    components = []
    for group in _split_by_gaps(values, 10.0 * cfg.cluster_tol):
        pts = endpoints[group]
        vals = values[group]
        if field.classifier is not None:
            labels = []
            for p in pts:
                try:
                    lab = field.classifier(p)
                except Exception:
                    lab = None
                labels.append(lab if lab is not None else "unclassified")
            labels = np.array(labels, dtype=object)
            for lab in sorted(set(labels.tolist())):
                sel = labels == lab
                components.append((float(np.mean(vals[sel])), pts[sel], str(lab)))
        else:
            cl = _distance_clusters(pts, point_merge_dist)
            for c in range(cl.max() + 1):
                sel = cl == c
                components.append((float(np.mean(vals[sel])), pts[sel], "unclassified"))
    out = []
    for val, pts, lab in components:
        key = np.lexsort(pts.T[::-1])
        out.append(CriticalComponent(val, pts[key], lab, field.spec))
    out.sort(key=lambda c: (c.value, c.label))
    return out


def detect_critical(field: ScalarField, seeds, cfg: FlowConfig = None,
                    direction: int = -1, point_merge_dist: float = 0.5):
    """Flow every seed and cluster the converged endpoints into components.

    Endpoints with gradient norm above cfg.grad_tol are discarded; values are
    grouped when separated by gaps larger than 10 * cluster_tol, then split by
    the field's structural classifier (or by point distance when none is set).
    Raises NoConvergedSeeds when no flow converges, which at the numerical
    level signals Palais-Smale trouble.
    """
    cfg = cfg or FlowConfig()
    seeds = _as_coords(seeds)
    if seeds.shape[0] == 0:
        raise NoConvergedSeeds("seed set is empty")
    endpoints, gn, converged = flow_endpoints(field, seeds, cfg, direction)
    if not converged.any():
        raise NoConvergedSeeds(
            f"no seed reached gradient norm {cfg.grad_tol} within time {cfg.max_time}"
        )
    return _cluster_endpoints(field, endpoints[converged], cfg, point_merge_dist)


def _as_coords(seeds):
    if isinstance(seeds, np.ndarray):
        return np.atleast_2d(np.asarray(seeds, dtype=float))
    return np.atleast_2d(np.array([p.coords for p in seeds], dtype=float))


# ---------------------------------------------------------------------------
# Newton refinement (finds components of every index, including saddles)
# ---------------------------------------------------------------------------

def newton_critical_search(field: ScalarField, seeds, *, tol: float = 1e-10,
                           max_iter: int = 80, fd_step: float = 1e-7):
    """Multistart damped Newton on the projected gradient G(x) = 0.

    Unlike descent flows, whose generic trajectories only reach extremal
    components, Newton iterations converge to critical points of any index.
    Jacobians of G (composed with the manifold projection) are taken by
    central differences; Levenberg-Marquardt damping with a step cap keeps
    the iteration stable where the covariant Hessian degenerates.
    Returns the converged points as an array (possibly empty).
    """
    from .numerics import levenberg_marquardt

    x = mf.project_points(field.spec, _as_coords(seeds))
    d = x.shape[-1]

    def residual(pts):
        return field.riemannian_gradient(pts)

    def jacobian(pts):
        h = fd_step * (1.0 + np.linalg.norm(pts, axis=-1))
        jac = np.empty(pts.shape + (d,))
        for k in range(d):
            plus = pts.copy()
            minus = pts.copy()
            plus[:, k] += h
            minus[:, k] -= h
            jac[:, :, k] = (
                residual(mf.project_points(field.spec, plus))
                - residual(mf.project_points(field.spec, minus))
            ) / (2.0 * h)[:, None]
        return jac

    def retract(pts):
        return mf.project_points(field.spec, pts)

    z, rn = levenberg_marquardt(residual, jacobian, x, tol=tol,
                                max_iter=max_iter, retract=retract)
    return z[rn <= tol]


def find_critical_components(field: ScalarField, seeds, cfg: FlowConfig = None,
                             *, bidirectional: bool = True, newton: bool = True,
                             point_merge_dist: float = 0.5):
    """Full detection pipeline: descent flow, ascent flow, Newton refinement.

    Candidate endpoints from every stage are handed to detect_critical as
    seeds (already-critical seeds terminate immediately), so clustering and
    labeling are uniform.
    """
    cfg = cfg or FlowConfig()
    seeds = _as_coords(seeds)
    candidates = []
    end, _gn, conv = flow_endpoints(field, seeds, cfg, direction=-1)
    candidates.append(end[conv])
    if bidirectional:
        end, _gn, conv = flow_endpoints(field, seeds, cfg, direction=+1)
        candidates.append(end[conv])
    if newton:
        candidates.append(newton_critical_search(field, seeds, tol=min(cfg.grad_tol, 1e-10)))
    pool = np.vstack([c for c in candidates if c.shape[0]])
    if pool.shape[0] == 0:
        raise NoConvergedSeeds("no stage of the detection pipeline converged")
    return detect_critical(field, pool, cfg, point_merge_dist=point_merge_dist)


# ---------------------------------------------------------------------------
# Descent diagnostic (strict Lyapunov decrease of the time-1 map)
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class DescentReport:
    n_samples: int
    n_noncritical: int
    min_decrement: float
    argmin_coords: Optional[np.ndarray]
    all_positive: bool
    decrements: np.ndarray = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "schema": "v1",
            "n_samples": self.n_samples,
            "n_noncritical": self.n_noncritical,
            "min_decrement": float(self.min_decrement) if self.n_noncritical else None,
            "all_positive": bool(self.all_positive),
        }


def descent_diagnostic(field: ScalarField, samples, cfg: FlowConfig = None) -> DescentReport:
    """Check F(x) - F(phi_1(x)) > 0 on samples away from the critical set.

    Samples whose gradient norm is at or below grad_tol count as fixed points
    and are excluded from the positivity assertion.  Reports the minimum
    observed decrement and the sample attaining it.
    """
    cfg = cfg or FlowConfig()
    x = _as_coords(samples)
    gn = field.gradient_norm(x)
    noncrit = gn > cfg.grad_tol
    phi1 = time_one_map(field, x, cfg)
    dec = field.value_at(x) - field.value_at(phi1)
    if noncrit.any():
        sub = dec[noncrit]
        k = int(np.argmin(sub))
        min_dec = float(sub[k])
        argmin = x[noncrit][k]
        all_pos = bool((sub > 0).all())
    else:
        min_dec = 0.0
        argmin = None
        all_pos = True
    return DescentReport(
        n_samples=x.shape[0],
        n_noncritical=int(noncrit.sum()),
        min_decrement=min_dec,
        argmin_coords=argmin,
        all_positive=all_pos,
        decrements=dec,
    )


# ---------------------------------------------------------------------------
# Simple built-in fields
# ---------------------------------------------------------------------------

def height_field(spec, axis: int = -1) -> ScalarField:
    """Coordinate height function f(x) = x[axis]."""
    d = spec.ambient_dim
    axis = axis % d

    def value(x):
        return np.asarray(x, dtype=float)[..., axis]

    def grad(x):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        g[..., axis] = 1.0
        return g

    return ScalarField(spec, value, grad, name=f"height(axis={axis})")
