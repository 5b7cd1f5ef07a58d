import numpy as np
import pytest

from lsnav.errors import NegativeInput, NoConvergedSeeds
from lsnav.flow import (
    FlowConfig,
    ScalarField,
    descent_diagnostic,
    detect_critical,
    find_critical_components,
    flow_endpoints,
    height_field,
    integrate_flow,
    newton_critical_search,
    pseudo_gradient,
    pseudo_gradient_coords,
    rho,
)
from lsnav.manifolds import PointOnM, ProductSpheres, Sphere, project_to_manifold, random_points
from lsnav.navigation import nav_field


def test_rho_branches():
    assert rho(0.5) == 1.0
    assert rho(4.0) == 4.0
    # Hermite blend at 1.5: 1 + 2 (0.5)^2 - (0.5)^3
    assert abs(rho(1.5) - 1.375) < 1e-15
    with pytest.raises(NegativeInput):
        rho(-0.1)


def test_rho_monotone_and_below_identity():
    s = np.linspace(0.0, 3.0, 20001)
    vals = rho(s)
    assert (np.diff(vals) >= -1e-14).all()
    mid = (s >= 1.0) & (s <= 2.0)
    assert (vals[mid] <= s[mid] + 1e-14).all()
    assert (vals >= 1.0 - 1e-14).all()


def test_pseudo_gradient_small_gradient_branch():
    # gradient norm 0.5 at the equator point: X equals the gradient exactly
    spec = Sphere(2)
    field = ScalarField(spec, lambda x: 0.5 * x[..., 2],
                        lambda x: np.stack([np.zeros_like(x[..., 0]),
                                            np.zeros_like(x[..., 0]),
                                            np.full_like(x[..., 0], 0.5)], axis=-1))
    p = PointOnM(np.array([1.0, 0.0, 0.0]), spec)
    x_vec = pseudo_gradient(field, p).vec
    assert np.allclose(x_vec, [0.0, 0.0, 0.5], atol=1e-14)


def test_pseudo_gradient_large_gradient_branch():
    spec = Sphere(2)
    field = ScalarField(spec, lambda x: 4.0 * x[..., 2],
                        lambda x: np.stack([np.zeros_like(x[..., 0]),
                                            np.zeros_like(x[..., 0]),
                                            np.full_like(x[..., 0], 4.0)], axis=-1))
    p = PointOnM(np.array([1.0, 0.0, 0.0]), spec)
    x_vec = pseudo_gradient(field, p).vec
    assert abs(np.linalg.norm(x_vec) - 1.0) < 1e-14


def test_pseudo_gradient_zero_at_critical():
    spec = Sphere(2)
    field = height_field(spec)
    south = PointOnM(np.array([0.0, 0.0, -1.0]), spec)
    assert np.linalg.norm(pseudo_gradient(field, south).vec) == 0.0


def test_pseudo_gradient_contract_random():
    rng = np.random.default_rng(0)
    field = nav_field(Sphere(2), 2)
    x = random_points(field.spec, 1000, rng)
    grad = field.riemannian_gradient(x)
    gn = np.linalg.norm(grad, axis=-1)
    pg = pseudo_gradient_coords(field, x)
    assert (np.linalg.norm(pg, axis=-1) <= 2.0 * np.minimum(gn, 1.0) + 1e-10).all()
    df = np.sum(grad * pg, axis=-1)
    assert (df >= np.minimum(gn, gn**2) - 1e-10).all()


def test_integrate_flow_stationary_at_critical():
    spec = Sphere(2)
    field = height_field(spec)
    south = PointOnM(np.array([0.0, 0.0, -1.0]), spec)
    trace = integrate_flow(field, south)
    assert np.max(np.linalg.norm(trace.coords - south.coords, axis=1)) <= 1e-9


def test_integrate_flow_height_to_south_pole():
    spec = Sphere(2)
    field = height_field(spec)
    start = project_to_manifold(spec, [0.05, -0.02, 0.998])
    trace = integrate_flow(field, start)
    assert np.linalg.norm(trace.coords[-1] - np.array([0.0, 0.0, -1.0])) <= 1e-6
    assert trace.max_value_increase() <= 1e-10
    # half-step integrator lands at the same endpoint
    half = integrate_flow(field, start, FlowConfig(step=5e-3))
    assert np.linalg.norm(trace.coords[-1] - half.coords[-1]) <= 1e-6


def test_flow_trace_serialization():
    spec = Sphere(2)
    field = height_field(spec)
    start = project_to_manifold(spec, [0.3, 0.1, 0.9])
    trace = integrate_flow(field, start, FlowConfig(max_time=1.0, grad_tol=1e-3))
    csv_text = trace.to_csv()
    assert csv_text.splitlines()[0] == "t,x0,x1,x2,F,gradnorm"
    payload = trace.to_json()
    assert payload["schema"] == "v1"
    assert len(payload["times"]) == len(payload["values"])


def test_detect_critical_s1_pair():
    rng = np.random.default_rng(1)
    field = nav_field(Sphere(1), 2)
    seeds = random_points(field.spec, 100, rng)
    comps = find_critical_components(field, seeds)
    values = sorted(round(c.value, 6) for c in comps)
    assert values == [0.0, 4.0]
    labels = {c.label for c in comps}
    assert labels == {"++", "+-"}


def test_detect_critical_single_diagonal_seed():
    field = nav_field(Sphere(1), 2)
    x = np.array([1.0, 0.0])
    seeds = np.tile(np.concatenate([x, x]), (5, 1))
    comps = detect_critical(field, seeds)
    assert len(comps) == 1
    assert abs(comps[0].value) <= 1e-12


def test_detect_critical_with_newton_refined_seeds():
    # the flow alone cannot reach saddle components (their basins have
    # measure zero); feeding Newton-refined seeds recovers the full set
    rng = np.random.default_rng(2)
    field = nav_field(Sphere(3), 3)
    seeds = random_points(field.spec, 150, rng)
    refined = newton_critical_search(field, seeds)
    end_lo, _, conv_lo = flow_endpoints(field, seeds, direction=-1)
    end_hi, _, conv_hi = flow_endpoints(field, seeds, direction=+1)
    pool = np.vstack([refined, end_lo[conv_lo], end_hi[conv_hi]])
    comps = detect_critical(field, pool)
    values = sorted(set(round(c.value, 5) for c in comps))
    assert values == [0.0, 4.0, 8.0]


def test_detected_values_lie_in_navigation_value_set():
    rng = np.random.default_rng(3)
    field = nav_field(ProductSpheres((1, 1)), 2)
    comps = find_critical_components(field, random_points(field.spec, 150, rng))
    allowed = {0.0, 4.0, 8.0}
    for c in comps:
        assert min(abs(c.value - a) for a in allowed) <= 1e-5


def test_no_converged_seeds():
    spec = Sphere(2)
    field = height_field(spec)
    equator = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    with pytest.raises(NoConvergedSeeds):
        detect_critical(field, equator, FlowConfig(step=1e-2, max_time=0.05,
                                                   grad_tol=1e-12))


def test_step_halving_changes_endpoint_little():
    rng = np.random.default_rng(4)
    field = nav_field(Sphere(1), 2)
    seeds = random_points(field.spec, 20, rng)
    end1, _, conv1 = flow_endpoints(field, seeds, FlowConfig(step=1e-2))
    end2, _, conv2 = flow_endpoints(field, seeds, FlowConfig(step=5e-3))
    assert conv1.all() and conv2.all()
    assert np.max(np.linalg.norm(end1 - end2, axis=1)) <= 1e-6


def test_descent_diagnostic_nav():
    rng = np.random.default_rng(5)
    field = nav_field(Sphere(1), 2)
    report = descent_diagnostic(field, random_points(field.spec, 100, rng))
    assert report.all_positive
    assert report.min_decrement > 0


def test_descent_diagnostic_critical_excluded():
    field = nav_field(Sphere(1), 2)
    x = np.array([1.0, 0.0])
    diag = np.concatenate([x, x])[None, :]
    report = descent_diagnostic(field, diag)
    assert report.n_noncritical == 0
    assert report.all_positive


def test_descent_diagnostic_equator_height():
    spec = Sphere(2)
    field = height_field(spec)
    theta = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    samples = np.stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)], axis=1)
    report = descent_diagnostic(field, samples)
    assert report.all_positive
    assert report.min_decrement > 0


def test_fd_gradient_fallback():
    spec = Sphere(2)
    field = ScalarField(spec, lambda x: np.sum(x**3, axis=-1))
    rng = np.random.default_rng(6)
    pts = random_points(spec, 50, rng)
    fd = field.euclidean_gradient_at(pts)
    exact = 3.0 * pts**2
    rel = np.linalg.norm(fd - exact, axis=1) / np.maximum(np.linalg.norm(exact, axis=1), 1.0)
    assert np.max(rel) <= 1e-5


def test_flow_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(step=-1.0)
    with pytest.raises(ValueError):
        FlowConfig(step=10.0, max_time=5.0)


def test_detect_critical_distance_clustering_without_classifier():
    rng = np.random.default_rng(7)
    spec = Sphere(2)
    field = height_field(spec)
    comps = detect_critical(field, random_points(spec, 30, rng))
    assert len(comps) == 1
    assert abs(comps[0].value + 1.0) <= 1e-6
    assert comps[0].label == "unclassified"


def test_components_json():
    from lsnav.flow import components_to_json

    rng = np.random.default_rng(8)
    field = nav_field(Sphere(1), 2)
    comps = find_critical_components(field, random_points(field.spec, 60, rng))
    payload = components_to_json(comps)
    assert payload["schema"] == "v1"
    assert len(payload["components"]) == len(comps)
    assert all("representative" in c for c in payload["components"])


def test_component_invariants():
    # every representative converged below grad_tol and sits at the
    # component value up to cluster_tol
    rng = np.random.default_rng(9)
    cfg = FlowConfig()
    field = nav_field(Sphere(1), 2)
    comps = find_critical_components(field, random_points(field.spec, 80, rng), cfg)
    for c in comps:
        gn = field.gradient_norm(c.representatives)
        assert (gn <= cfg.grad_tol).all()
        vals = field.value_at(c.representatives)
        assert np.max(np.abs(vals - c.value)) <= cfg.cluster_tol
