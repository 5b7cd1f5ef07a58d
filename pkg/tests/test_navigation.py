import numpy as np
import pytest

from lsnav.errors import NotCriticalTuple, WrongSpec
from lsnav.manifolds import (
    Ellipsoid,
    ImplicitHypersurface,
    ProductSpheres,
    Sphere,
    StiefelV2,
    random_points,
)
from lsnav.constraints import torus_of_revolution_field
from lsnav.navigation import (
    NavTuple,
    PairSearchConfig,
    SignPattern,
    classify_sphere_critical,
    critical_tuple,
    find_parallel_pairs,
    nav_field,
    nav_gradient,
    nav_value,
    pattern_value,
    random_critical_tuple,
)

E1 = np.array([1.0, 0.0])


def _tuple_s1(*pts):
    return NavTuple(Sphere(1), np.array(pts))


def test_nav_value_examples():
    assert nav_value(_tuple_s1(E1, E1)) == 0.0
    assert nav_value(_tuple_s1(E1, -E1)) == 4.0
    assert nav_value(_tuple_s1(E1, -E1, E1)) == 8.0


def test_nav_value_zero_iff_diagonal():
    rng = np.random.default_rng(0)
    spec = Sphere(2)
    for _ in range(100):
        pts = random_points(spec, 3, rng)
        t = NavTuple(spec, pts)
        v = nav_value(t)
        assert v >= 0.0
        diag = np.max(np.linalg.norm(pts - pts[0], axis=1))
        if v <= 1e-12:
            assert diag <= 1e-5
        if diag <= 1e-12:
            assert v <= 1e-12


def test_nav_gradient_diagonal_zero():
    t = _tuple_s1(E1, E1, E1)
    assert all(np.linalg.norm(g.vec) == 0.0 for g in nav_gradient(t))


def test_nav_gradient_antipodal_projects_to_zero():
    # Euclidean gradient (4 e1, -4 e1) is normal at both slots
    t = _tuple_s1(E1, -E1)
    grads = nav_gradient(t)
    assert all(np.linalg.norm(g.vec) <= 1e-14 for g in grads)
    # consistent with structural criticality
    classify_sphere_critical(t)


def test_nav_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    field = nav_field(Sphere(2), 3)
    pts = random_points(field.spec, 50, rng)
    analytic = field.euclidean_gradient_at(pts)
    fd = field.fd_gradient(pts)
    rel = np.linalg.norm(analytic - fd, axis=1) / np.maximum(
        np.linalg.norm(analytic, axis=1), 1.0
    )
    assert np.max(rel) <= 1e-5


def test_classify_examples():
    t = _tuple_s1(E1, -E1, E1)
    pat = classify_sphere_critical(t)
    assert pat.signs == ((1, -1, 1),)
    assert pattern_value(pat) == 8.0

    diag = _tuple_s1(E1, E1, E1)
    pat0 = classify_sphere_critical(diag)
    assert pat0.signs == ((1, 1, 1),)
    assert pattern_value(pat0) == 0.0


def test_classify_rejects_with_witness():
    spec = Sphere(2)
    t = NavTuple(spec, np.array([[1.0, 0, 0], [0.0, 1, 0]]))
    with pytest.raises(NotCriticalTuple) as err:
        classify_sphere_critical(t)
    assert err.value.witness > 0.1


def test_classify_gradient_consistency():
    # accepted tuples have projected gradient <= 10 tol, rejected ones do not
    rng = np.random.default_rng(2)
    spec = ProductSpheres((1, 2))
    tol = 1e-9
    for _ in range(500):
        t = random_critical_tuple(spec, 3, rng)
        classify_sphere_critical(t, tol=tol)
        grad = np.concatenate([g.vec for g in nav_gradient(t)])
        assert np.linalg.norm(grad) <= 10 * tol
    for _ in range(500):
        t = NavTuple(spec, random_points(spec, 3, rng))
        grad = np.concatenate([g.vec for g in nav_gradient(t)])
        if np.linalg.norm(grad) > 10 * tol:
            with pytest.raises(NotCriticalTuple):
                classify_sphere_critical(t, tol=tol)


def test_pattern_value_examples():
    assert pattern_value(SignPattern(((1, 1, 1, 1),))) == 0.0
    assert pattern_value(SignPattern(((1, -1),))) == 4.0
    # two factors, r=3, flips (2, 1) -> 12
    pat = SignPattern(((1, -1, 1), (1, 1, -1)))
    assert pat.flips == (2, 1)
    assert pattern_value(pat) == 12.0
    # value lies in {0, 4, ..., 4 k (r-1)}
    assert pattern_value(pat) <= 4 * 2 * (3 - 1)


def test_pattern_value_matches_nav_value():
    rng = np.random.default_rng(3)
    for spec in [Sphere(1), Sphere(3), ProductSpheres((1, 3))]:
        for _ in range(100):
            t = random_critical_tuple(spec, 4, rng)
            pat = classify_sphere_critical(t)
            assert abs(pattern_value(pat) - nav_value(t)) <= 1e-9


def test_sign_pattern_validation():
    with pytest.raises(ValueError):
        SignPattern(((-1, 1),))
    with pytest.raises(ValueError):
        SignPattern(((1, 0),))


def test_critical_tuple_round_trip():
    rng = np.random.default_rng(4)
    spec = ProductSpheres((1, 3))
    base = random_points(spec, 1, rng)[0]
    pat = SignPattern(((1, -1, -1), (1, 1, -1)))
    t = critical_tuple(spec, pat, base)
    assert classify_sphere_critical(t).signs == pat.signs


def test_parallel_pairs_ellipsoid():
    census = find_parallel_pairs(Ellipsoid((1.0, 2.0, 3.0)),
                                 PairSearchConfig(n_seeds=4000, rng_seed=0))
    assert census.alpha == 3
    expected = [4.0, 16.0, 36.0]  # squared axis diameters 2a, 2b, 2c
    got = [p.value for p in census.pairs]
    assert np.allclose(sorted(got), expected, atol=1e-8)
    for p in census.pairs:
        assert p.alignment_residual <= 1e-10
        assert abs(p.value - float(np.sum((p.x - p.y) ** 2))) == 0.0
        # each pair is an antipodal principal-axis pair
        assert np.linalg.norm(p.x + p.y) <= 1e-8
        assert np.count_nonzero(np.abs(p.x) > 1e-6) == 1


def test_parallel_pairs_sphere_continuum():
    census = find_parallel_pairs(Sphere(2), PairSearchConfig(n_seeds=3000, rng_seed=0))
    assert census.is_continuum
    # antipodal pairs satisfy the gradient criterion identically: the normal
    # at x is x itself and the chord is 2x
    rng = np.random.default_rng(5)
    x = random_points(Sphere(2), 20, rng)
    chord = x - (-x)
    g = 2.0 * x  # gradient of |x|^2
    cross = np.cross(g, chord)
    assert np.max(np.abs(cross)) <= 1e-12


def test_parallel_pairs_torus_continuum():
    fld = torus_of_revolution_field(2.0, 0.5)
    census = find_parallel_pairs(ImplicitHypersurface(fld, 0.25),
                                 PairSearchConfig(n_seeds=3000, rng_seed=0))
    assert census.is_continuum


def test_parallel_pairs_wrong_spec():
    with pytest.raises(WrongSpec):
        find_parallel_pairs(StiefelV2(4))


def test_parallel_pairs_deterministic():
    cfg = PairSearchConfig(n_seeds=2000, rng_seed=11)
    a = find_parallel_pairs(Ellipsoid((1.0, 2.0, 3.0)), cfg)
    b = find_parallel_pairs(Ellipsoid((1.0, 2.0, 3.0)), cfg)
    assert a.to_json() == b.to_json()


def test_pair_census_json():
    census = find_parallel_pairs(Ellipsoid((1.0, 2.0, 3.0)),
                                 PairSearchConfig(n_seeds=2000, rng_seed=0))
    payload = census.to_json()
    assert payload["alpha"] == 3
    assert len(payload["pairs"]) == 3


def test_parallel_pairs_thread_workers_same_result(monkeypatch):
    cfg = PairSearchConfig(n_seeds=2000, rng_seed=3)
    base = find_parallel_pairs(Ellipsoid((1.0, 2.0, 3.0)), cfg)
    monkeypatch.setenv("LSNAV_THREADS", "4")
    threaded = find_parallel_pairs(Ellipsoid((1.0, 2.0, 3.0)), cfg)
    assert base.to_json() == threaded.to_json()
