import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from coulomb_ot import Density, DiscreteMeasure, TransportPlan, dilate
from coulomb_ot.exact_maps import (
    IdentityMap,
    MedianSplitMap,
    RadialMap,
    evaluate,
    monge_cost,
    pushforward_residual,
    solve_map_1d,
    solve_map_radial,
)
from coulomb_ot.exceptions import NotRadial, OriginSingularity, SingularCost
from coulomb_ot.kantorovich import check_1d_configurations


@pytest.fixture(scope="module")
def uniform_map():
    return solve_map_1d(Density.uniform())


@pytest.fixture(scope="module")
def linear_map():
    return solve_map_1d(Density.grid([0.0, 1.0], [0.0, 2.0]))


@pytest.fixture(scope="module")
def exp_map(exponential_case):
    return solve_map_radial(exponential_case.density)


def test_uniform_map_branches(uniform_map):
    x = np.linspace(0.005, 0.995, 50)
    x = x[np.abs(x - 0.5) > 1e-12]
    expected = np.where(x < 0.5, x + 0.5, x - 0.5)
    assert uniform_map.median_ == pytest.approx(0.5, abs=1e-12)
    assert np.max(np.abs(uniform_map.transform(x) - expected)) <= 1e-9
    assert evaluate(uniform_map, 0.25) == pytest.approx(0.75, abs=1e-12)


def test_uniform_map_endpoints_and_split(uniform_map):
    assert uniform_map.transform(np.array([0.0, 1.0])) == pytest.approx([0.5, 0.5], abs=1e-12)
    assert (uniform_map.left_limit_, uniform_map.right_limit_) == (1.0, 0.0)
    assert np.isnan(uniform_map.transform(0.5))


def test_linear_density_map(linear_map):
    assert linear_map.median_ == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert linear_map.transform(0.5) == pytest.approx(math.sqrt(3) / 2, abs=1e-10)


def test_table_evaluation_matches_exact(linear_map):
    table = MedianSplitMap(evaluation="table").fit(linear_map.density_)
    x = np.linspace(0.05, 0.95, 37)
    x = x[np.abs(x - linear_map.median_) > 0.02]
    assert np.allclose(table.transform(x), linear_map.transform(x), atol=1e-6)


def test_branches_strictly_increasing(linear_map, uniform_map):
    for m in (linear_map, uniform_map):
        k = m.n_table
        assert np.all(np.diff(m.table_[:k, 1]) > 0)
        assert np.all(np.diff(m.table_[k:, 1]) > 0)
        assert np.all(m.table_[:k, 1] > m.median_)
        assert np.all(m.table_[k:, 1] < m.median_)


def test_exponential_g_at_one(exp_map, exponential_case):
    # brentq on (1 + s + s^2/2) e^{-s} = F1(1) = 1 - 2.5/e
    assert exponential_case.f1(1.0) == pytest.approx(1 - 2.5 / math.e, abs=1e-15)
    assert exp_map.g(1.0) == pytest.approx(-5.6364172078609736, rel=1e-10)


def test_radial_median_is_fixed_in_modulus(radial_case):
    fitted = solve_map_radial(radial_case.density)
    t = float(radial_case.density.quantile(0.5))
    assert fitted.radius_image(t) == pytest.approx(t, rel=1e-9)


def test_gaussian_g_vanishes_at_cutoff(gaussian_case):
    fitted = solve_map_radial(gaussian_case.density)
    g = fitted.g(np.array([3.0, 5.0, gaussian_case.density.upper]))
    assert np.all(g <= 0) and np.all(np.diff(g) > 0)
    assert abs(g[-1]) < 1e-6


def test_radial_g_diverges_at_origin(exp_map):
    r = exp_map.table_[:, 0]
    assert abs(exp_map.table_[0, 1]) > exp_map.density_.upper / 2
    assert np.all(np.diff(exp_map.table_[:, 1]) > 0)
    assert r[0] == pytest.approx(exp_map.r_min_)


def test_radial_evaluate_line_and_rotation(exp_map, rng):
    x = np.array([[1.3, 0.0, 0.0]])
    assert np.allclose(exp_map.transform(x), [[exp_map.g(1.3), 0.0, 0.0]], atol=1e-12)
    pts = rng.normal(size=(20, 3))
    for rot in Rotation.random(20, random_state=1):
        m = rot.as_matrix()
        lhs = exp_map.transform(pts @ m.T)
        rhs = exp_map.transform(pts) @ m.T
        assert np.allclose(lhs, rhs, atol=1e-12, rtol=1e-12)


def test_radial_origin_raises(exp_map):
    with pytest.raises(OriginSingularity):
        exp_map.transform(np.zeros((1, 3)))
    with pytest.raises(NotRadial):
        RadialMap().fit(Density.uniform())


def test_pushforward_residuals(uniform_map, exp_map, gaussian_case):
    assert pushforward_residual(uniform_map) <= 1e-9
    assert pushforward_residual(exp_map) <= 1e-6
    assert pushforward_residual(solve_map_radial(gaussian_case.density)) <= 1e-6
    assert pushforward_residual(IdentityMap().fit(Density.gaussian(1.0, 1))) == 0.0


def test_monge_cost_values(uniform_map, linear_map, radial_case):
    assert monge_cost(uniform_map) == pytest.approx(2.0, abs=1e-10)
    # scipy quad of 2x / |x - T(x)| with the explicit square-root map
    assert monge_cost(linear_map) == pytest.approx(8.0 / 3.0, abs=1e-8)
    fitted = solve_map_radial(radial_case.density)
    assert monge_cost(fitted) == pytest.approx(radial_case.e_ot, rel=1e-8)


def test_identity_map_has_singular_cost():
    with pytest.raises(SingularCost):
        monge_cost(IdentityMap().fit(Density.uniform()))


def test_monge_cost_dilation(exponential_case):
    base = monge_cost(solve_map_radial(exponential_case.density))
    for alpha in (0.5, 2.0):
        scaled = monge_cost(solve_map_radial(dilate(exponential_case.density, alpha)))
        assert scaled == pytest.approx(alpha * base, rel=1e-6)


def test_fixed_point_free(uniform_map, linear_map):
    for m in (uniform_map, linear_map):
        spacing = np.min(np.diff(np.sort(m.table_[:, 0])))
        assert np.all(np.abs(m.table_[:, 1] - m.table_[:, 0]) >= spacing)


def test_involution(linear_map, exp_map):
    x = np.linspace(0.02, 0.98, 60)
    x = x[np.abs(x - linear_map.median_) > 1e-3]
    assert np.allclose(linear_map.transform(linear_map.transform(x)), x, atol=1e-9)
    r = np.linspace(0.2, 8.0, 30)
    assert np.allclose(exp_map.radius_image(exp_map.radius_image(r)), r, rtol=1e-8)


def _map_plan(fitted, x):
    y = fitted.transform(x)
    # distinct atoms keep their order, so the coupling is the identity
    mu = DiscreteMeasure(x, np.ones_like(x))
    nu = DiscreteMeasure(y, np.ones_like(y))
    return TransportPlan(mu, nu, np.eye(x.size))


def test_map_avoids_excluded_configurations(linear_map, rng):
    # 150 samples give 11175 pairs
    x = np.sort(rng.uniform(0.001, 0.999, 150))
    x = x[np.abs(x - linear_map.median_) > 1e-9]
    hits = check_1d_configurations(_map_plan(linear_map, x), n_triples=20000, seed=0)
    assert hits == {"pairs": 0, "triples": 0}


def test_export_csv(uniform_map, exp_map):
    buf = io.StringIO()
    uniform_map.export_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x,T" and len(lines) == 2 * uniform_map.n_table + 1
    buf = io.StringIO()
    exp_map.export_csv(buf)
    assert buf.getvalue().startswith("r,g\n")


@settings(max_examples=12, deadline=None)
@given(st.lists(st.floats(0.1, 4.0), min_size=3, max_size=10))
def test_random_interval_maps_preserve_mass(values):
    d = Density.grid(np.linspace(-1.0, 2.0, len(values)), values)
    fitted = solve_map_1d(d, n_table=32)
    assert pushforward_residual(fitted, n_intervals=50) <= 1e-9
    x = np.linspace(d.lower + 1e-3, d.upper - 1e-3, 25)
    x = x[np.abs(x - fitted.median_) > 1e-6]
    y = fitted.transform(x)
    assert np.all((x < fitted.median_) == (y > fitted.median_))
