import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from coulomb_ot import Density, dilate, lp_norms, median_split, mollify, normalize
from coulomb_ot.densities import convolve, discretize, radial_cdfs
from coulomb_ot.exceptions import DisconnectedSupport, NegativeValue, NotRadial, ZeroMass


def test_exponential_normalisation_constant_is_8pi():
    d = Density.exponential(1.0, 3)
    # Gamma integral of e^{-r} 4 pi r^2, cross-checked by quad
    quad, _ = integrate.quad(lambda r: 4 * math.pi * r * r * math.exp(-r), 0, np.inf)
    assert d.norm == pytest.approx(8 * math.pi, rel=1e-12)
    assert quad == pytest.approx(8 * math.pi, rel=1e-12)
    assert d.mass() == pytest.approx(1.0, abs=1e-10)


def test_normalized_uniform_is_unchanged():
    d = Density.uniform(0.0, 1.0)
    assert normalize(d).norm == d.norm
    assert d(np.array([0.3]))[0] == pytest.approx(1.0)


def test_grid_mass_two_is_halved():
    d = Density.grid([0.0, 1.0], [2.0, 2.0])
    assert d.norm == pytest.approx(2.0)
    assert np.allclose(d(np.array([0.0, 0.5, 1.0])), 1.0)


def test_normalize_errors():
    with pytest.raises(NegativeValue):
        Density.grid([0.0, 1.0, 2.0], [1.0, -1.0, 1.0])
    with pytest.raises(ZeroMass):
        Density.grid([0.0, 1.0], [0.0, 0.0])
    with pytest.raises(DisconnectedSupport):
        Density.grid([0.0, 1.0, 2.0, 3.0, 4.0], [1.0, 1.0, 0.0, 1.0, 1.0])


def test_radial_cdfs_exponential_closed_form(exponential_case):
    f1, f2 = radial_cdfs(exponential_case.density)
    for t in (0.1, 1.0, 3.0, 10.0):
        assert f1(t) == pytest.approx(exponential_case.f1(t), abs=1e-12)
        assert f1(t) + f2(-t) == pytest.approx(1.0, abs=1e-12)


def test_radial_cdfs_gaussian_tail(gaussian_case):
    _, f2 = radial_cdfs(gaussian_case.density)
    for t in (0.5, 1.5, 3.0):
        tail, _ = integrate.quad(
            lambda s: math.sqrt(2 / math.pi) * s * s * math.exp(-s * s / 2), t, np.inf
        )
        assert f2(-t) == pytest.approx(tail, abs=1e-12)


def test_radial_cdfs_limits_and_errors(exponential_case):
    f1, _ = radial_cdfs(exponential_case.density)
    assert f1(0.0) == 0.0
    assert f1(exponential_case.density.upper) == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(NotRadial):
        radial_cdfs(Density.uniform())


def test_median_split_examples(interval_cases):
    for case in interval_cases:
        a = median_split(case.density)
        assert a == pytest.approx(case.median, abs=1e-10)
        assert abs(case.density.cdf(a) - 0.5) <= 1e-10


def test_mollify_uniform_l1_error_shrinks():
    d = Density.uniform()
    errors = []
    for eps in (0.2, 0.1, 0.05):
        m = mollify(d, eps)
        x = np.linspace(m.lower, m.upper, 20001)
        errors.append(integrate.trapezoid(np.abs(m(x) - d(x)), x))
        assert m.mass() == pytest.approx(1.0, abs=1e-8)
    assert errors[0] > errors[1] > errors[2]
    # exact value is 2 eps / sqrt(pi), about 0.0564 at eps = 0.05
    assert errors[2] == pytest.approx(2 * 0.05 / math.sqrt(math.pi), rel=2e-3)


def test_mollify_gaussian_variance_adds():
    d = Density.gaussian(1.0, 1)
    eps = 0.7
    x = np.linspace(-3, 3, 13)
    var = 1.0 + eps**2 / 2
    expected = np.exp(-(x**2) / (2 * var)) / math.sqrt(2 * math.pi * var)
    assert np.allclose(convolve(d, eps, x), expected, atol=1e-10)


def test_mollify_keeps_radial_symmetry_and_mass():
    d = Density.exponential(1.0, 3)
    m = mollify(d, 0.3)
    assert m.is_radial
    assert m.mass() == pytest.approx(1.0, abs=1e-8)
    assert np.all(m(np.linspace(0, m.upper * 0.9, 50)) > 0)


def test_lp_norms():
    assert lp_norms(Density.uniform()).l1 == pytest.approx(1.0)
    assert lp_norms(Density.uniform()).l3 == pytest.approx(1.0)
    norms = lp_norms(Density.exponential(1.0, 3))
    closed = (4 * math.pi / (8 * math.pi) ** 3 * 2 / 27) ** (1 / 3)
    assert norms.l3 == pytest.approx(closed, rel=1e-10)
    assert norms.max == max(norms.l1, norms.l3)


def test_dilate_uniform():
    d = dilate(Density.uniform(), 2.0)
    assert (d.lower, d.upper) == (0.0, 0.5)
    assert d(np.array([0.25]))[0] == pytest.approx(2.0)
    assert dilate(Density.uniform(), 1.0)(np.array([0.3]))[0] == pytest.approx(1.0)


def test_spec_round_trip_and_csv():
    d = Density.gaussian(0.5, 3)
    again = Density.from_spec(d.to_spec())
    assert again.norm == pytest.approx(d.norm)
    buf = io.StringIO()
    Density.grid([0.0, 1.0], [2.0, 2.0]).to_csv(buf)
    assert buf.getvalue() == "point,value\n0,1\n1,1\n"


def test_discretize_radial_is_symmetric_line_measure():
    m = discretize(Density.exponential(1.0, 3), 16)
    assert m.size == 32
    assert np.allclose(m.points[::-1, 0], -m.points[:, 0])
    assert m.mass == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(0.05, 5.0), min_size=3, max_size=12),
    st.floats(0.5, 3.0),
)
def test_normalize_idempotent_and_dilation_moves_median(values, alpha):
    x = np.linspace(0.0, 1.0, len(values))
    d = Density.grid(x, values)
    assert normalize(normalize(d)).norm == pytest.approx(d.norm, rel=1e-14)
    assert d.mass() == pytest.approx(1.0, abs=1e-10)
    assert median_split(dilate(d, alpha)) == pytest.approx(median_split(d) / alpha, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.0, 1.0))
def test_mass_split_identity(scale, frac):
    d = Density.gaussian(scale, 3)
    f1, f2 = radial_cdfs(d)
    t = frac * d.upper
    assert f1(t) + f2(-t) == pytest.approx(1.0, abs=1e-9)
