import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bgwbench.fields import (
    Annulus, Ball, Box, Custom, Gaussian, GridField, GridSpec, HolderCone, Indicator, LogBump,
    Polynomial, box_integral, eval_field, field_from_descriptor, polynomial_region_integral_exact,
    psi, region_measure, sample, translate,
)


def test_gridspec_validation():
    assert GridSpec(1, 1.0, 1 / 256).N == 513
    with pytest.raises(ValueError):
        GridSpec(3, 1.0, 0.5)
    with pytest.raises(ValueError):
        GridSpec(1, 1.0, 0.3)
    with pytest.raises(ValueError):
        GridSpec(1, 1.0, 2 / 3)  # odd cell count, origin not a node


def test_gridfield_rejects_nonfinite():
    with pytest.raises(ValueError):
        GridField(GridSpec(1, 1, 0.5), [0, np.nan, 0, 0, 0])


@pytest.mark.parametrize("f, x, expected", [
    (Polynomial([1]), 0.37, 1.0),
    (Polynomial([1]), -2.0, 1.0),
    (LogBump(1 / 16), 0.0, 4 * math.log(2)),
    (HolderCone(0.5, 1.0), 0.0, 0.0),
    (HolderCone(0.3, 0.5), 0.0, 0.0),
])
def test_eval_examples(f, x, expected):
    assert eval_field(f, x) == pytest.approx(expected, abs=1e-15)


def test_sample_examples():
    spec = GridSpec(1, 1.0, 1 / 256)
    assert np.all(sample(Polynomial([3]), spec).values == 3)
    assert np.all(sample(Polynomial([3]), GridSpec(2, 1.0, 1 / 8)).values == 3)
    assert sample(LogBump(1 / 16), spec).at_origin() == pytest.approx(4 * math.log(2), rel=1e-15)
    g = sample(Gaussian(1.0), GridSpec(1, 4.0, 1 / 64)).values
    assert np.array_equal(g, g[::-1])
    g2 = sample(Gaussian(0.7), GridSpec(2, 2.0, 1 / 16)).values
    assert np.array_equal(g2, g2[::-1, :]) and np.array_equal(g2, g2.T)


def test_logbump_symmetric():
    v = sample(LogBump(2 ** -6), GridSpec(1, 1.0, 2 ** -10)).values
    assert np.array_equal(v, v[::-1])


def test_sample_eval_exact_at_nodes():
    spec = GridSpec(1, 2.0, 1 / 32)
    f = Gaussian(0.5)
    g = sample(f, spec)
    for i in (0, 17, 64, 100, 128):
        x = spec.axis()[i]
        assert eval_field(g, x) == eval_field(f, x)


def test_eval_outside_grid():
    g = sample(Gaussian(), GridSpec(1, 1.0, 0.25))
    with pytest.raises(ValueError):
        eval_field(g, 1.5)


def test_family_preconditions():
    with pytest.raises(ValueError):
        LogBump(0.25)
    with pytest.raises(ValueError):
        LogBump(0.0)
    with pytest.raises(ValueError):
        HolderCone(1.0)


# cutoff -------------------------------------------------------------------

def test_psi_values():
    assert psi(0.25) == 1 and psi(0.5) == 0
    r = np.linspace(0, 1, 4001)
    v = psi(r)
    assert np.all((0 <= v) & (v <= 1))
    assert np.all(v[r <= 0.25] == 1) and np.all(v[r >= 0.5] == 0)
    assert np.all(np.diff(v) <= 0)


@pytest.mark.parametrize("r0", [0.25, 0.5])
def test_psi_derivative_vanishes(r0):
    ds = [abs(float(psi(r0 + e) - psi(r0 - e))) / (2 * e) for e in (1e-2, 1e-3, 1e-4)]
    # centred difference of a C^1 join with zero slope decays like O(e)
    assert ds[0] > ds[1] > ds[2] and ds[2] < 1e-2
    assert ds[1] / ds[2] > 9


def test_psi_c1():
    # left and right one-sided slopes agree at the joins
    for r0 in (0.25, 0.5):
        e = 1e-6
        left = (psi(r0) - psi(r0 - e)) / e
        right = (psi(r0 + e) - psi(r0)) / e
        assert abs(left - right) < 1e-4


# integrals ------------------------------------------------------------------

def test_constant_integral():
    for region, n, meas in [(Ball(1.5), 1, 3.0), (Annulus.dyadic(0), 1, 2.0), (Box([-1], [0.5]), 1, 1.5)]:
        assert box_integral(Polynomial([2.5]), region) == pytest.approx(2.5 * meas)
        assert region_measure(region, n) == pytest.approx(meas)
    g = sample(Polynomial([2.5]), GridSpec(1, 4.0, 1 / 64))
    assert box_integral(g, Annulus.dyadic(0)) == pytest.approx(5.0, rel=1e-12)


def test_x_squared_over_annulus():
    assert polynomial_region_integral_exact([0, 0, 1], Annulus.dyadic(0)) == Fraction(14, 3)
    assert box_integral(Polynomial([0, 0, 1]), Annulus.dyadic(0)) == pytest.approx(14 / 3, rel=1e-15)
    g = sample(Polynomial([0, 0, 1]), GridSpec(1, 4.0, 1 / 256))
    assert box_integral(g, Annulus.dyadic(0)) == pytest.approx(14 / 3, rel=1e-5)


@pytest.mark.parametrize("deg", [1, 3, 5])
def test_odd_monomial_vanishes(deg):
    c = [0] * deg + [1]
    assert polynomial_region_integral_exact(c, Annulus.dyadic(1)) == 0
    g = sample(Polynomial(c), GridSpec(1, 8.0, 1 / 32))
    assert abs(box_integral(g, Annulus.dyadic(1))) < 1e-9


def test_quadrature_second_order():
    f = Polynomial([0.3, -1.0, 2.0])
    region = Box([-0.3], [0.7])
    exact = float(polynomial_region_integral_exact(f.coeffs, region))
    errs = [abs(box_integral(f, region, h=2.0 ** -j, transform=lambda v: v) - exact) for j in (4, 5, 6, 7)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.9


def test_region_miss_raises_unless_extended():
    g = sample(Gaussian(), GridSpec(1, 2.0, 1 / 16))
    with pytest.raises(ValueError):
        box_integral(g, Annulus.dyadic(3))
    assert box_integral(g, Annulus.dyadic(3), extend=True) == 0.0


def test_2d_disc_measure():
    g = sample(Polynomial([1]), GridSpec(2, 2.0, 1 / 64))
    assert box_integral(g, Ball(1.0)) == pytest.approx(math.pi, rel=2e-3)
    assert box_integral(Polynomial([1]), Annulus.dyadic(-1), h=1 / 64, n=2) == pytest.approx(
        math.pi * (1 - 0.25), rel=2e-3)


# serialisation and transforms ------------------------------------------------

def test_json_and_csv_roundtrip():
    g = sample(LogBump(2 ** -5), GridSpec(1, 1.0, 1 / 64))
    assert GridField.from_json(g.to_json()).values.tolist() == g.values.tolist()
    assert np.array_equal(GridField.from_csv(g.to_csv()).values, g.values)
    g2 = sample(Gaussian(0.3), GridSpec(2, 1.0, 1 / 8))
    assert np.array_equal(GridField.from_csv(g2.to_csv()).values, g2.values)


def test_descriptors_roundtrip():
    for f in [LogBump(0.01), HolderCone(0.4, 0.5), Gaussian(2.0), Polynomial([1, 2, 3]),
              Indicator([0.0], [1.0])]:
        assert field_from_descriptor(f.descriptor()) == f


def test_custom_expression():
    f = Custom("exp(-x**2)", support=None)
    assert eval_field(f, 0.5) == pytest.approx(math.exp(-0.25))
    with pytest.raises(ValueError):
        Custom("__import__('os')", support=None)


def test_translate_zero_fill():
    g = sample(Gaussian(0.2), GridSpec(1, 2.0, 1 / 16))
    t = translate(g, [3])
    assert np.array_equal(t.values[3:], g.values[:-3]) and np.all(t.values[:3] == 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.24), st.floats(-2, 2))
def test_logbump_even(delta, x):
    f = LogBump(delta)
    assert eval_field(f, x) == eval_field(f, -x)
