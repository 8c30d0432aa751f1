import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexlab import fiber_geometry as fg
from vortexlab.kahler_base import build_base
from vortexlab.parameters import PI, DomainError, derive


def test_fubini_study_values():
    assert fg.fubini_study_data(0j)[0] == 1.0
    assert fg.fubini_study_data(1 + 0j)[0] == 0.25
    rng = np.random.default_rng(3)
    z = rng.normal(size=50) + 1j * rng.normal(size=50)
    k, g = fg.fubini_study_data(z)
    assert np.allclose(k * (1 + np.abs(z) ** 2) ** 2, 1.0, rtol=1e-14)
    assert np.allclose(g, k / np.pi, rtol=1e-14)


def test_normalization_defining_property():
    e2 = fg.eta_normalization(1)
    z = np.array([0, 1, 2 + 1j])
    val = (1j * fg.contract_fiber(fg.eta_wedge_coeff(z, e2), z, 1.0)).real
    assert np.max(np.abs(val + 1)) < 1e-12


def test_normalization_linear_in_sigma():
    vals = [fg.eta_normalization(s) for s in (1, 2, 4)]
    assert abs(vals[1] / vals[0] - 2) < 1e-14 and abs(vals[2] / vals[0] - 4) < 1e-14
    assert abs(vals[0] - 1 / (2 * math.pi)) < 1e-15


@pytest.mark.parametrize("sigma", [0.5, 1.0, 3.0])
def test_wedge_identity(sigma):
    rng = np.random.default_rng(7)
    pts = rng.normal(size=100) + 1j * rng.normal(size=100)
    rep = fg.eta_wedge_identity(sigma, pts)
    assert rep.passed
    assert rep.ratio_spread < 1e-12 and rep.contraction_error < 1e-12
    # eta ^ eta* = i sigma omega under the shipped normalization
    assert abs(rep.ratio - 1j * sigma) < 1e-12


@pytest.mark.parametrize("sigma", [0.5, 1.0, 3.0])
def test_literal_convention_check(sigma):
    rep = fg.eta_wedge_identity(sigma, np.array([0.3 + 0.1j, -1.2j, 2.0]))
    # the unnormalized identity holds with |eta0|^2 = 1/sigma ...
    assert rep.literal_identity_error < 1e-14
    # ... but its contraction is -1/sigma^2
    assert abs(rep.literal_contraction + 1 / sigma ** 2) < 1e-12


def test_normalization_domain():
    with pytest.raises(DomainError):
        fg.eta_normalization(0)
    with pytest.raises(DomainError):
        fg.fiber_he_constant(Fraction(-1))


def test_he_constant_values():
    assert fg.fiber_he_constant(1) == 4 * PI
    assert fg.fiber_he_constant(2) == 2 * PI
    assert fg.fiber_he_constant(Fraction(2, 3), n=3, vol_x=Fraction(5, 7)) == 6 * PI


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 3),
       sigma=st.fractions(min_value=Fraction(1, 9), max_value=9, max_denominator=9),
       vol=st.fractions(min_value=Fraction(1, 9), max_value=9, max_denominator=9),
       d1=st.integers(-5, 5), d2=st.integers(-5, 5))
def test_he_constant_is_tau_gap(n, sigma, vol, d1, d2):
    rec = derive(n, vol, sigma, d1, d2)
    c = fg.fiber_he_constant(sigma, n, vol)
    assert c == rec.tau1 - rec.tau2
    assert c * sigma == 4 * PI


def test_fiber_curvature_second_order():
    r = [fg.fiber_curvature_check(1.0, n) for n in (64, 128)]
    assert r[0].expected == pytest.approx(4 * math.pi)
    ratio = r[0].sup_error / r[1].sup_error
    assert 3.5 < ratio < 4.5
    assert r[1].sup_error < r[0].sup_error


def test_fiber_curvature_scales_with_sigma():
    geom = build_base(48)
    a = fg.fiber_curvature_field(1.0, geom)
    b = fg.fiber_curvature_field(2.0, geom)
    assert np.allclose(a[geom.interior], 2 * b[geom.interior])


def test_fiber_curvature_grid_validated():
    with pytest.raises(ValueError):
        fg.fiber_curvature_check(1.0, 16)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 3.0])
def test_eta_covariant_derivative(sigma):
    geom = build_base(32)
    exact = fg.eta_covariant_derivative(sigma, geom, exact=True)
    assert np.max(np.abs(exact)) < 1e-15
    rep = fg.eta_closedness_check(sigma, (32, 64))
    assert rep.errors[1] < rep.errors[0]
    assert abs(rep.order - 2.0) <= 0.2


def test_build_fiber():
    f = fg.build_fiber(2, 32)
    assert f.sigma == 2.0 and abs(f.eta0 ** 2 - f.eta0_sq) < 1e-16
    assert f.fiber_geom.resolution == 32
