from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexlab.parameters import (PI, DomainError, PiMultiple, derive, fiber_he_constant,
                                  sigma_from_taus_literal, slope, verify_consistency)

positive = st.fractions(min_value=Fraction(1, 12), max_value=20, max_denominator=12)
rational = st.fractions(min_value=-10, max_value=10, max_denominator=12)


def oracle(n, vol, sigma, d1, d2, r1=1, r2=1):
    """Hand evaluation, coefficients of pi."""
    deg_e = n * sigma * (d1 + d2) + r2 * 2 * factorial(n) * vol
    lam = 2 * deg_e / ((r1 + r2) * factorial(n) * sigma * vol)
    return {"deg_e": deg_e, "lam": lam, "tau2": lam - 4 / sigma, "c": 4 / sigma}


def test_reference_record():
    rec = derive(1, 1, 1, 1, 0)
    assert rec.vol_sigma == 1
    assert rec.deg_sigma_E == 3
    assert (rec.lam, rec.tau1, rec.tau2, rec.c) == (3 * PI, 3 * PI, -PI, 4 * PI)
    assert str(rec.tau1) == "3·π" and str(rec.tau2) == "-1·π"
    assert all(v.passed for v in verify_consistency(rec))


def test_second_reference_record():
    rec = derive(1, 1, 1, 2, 0)
    assert rec.deg_sigma_pullback_1 == 2 and rec.deg_sigma_quotient == 2
    assert rec.lam == 4 * PI and rec.tau1 == 4 * PI and rec.tau2 == 0


@given(n=st.integers(1, 3), sigma=positive, vol=positive)
def test_trivial_degrees_symmetric(n, sigma, vol):
    rec = derive(n, vol, sigma, 0, 0)
    assert rec.lam == 2 * PI / sigma
    assert rec.tau2 == -rec.tau1


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 3), vol=positive, sigma=positive, d1=rational, d2=rational)
def test_random_records_consistent(n, vol, sigma, d1, d2):
    rec = derive(n, vol, sigma, d1, d2)
    verdicts = verify_consistency(rec)
    assert [v.name for v in verdicts] == ["tau_constraint", "sigma_relation", "degree_chain",
                                          "tau_gap_equals_c"]
    assert all(v.passed for v in verdicts), [v for v in verdicts if not v.passed]
    o = oracle(n, vol, sigma, d1, d2)
    assert rec.deg_sigma_E == o["deg_e"]
    assert rec.lam == PiMultiple(o["lam"], 1)
    assert rec.tau2 == PiMultiple(o["tau2"], 1)
    assert rec.c == PiMultiple(o["c"], 1)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 3), vol=positive, sigma=positive, d1=rational, d2=rational,
       r1=st.integers(1, 3), r2=st.integers(1, 3))
def test_general_ranks(n, vol, sigma, d1, d2, r1, r2):
    rec = derive(n, vol, sigma, d1, d2, r1, r2)
    assert all(v.passed for v in verify_consistency(rec))
    assert rec.lam == PiMultiple(oracle(n, vol, sigma, d1, d2, r1, r2)["lam"], 1)
    # the middle expression for 1/sigma agrees with 4 pi / (tau1 - tau2)
    assert 1 / sigma_from_taus_literal(rec) == 4 * PI / (rec.tau1 - rec.tau2)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 3), vol=positive, sigma=positive, d1=rational, d2=rational,
       r1=st.integers(1, 3), r2=st.integers(1, 3))
def test_weighted_tau_average_is_slope(n, vol, sigma, d1, d2, r1, r2):
    rec = derive(n, vol, sigma, d1, d2, r1, r2)
    avg = (r1 * rec.tau1 + r2 * rec.tau2) / (r1 + r2)
    assert avg * factorial(n - 1) * vol / (2 * PI) == slope(d1 + d2, r1 + r2)


@given(n=st.integers(1, 3), vol=positive, sigma=positive, d1=rational, d2=rational)
def test_sigma_recovered_from_taus(n, vol, sigma, d1, d2):
    rec = derive(n, vol, sigma, d1, d2)
    assert 4 * PI / (rec.tau1 - rec.tau2) == sigma


@given(n=st.integers(1, 3), vol=positive, sigma=positive, d1=rational, d2=rational)
def test_lambda_monotone(n, vol, sigma, d1, d2):
    base = derive(n, vol, sigma, d1, d2).lam
    assert derive(n, vol, sigma, d1 + 1, d2).lam.coeff > base.coeff
    assert derive(n, vol, sigma, d1, d2 + Fraction(1, 3)).lam.coeff > base.coeff


def test_tampered_record_detected():
    rec = derive(1, 1, 1, 1, 0)
    bad = type(rec)(**{**rec.__dict__, "tau2": rec.tau2 + PI})
    verdicts = {v.name: v.passed for v in verify_consistency(bad)}
    assert verdicts == {"tau_constraint": False, "sigma_relation": False,
                        "degree_chain": True, "tau_gap_equals_c": False}


def test_slope():
    assert slope(3, 2) == Fraction(3, 2)
    assert slope(0, 5) == 0
    with pytest.raises(DomainError):
        slope(1, 0)


@pytest.mark.parametrize("args", [(1, 1, 0, 1, 0), (1, 1, -1, 1, 0), (1, 0, 1, 1, 0),
                                  (0, 1, 1, 1, 0), (1, 1, 1, 1, 0, 0, 1)])
def test_domain_errors(args):
    with pytest.raises(DomainError):
        derive(*args)


def test_float_inputs_rejected():
    with pytest.raises(TypeError):
        derive(1, 1, 0.5, 1, 0)


@pytest.mark.parametrize("sigma,c", [(1, 4 * PI), (2, 2 * PI), (Fraction(1, 2), 8 * PI)])
def test_fiber_constant(sigma, c):
    assert fiber_he_constant(sigma, 1, 1) == c


@given(coeff=st.fractions(max_denominator=50), power=st.integers(-2, 2))
def test_pi_multiple_render_roundtrip(coeff, power):
    x = PiMultiple(coeff, power)
    assert PiMultiple.parse(str(x)) == x


def test_pi_multiple_arithmetic():
    assert str(PI * 3) == "3·π"
    assert str(-PI) == "-1·π"
    assert str(PiMultiple(Fraction(3, 2))) == "3/2"
    assert str(2 / PI) == "2·π^-1"
    assert PI - PI == 0
    with pytest.raises(ValueError):
        PI + 1
    assert abs(float(3 * PI) - 9.42477796076938) < 1e-12
