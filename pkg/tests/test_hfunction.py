from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma as G

from fracrd.errors import InvalidParams, PoleCollision
from fracrd.hfunction import (
    HConfig,
    HFunctionSpec,
    cosine_transform_spec,
    format_spec,
    h_contour_integral,
    h_eval,
    h_scale,
    h_series,
    h_tolerance,
    parse_spec,
    space_time_spec,
    verify_cosine_transform,
)
from fracrd.oracles import elementary_h_corpus, random_h_spec

X = np.array([0.05, 0.3, 1.0, 2.5, 7.0])


# grammar --------------------------------------------------------------------------------


finite = st.floats(-5, 5, allow_nan=False).map(lambda v: float(f"{v:.6g}"))
positive = st.floats(0.05, 4.0)


@st.composite
def specs(draw):
    p = draw(st.integers(0, 3))
    q = draw(st.integers(1, 3))
    upper = [(draw(finite), draw(positive)) for _ in range(p)]
    lower = [(draw(finite), draw(positive)) for _ in range(q)]
    m = draw(st.integers(0, q))
    n = draw(st.integers(0, p))
    pref = draw(st.one_of(st.just(1.0), st.floats(-1e3, 1e3, allow_nan=False)))
    return HFunctionSpec(m, n, upper, lower, prefactor=pref)


@given(specs())
def test_format_parse_round_trip(spec):
    text = format_spec(spec)
    back = parse_spec(text)
    assert back == spec
    assert format_spec(back) == text


def test_format_example():
    spec = HFunctionSpec(1, 1, [(0.5, 1.0)], [(0.0, 1.0), (0.25, 2.0)])
    assert str(spec) == "H[1,1,1,2; 0.5:1; 0:1,0.25:2]"
    assert HFunctionSpec.parse(" H[1, 1, 1, 2 ;0.5:1 ; 0:1 , 0.25:2] ") == spec


def test_empty_rows_and_prefactor():
    spec = parse_spec("2.5*H[1,0,0,1; ; 0:1]")
    assert spec.p == 0 and spec.prefactor == 2.5
    assert parse_spec("H[1,0,0,1; -; 0:1]") == HFunctionSpec(1, 0, [], [(0.0, 1.0)])


@pytest.mark.parametrize(
    "text",
    [
        "H[1,0,0,1; 0:1]",  # missing row section
        "H[1,0,0; ; 0:1]",  # three orders
        "H[1,0,0,1; ; 0:1",  # unclosed
        "H[1,0,0,1; ; 0-1]",  # bad pair separator
        "H[1,0,0,1; ; 0:x]",  # bad number
        "H[1.5,0,0,1; ; 0:1]",  # non-integer order
        "H[1,0,1,1; ; 0:1]",  # p disagrees with the row
        "H[2,0,0,1; ; 0:1]",  # m > q
        "H[1,0,0,1; ; 0:-1]",  # non-positive B
        "G[1,0,0,1; ; 0:1]",
    ],
)
def test_grammar_errors(text):
    with pytest.raises(InvalidParams):
        parse_spec(text)


def test_omega_and_mu():
    spec = HFunctionSpec(2, 1, [(1, 0.5), (0, 0.25)], [(0, 1.0), (0, 2.0), (0, 0.75)])
    assert spec.mu == pytest.approx(3.75 - 0.75)
    assert spec.omega == pytest.approx(3.0 - 0.75 + 0.5 - 0.25)


@pytest.mark.parametrize("alpha,theta,beta", [(1.5, 0.3, 0.8), (0.7, -0.2, 0.5), (2.0, 0.0, 1.0)])
def test_space_time_spec_omega(alpha, theta, beta):
    # counted by hand from the rows with the m=2, n=1 split
    assert space_time_spec(alpha, theta, beta).omega == pytest.approx((2 - beta + theta) / alpha, rel=1e-14)


# elementary closed forms --------------------------------------------------------------------


def test_exponential():
    assert np.allclose(h_eval(HFunctionSpec(1, 0, [], [(0.0, 1.0)]), X), np.exp(-X), rtol=0, atol=1e-13)


def test_power_times_exponential():
    got = h_eval(HFunctionSpec(1, 0, [], [(0.7, 1.0)]), X)
    assert np.allclose(got, X**0.7 * np.exp(-X), rtol=0, atol=1e-13)


def test_gaussian_from_halved_B():
    got = h_eval(HFunctionSpec(1, 0, [], [(0.0, 0.5)]), X)
    assert np.allclose(got, 2 * np.exp(-(X**2)), rtol=1e-12, atol=1e-13)


def test_right_side_series():
    # mu < 0: x^(a-1) exp(-1/x)
    got = h_eval(HFunctionSpec(0, 1, [(0.3, 1.0)], []), X)
    assert np.allclose(got, X ** (0.3 - 1) * np.exp(-1 / X), rtol=0, atol=1e-12)


def test_binomial():
    got = h_eval(HFunctionSpec(1, 1, [(-0.5, 1.0)], [(0.0, 1.0)]), X)
    assert np.allclose(got, G(1.5) * (1 + X) ** -1.5, rtol=1e-12, atol=1e-13)


def test_neutral_case_on_both_sides_of_radius():
    # mu = 0: x^b (1-x)^(a-b-1) / Gamma(a-b) on (0,1), zero beyond
    spec = HFunctionSpec(1, 0, [(2.7, 1.0)], [(0.5, 1.0)])
    assert spec.mu == 0 and spec.radius == 1.0
    x = np.array([0.1, 0.4, 0.8, 1.5, 3.0])
    exact = np.where(x < 1, x**0.5 * np.clip(1 - x, 0, None) ** 1.2 / G(2.2), 0.0)
    assert np.allclose(h_eval(spec, x), exact, rtol=0, atol=1e-12)


@pytest.mark.parametrize("label,spec,rho,mu", elementary_h_corpus())
def test_corpus_scalar_vs_contour(label, spec, rho, mu):
    for x in (0.2, 1.0, 3.0):
        series = h_eval(spec, x)
        direct = spec.prefactor * h_contour_integral(spec, x)
        assert abs(series - direct) < 1e-10, label


@given(delta=st.floats(0.3, 3.0), x=st.floats(0.05, 4.0))
def test_scaling_identity(delta, x):
    spec = HFunctionSpec(1, 1, [(0.2, 0.8)], [(0.3, 1.1)])
    assert abs(h_eval(h_scale(spec, delta), x) - h_eval(spec, x**delta)) < 1e-11


def test_scaling_rejects_bad_exponent():
    with pytest.raises(InvalidParams):
        h_scale(HFunctionSpec(1, 0, [], [(0, 1)]), 0.0)


def test_random_specs_series_vs_contour():
    rng = np.random.default_rng(20261018)
    for _ in range(12):
        spec = random_h_spec(rng)
        for x in (0.3, 1.7):
            assert abs(h_eval(spec, x) - h_contour_integral(spec, x)) < 1e-9, str(spec)


def test_series_rounding_estimate_is_honest():
    # alternating series for exp(-x): the estimate must cover the actual error
    for x in (2.0, 10.0, 20.0):
        val, rounding = h_series(HFunctionSpec(1, 0, [], [(0.0, 1.0)]), x, "left")
        assert abs(val - math.exp(-x)) <= rounding
    # and h_eval then falls back to the contour integral
    assert h_eval(HFunctionSpec(1, 0, [], [(0.0, 1.0)]), 20.0) == pytest.approx(math.exp(-20), abs=1e-13)


# errors and configuration ----------------------------------------------------------------------


def test_double_poles_raise():
    # Gamma(s)^2: 2 K_0(2 sqrt x), the logarithmic case
    with pytest.raises(PoleCollision, match="order 2"):
        h_series(HFunctionSpec(2, 0, [], [(0.0, 1.0), (0.0, 1.0)]), 0.5, "left")


def test_argument_must_be_positive():
    spec = HFunctionSpec(1, 0, [], [(0.0, 1.0)])
    for bad in (0.0, -1.0, math.nan, math.inf):
        with pytest.raises(InvalidParams):
            h_eval(spec, bad)


def test_tolerance_context():
    spec = HFunctionSpec(1, 0, [], [(0.0, 1.0)])
    with h_tolerance(1e-4):
        assert abs(h_eval(spec, 2.0) - math.exp(-2)) < 1e-4
    with pytest.raises(InvalidParams):
        HConfig(tol=0.0)


# cosine transform ------------------------------------------------------------------------------


def test_cosine_transform_of_exponential():
    # int cos(t) e^-t dt = 1/2
    spec = HFunctionSpec(1, 0, [], [(0.0, 1.0)])
    assert verify_cosine_transform(spec, 1.0, 1.0, 1.0, 1.0) < 1e-10
    assert h_eval(cosine_transform_spec(spec, 1.0, 1.0, 1.0, 1.0), 1.0) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("label,spec,rho,mu", elementary_h_corpus())
@pytest.mark.parametrize("a,k", [(1.0, 0.5), (2.0, 1.7)])
def test_cosine_transform_corpus(label, spec, rho, mu, a, k):
    assert verify_cosine_transform(spec, rho, mu, a, k) < 1e-8, label


def test_cosine_transform_conditions():
    spec = HFunctionSpec(1, 0, [], [(0.0, 1.0)])
    with pytest.raises(InvalidParams):
        verify_cosine_transform(spec, -0.5, 1.0, 1.0, 1.0)
    with pytest.raises(InvalidParams):
        cosine_transform_spec(spec, 1.0, 1.0, 1.0, 0.0)
