import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spherical_ensemble.errors import DomainError
from spherical_ensemble.special_functions import (
    beta,
    beta_inequality_residual,
    incomplete_beta,
    inverse_regularized_incomplete_beta,
    inverse_regularized_incomplete_beta_pair,
    ln_gamma,
    regularized_incomplete_beta,
    regularized_incomplete_beta_complement,
    techlemma_f,
)

mpmath.mp.dps = 40

shapes = st.floats(0.3, 60.0)
unit = st.floats(0.0, 1.0)


def quad_incomplete_beta(x, a, b):
    """Adaptive-quadrature oracle for B_x(a, b), split at x/2 to resolve the endpoint behavior."""
    f = lambda t: t ** (a - 1) * (1 - t) ** (b - 1)
    return float(mpmath.quad(f, [0, mpmath.mpf(x) / 2, x]))


# -- ln_gamma / beta ----------------------------------------------------------


def test_ln_gamma_known_values():
    assert ln_gamma(1.0) == 0.0
    assert ln_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)
    assert ln_gamma(10.0) == pytest.approx(math.log(math.factorial(9)), rel=1e-14)
    assert ln_gamma(10.0) == pytest.approx(12.8018274801, abs=1e-10)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_ln_gamma_rejects_nonpositive(x):
    with pytest.raises(DomainError):
        ln_gamma(x)


def test_beta_known_values():
    assert beta(1, 1) == pytest.approx(1.0, rel=1e-15)
    assert beta(2, 2) == pytest.approx(1 / 6, rel=1e-15)
    ref = float(mpmath.quad(lambda t: t**2.5 * (1 - t) ** 1.2, [0, 1]))
    assert beta(3.5, 2.2) == pytest.approx(ref, rel=1e-13)


def test_beta_large_shapes_do_not_overflow():
    assert beta(50, 50) > 0
    assert math.isfinite(beta(300, 200))


# -- forward incomplete beta --------------------------------------------------


def test_incomplete_beta_examples():
    assert incomplete_beta(0.3, 1, 1) == pytest.approx(0.3, abs=1e-15)
    for a, b in [(2, 3), (0.5, 0.5), (7.5, 1.2)]:
        assert incomplete_beta(1.0, a, b) == pytest.approx(beta(a, b), rel=1e-14)
    assert incomplete_beta(0.4, 3, 3) == pytest.approx(quad_incomplete_beta(0.4, 3, 3), abs=1e-14)


def test_regularized_examples():
    for d in range(1, 20):
        assert regularized_incomplete_beta(0.5, d, d) == pytest.approx(0.5, abs=1e-14)
    assert regularized_incomplete_beta(1.0, 3.3, 0.7) == 1.0
    assert regularized_incomplete_beta(0.0, 3.3, 0.7) == 0.0
    assert regularized_incomplete_beta(0.25, 2, 2) == pytest.approx(quad_incomplete_beta(0.25, 2, 2) * 6, rel=1e-14)


@pytest.mark.parametrize("x", [-0.1, 1.1, float("nan")])
def test_incomplete_beta_rejects_outside_unit_interval(x):
    with pytest.raises(DomainError):
        regularized_incomplete_beta(x, 2, 2)


def test_shape_parameters_must_be_positive():
    with pytest.raises(DomainError):
        regularized_incomplete_beta(0.5, 0, 2)
    with pytest.raises(DomainError):
        beta(1, -2)


@settings(max_examples=60, deadline=None)
@given(x=st.floats(1e-4, 1 - 1e-4), a=shapes, b=shapes)
def test_incomplete_beta_matches_quadrature_oracle(x, a, b):
    ref = quad_incomplete_beta(x, a, b)
    if ref < 1e-250:
        return
    assert incomplete_beta(x, a, b) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(x=unit, a=shapes, b=shapes)
def test_regularized_matches_mpmath(x, a, b):
    ref = float(mpmath.betainc(a, b, 0, x, regularized=True))
    got = regularized_incomplete_beta(x, a, b)
    assert got == pytest.approx(ref, rel=1e-12, abs=1e-300)


@settings(max_examples=50, deadline=None)
@given(a=shapes, b=shapes)
def test_reflection_identity_on_grid(a, b):
    x = np.linspace(0, 1, 1000)
    lhs = regularized_incomplete_beta(x, a, b) + regularized_incomplete_beta(1 - x, b, a)
    assert np.max(np.abs(lhs - 1)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(a=shapes, b=shapes)
def test_regularized_is_monotone(a, b):
    vals = regularized_incomplete_beta(np.linspace(0, 1, 500), a, b)
    assert np.all(np.diff(vals) >= 0)


def test_complement_is_accurate_in_the_upper_tail():
    x, a, b = 0.999, 3.0, 40.0
    ref = float(mpmath.betainc(a, b, x, 1, regularized=True))
    assert regularized_incomplete_beta_complement(x, a, b) == pytest.approx(ref, rel=1e-12)


def test_array_and_scalar_inputs():
    xs = np.array([[0.1, 0.2], [0.3, 0.9]])
    out = regularized_incomplete_beta(xs, 2.5, 4.0)
    assert out.shape == xs.shape
    assert isinstance(regularized_incomplete_beta(0.1, 2.5, 4.0), float)
    assert out[0, 1] == regularized_incomplete_beta(0.2, 2.5, 4.0)


# -- inverse ------------------------------------------------------------------


def test_inverse_examples():
    assert inverse_regularized_incomplete_beta(0.0, 3, 3) == 0.0
    assert inverse_regularized_incomplete_beta(1.0, 3, 3) == 1.0
    for d in range(1, 15):
        assert inverse_regularized_incomplete_beta(0.5, d, d) == pytest.approx(0.5, abs=1e-14)
    assert inverse_regularized_incomplete_beta(0.5, 1, 1) == pytest.approx(0.5, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(y=unit, a=shapes, b=shapes)
def test_inverse_hits_target_in_probability_space(y, a, b):
    x, xc = inverse_regularized_incomplete_beta_pair(y, a, b)
    if x == 0.0:
        assert y == 0.0 or (math.log(y) + math.log(a) + math.log(beta(a, b))) / a < -740
        return
    if y <= 0.5:
        assert abs(regularized_incomplete_beta(x, a, b) - y) <= 1e-12
    else:
        assert abs(regularized_incomplete_beta_complement(x, a, b) - (1 - y)) <= 1e-12
    assert x + xc == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(x=st.floats(1e-6, 1 - 1e-6), a=shapes, b=shapes)
def test_forward_then_inverse_round_trip(x, a, b):
    arr = np.array([x])
    val = regularized_incomplete_beta(arr, a, b)
    comp = regularized_incomplete_beta_complement(arr, a, b)
    if val[0] == 0.0 or comp[0] == 0.0:
        return  # the target underflows, so no inverse can recover x
    back, _ = inverse_regularized_incomplete_beta_pair(val, a, b, comp)
    assert abs(back[0] - x) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(a=shapes, b=shapes)
def test_inverse_strictly_increasing(a, b):
    y = np.linspace(0.01, 0.99, 99)
    assert np.all(np.diff(inverse_regularized_incomplete_beta(y, a, b)) > 0)


# -- the sharp inequality -----------------------------------------------------


def test_residual_endpoints_are_exact_zero():
    for d in range(1, 13):
        assert beta_inequality_residual(0.0, d) == 0.0
        assert beta_inequality_residual(1.0, d) == 0.0


def test_residual_half_d1():
    assert beta_inequality_residual(0.5, 1) == pytest.approx(0.5 * math.sqrt(0.5) - 0.25, abs=1e-15)
    assert beta_inequality_residual(0.5, 1) == pytest.approx(0.103553, abs=1e-6)


def residual_oracle(s, d):
    s = mpmath.mpf(s)
    val = mpmath.betainc(d, d, 0, s, regularized=True)
    return d * val * mpmath.beta(d, d) * mpmath.sqrt(1 - val ** (mpmath.mpf(1) / d)) - (s * (1 - s)) ** d


@settings(max_examples=80, deadline=None)
@given(s=st.floats(1e-3, 1 - 1e-3), d=st.integers(1, 12))
def test_residual_matches_high_precision_oracle(s, d):
    ref = residual_oracle(s, d)
    got = beta_inequality_residual(s, d)
    # near s = 0 both terms are O(s^d) and cancel, so compare at that scale
    scale = max(abs(float(ref)), float((mpmath.mpf(s) * (1 - mpmath.mpf(s))) ** d))
    assert abs(got - float(ref)) <= 1e-12 * scale


def test_residual_nonnegative_on_grid():
    s = np.arange(1, 1000) * 1e-3
    for d in range(1, 13):
        r = beta_inequality_residual(s, d)
        assert np.all(r >= -1e-12)
        assert np.all(r > 0)


def test_techlemma_examples():
    assert techlemma_f(0.5, 1) == pytest.approx(0.5 - math.sqrt(3) / 4, abs=1e-15)
    assert techlemma_f(0.5, 1) == pytest.approx(0.066987, abs=1e-6)
    assert techlemma_f(0.9, 3) >= 0
    assert abs(techlemma_f(1e-9, 4)) < 1e-30


def test_techlemma_nonnegative_on_grid():
    s = np.arange(1, 1000) * 1e-3
    for d in range(1, 13):
        assert np.all(techlemma_f(s, d) >= -1e-12)
