import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.stats import special_ortho_group

from oracles import (
    harmonic_coefficient_reference,
    importance_pair_energy_mc,
    projective_coefficient_reference,
    two_point_expected_energy,
    uniform_pair_energy_mc,
)
from spherical_ensemble.dpp_sampler import SamplerConfig, sample
from spherical_ensemble.ensemble_kernel import make_params
from spherical_ensemble.errors import CoincidentPointsError, DomainError, MonteCarloAborted
from spherical_ensemble.riesz_energy import (
    bound_report,
    continuous_energy,
    cor1_coefficient,
    cor1_expression,
    expected_energy_mc,
    gap_ratio_trend,
    harmonic_coefficient,
    normalized_kernel_integral_mc,
    optimal_C,
    optimal_tau,
    prop10_lower_bound,
    projective_2energy_coefficient,
    riesz_energy,
    tau_window,
    th2_bound,
    th2_subtracted,
)
from spherical_ensemble.sphere_geometry import sphere_volume


# -- discrete energy ----------------------------------------------------------


def test_energy_examples():
    assert riesz_energy(np.array([[0, 0, 1.0], [0, 0, -1.0]]), 1.0) == pytest.approx(1.0, rel=1e-15)
    ang = 2 * math.pi * np.arange(3) / 3
    tri = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(3)])
    assert riesz_energy(tri, 2.0) == pytest.approx(2.0, rel=1e-14)


def test_energy_matches_naive_double_loop():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((10, 5))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    for s in (0.5, 1.0, 3.0):
        naive = sum(np.linalg.norm(x[i] - x[j]) ** (-s) for i in range(10) for j in range(10) if i != j)
        assert riesz_energy(x, s) == pytest.approx(naive, rel=1e-12)


def test_energy_errors_and_configuration_input():
    with pytest.raises(CoincidentPointsError):
        riesz_energy(np.array([[1.0, 0, 0], [1.0, 0, 0]]), 1.0)
    with pytest.raises(DomainError):
        riesz_energy(np.eye(3), 0.0)
    cfg = sample(SamplerConfig(make_params(1, 3), 0))
    assert riesz_energy(cfg, 1.0) == riesz_energy(cfg.points, 1.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), s=st.floats(0.1, 6.0), dim=st.sampled_from([3, 5, 7]))
def test_energy_rotation_invariant(seed, s, dim):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((12, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    rot = special_ortho_group.rvs(dim, random_state=rng)
    assert riesz_energy(x @ rot.T, s) == pytest.approx(riesz_energy(x, s), rel=1e-10)


def test_energy_decreases_as_a_pair_separates():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((8, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x[1] = x[0] + 1e-3 * rng.standard_normal(3)
    x[1] /= np.linalg.norm(x[1])
    energies = []
    target = -x[0]
    for t in np.linspace(0.0, 0.3, 10):
        y = x.copy()
        y[1] = x[1] + t * (target - x[1])
        y[1] /= np.linalg.norm(y[1])
        energies.append(riesz_energy(y, 1.0))
    assert np.all(np.diff(energies) < 0)


# -- continuous energy --------------------------------------------------------


def test_continuous_energy_examples():
    assert continuous_energy(1.0, 2) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(DomainError):
        continuous_energy(2.0, 2)
    with pytest.raises(DomainError):
        continuous_energy(0.0, 2)


def quad_continuous_energy(s, n):
    """E|p - q|^{-s} from the distribution of the inner product of two uniform points."""
    w = sphere_volume(n - 1) / sphere_volume(n)
    # (2 - 2t)^(-s/2) (1 - t^2)^((n-2)/2) with both endpoint powers handed to the algebraic-weight rule
    val, _ = integrate.quad(
        lambda t: 2 ** (-s / 2), -1, 1, weight="alg", wvar=((n - 2) / 2, (n - 2 - s) / 2), epsabs=0, epsrel=1e-12
    )
    return w * val


@pytest.mark.parametrize("n,s", [(2, 1e-6), (2, 0.3), (2, 1.7), (4, 2.0), (5, 4.5), (8, 6.0), (16, 3.0)])
def test_continuous_energy_matches_quadrature(n, s):
    assert continuous_energy(s, n) == pytest.approx(quad_continuous_energy(s, n), rel=1e-9)


@pytest.mark.parametrize("n,s", [(2, 1.0), (4, 2.0)])
def test_continuous_energy_matches_pair_monte_carlo(n, s):
    est, _ = uniform_pair_energy_mc(s, n, 10_000_000, np.random.default_rng(n))
    assert est == pytest.approx(continuous_energy(s, n), rel=5e-3)


def test_continuous_energy_heavy_tail_case_by_importance_sampling():
    est, err = importance_pair_energy_mc(6.0, 8, 10_000_000, np.random.default_rng(8))
    v = continuous_energy(6.0, 8)
    assert est == pytest.approx(v, rel=5e-3)
    assert err < 1e-3 * v


# -- bounds -------------------------------------------------------------------


def test_th2_rejects_d1_and_bad_tau():
    with pytest.raises(DomainError):
        th2_bound(make_params(1, 5), 1.0, 0.1)
    params = make_params(2, 8)
    for tau in (0.0, -0.1, 1 - 1 / math.sqrt(2), 0.5):
        with pytest.raises(DomainError):
            th2_bound(params, 1.0, tau)
    with pytest.raises(DomainError):
        th2_bound(params, 4.0, 0.1)
    # inside the tau range but the contraction base is nonpositive
    with pytest.raises(DomainError):
        th2_bound(params, 1.0, 0.5 * (tau_window(2) + 1 - 1 / math.sqrt(2)))


@settings(max_examples=60, deadline=None)
@given(d=st.integers(2, 8), L=st.integers(0, 60), frac=st.floats(0.01, 0.99), sfrac=st.floats(0.01, 0.99))
def test_th2_subtracted_term_positive(d, L, frac, sfrac):
    params = make_params(d, L)
    s = 2 * d * sfrac
    tau = frac * tau_window(d)
    assert th2_subtracted(params, s, tau) > 0
    # strictness lives in the line above; the difference can fall below the rounding of N^2 V_s
    assert th2_bound(params, s, tau) <= params.N**2 * continuous_energy(s, 2 * d)


def test_optimal_tau_beats_grid():
    for d, L, s in [(2, 8, 1.0), (3, 5, 2.5), (6, 20, 1.0)]:
        params = make_params(d, L)
        best = th2_bound(params, s, optimal_tau(params, s))
        for tau in np.linspace(0.001, 0.999, 300) * tau_window(d):
            assert best <= th2_bound(params, s, tau) + 1e-12 * abs(best)


def test_th2_at_fixed_tau_below_continuous():
    params = make_params(2, 8)
    assert th2_bound(params, 1.0, 0.1) < params.N**2 * continuous_energy(1.0, 4)


def test_optimal_C():
    assert optimal_C(2, 2) == pytest.approx(0.5)
    assert optimal_C(4, 0) == pytest.approx(3.0)
    assert optimal_C(1, 0.5) == 0.0
    d, s = 3, 1.5
    c = np.linspace(1e-3, 10, 200_001)
    f = c ** (d - s / 2) * np.exp(-d * c / (d - 1))
    assert c[np.argmax(f)] == pytest.approx(optimal_C(d, s), abs=1e-4)


def test_cor1_coefficient():
    for d in range(2, 9):
        for s in np.linspace(0.05, 0.95, 7) * 2 * d:
            assert cor1_coefficient(d, s) > 0
    assert cor1_expression(3, 2, optimal_C(3, 2)) == pytest.approx(cor1_coefficient(3, 2), rel=1e-10)
    with pytest.raises(DomainError):
        cor1_coefficient(1, 1.0)
    assert cor1_coefficient(4, 6) < harmonic_coefficient(8, 6)


def test_cor1_expression_maximized_at_optimal_C():
    for d, s in [(2, 1.0), (5, 3.0)]:
        c0 = optimal_C(d, s)
        for c in (0.5 * c0, 0.9 * c0, 1.1 * c0, 2 * c0):
            assert cor1_expression(d, s, c) < cor1_expression(d, s, c0)


def test_harmonic_coefficient():
    for dim in range(2, 12):
        for s in np.linspace(0.1, 0.9, 5) * dim:
            c = harmonic_coefficient(dim, s)
            assert c > 0
            assert c == pytest.approx(harmonic_coefficient_reference(dim, s), rel=1e-12)
    assert harmonic_coefficient(8, 6) > cor1_coefficient(4, 6)
    with pytest.raises(DomainError):
        harmonic_coefficient(4, 4.0)


def test_projective_coefficient():
    for d in range(1, 30):
        c = projective_2energy_coefficient(d)
        assert c > 0 and math.isfinite(c)
        assert c == pytest.approx(projective_coefficient_reference(d), rel=1e-12)
    e = 2 / 3
    ref = 3 ** (1 - e) * 1 * 3 * math.sqrt(math.pi) ** (2 - e) / (2 ** (4 - e))
    assert projective_2energy_coefficient(1) == pytest.approx(ref, rel=1e-14)


def test_prop10_bound_below_monte_carlo():
    params = make_params(2, 4)
    bound = prop10_lower_bound(params, 1.0, 0.3, 0.2)
    est, err = normalized_kernel_integral_mc(params, 1.0, 400_000, seed=1)
    assert bound > 0
    assert est + 3 * err >= bound


def test_prop10_domain():
    with pytest.raises(DomainError):
        prop10_lower_bound(make_params(2, 4), 1.0, 0.6, 0.5)


def test_bound_report():
    r = bound_report(make_params(2, 8), 1.0)
    assert r.th2_bound <= r.n2_v_s
    assert r.C_opt == pytest.approx(0.75)
    r1 = bound_report(make_params(1, 8), 1.0)
    assert math.isnan(r1.th2_bound) and math.isnan(r1.cor1_coefficient)
    assert r1.C_opt == 0.0


# -- Monte-Carlo expected energy ---------------------------------------------


def test_two_point_oracle_closed_form():
    assert two_point_expected_energy(1.0) == pytest.approx(4 / 3, rel=1e-9)


def test_two_point_expected_energy_mc():
    config = SamplerConfig(make_params(1, 1), 17)
    est = expected_energy_mc(config, 1.0, 4000)
    exact = two_point_expected_energy(1.0)
    assert abs(est.mean - exact) <= 3 * est.stderr
    assert len(est.values) == 4000


def test_expected_energy_mc_is_deterministic_and_worker_independent():
    config = SamplerConfig(make_params(2, 3), 5)
    a = expected_energy_mc(config, 1.0, 6)
    b = expected_energy_mc(config, 1.0, 6, workers=2)
    assert a.values == b.values


def test_expected_energy_mc_errors():
    config = SamplerConfig(make_params(2, 6), 3, max_rejections_per_point=1)
    with pytest.raises(ValueError):
        expected_energy_mc(config, 1.0, 1)
    with pytest.raises(MonteCarloAborted) as info:
        expected_energy_mc(config, 1.0, 5)
    assert isinstance(info.value.partial, list)


def test_mean_below_continuous_energy():
    params = make_params(2, 5)
    est = expected_energy_mc(SamplerConfig(params, 2), 1.0, 100)
    assert est.mean <= params.N**2 * continuous_energy(1.0, 4) + 3 * est.stderr


def test_gap_ratio_trend_rows():
    rows = gap_ratio_trend(2, 1.0, [2, 3], 10, seed=1)
    assert [r["N"] for r in rows] == [6, 10]
    assert all(r["ratio"] > 0 for r in rows)
