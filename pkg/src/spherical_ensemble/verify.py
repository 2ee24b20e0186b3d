"""Self-checks grouped into suites, each yielding ``Check(name, status, value, tolerance)``.

``value`` is the worst observed error (or the statistic) and ``status`` is PASS
when it is within ``tolerance``.  The geometry suite accepts a multiplicative
perturbation of g so that callers can confirm the checks actually bite.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import sphere_geometry as geo
from .dpp_sampler import SamplerConfig, conditional_intensity, GramState, intensity_uniformity_test, sample, stream
from .ensemble_kernel import (
    kernel_sphere,
    lifted_complex,
    make_params,
    normalized_kernel_sq,
    prop7_lower_bound,
)
from .riesz_energy import (
    continuous_energy,
    cor1_coefficient,
    cor1_expression,
    harmonic_coefficient,
    optimal_C,
    optimal_tau,
    th2_bound,
    tau_window,
)
from .special_functions import (
    beta,
    beta_inequality_residual,
    inverse_regularized_incomplete_beta_pair,
    regularized_incomplete_beta_complement,
    regularized_incomplete_beta,
    techlemma_f,
)

SUITES = ("beta", "geometry", "kernel", "sampler", "energy")


@dataclass
class Check:
    name: str
    status: str
    value: float
    tolerance: float

    @property
    def passed(self):
        return self.status == "PASS"

    def line(self):
        return f"{self.name} {self.status} {self.value:.6g} {self.tolerance:.6g}"


def _at_most(name, value, tol):
    value = float(value)
    return Check(name, "PASS" if value <= tol else "FAIL", value, tol)


def _at_least(name, value, tol):
    value = float(value)
    return Check(name, "PASS" if value >= tol else "FAIL", value, tol)


def random_sphere_points(rng, n, d, max_last=0.95):
    """Uniform points on S^{2d} conditioned on ``|p_{2d+1}| <= max_last``."""
    out = []
    while len(out) < n:
        x = rng.standard_normal((2 * n, 2 * d + 1))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        out.extend(x[np.abs(x[:, -1]) <= max_last])
    return np.array(out[:n])


# -- beta ---------------------------------------------------------------------


def residual_grid():
    return np.round(np.arange(1, 1000) * 1e-3, 3)


def beta_suite(rng):
    checks = []
    s = residual_grid()
    worst = min(float(np.min(beta_inequality_residual(s, d))) for d in range(1, 13))
    checks.append(_at_least("beta.residual_nonnegative", worst, -1e-12))
    ends = max(abs(beta_inequality_residual(e, d)) for e in (0.0, 1.0) for d in range(1, 13))
    checks.append(_at_most("beta.residual_endpoints", ends, 0.0))
    worst = min(float(np.min(techlemma_f(s, d))) for d in range(1, 13))
    checks.append(_at_least("beta.techlemma_nonnegative", worst, -1e-12))

    x = rng.random(200)
    a = rng.uniform(0.5, 40, 200)
    b = rng.uniform(0.5, 40, 200)
    err = 0.0
    for xi, ai, bi in zip(x, a, b):
        ref = special.betainc(ai, bi, xi)
        if ref > 1e-280:
            err = max(err, abs(regularized_incomplete_beta(xi, ai, bi) - ref) / ref)
    checks.append(_at_most("beta.forward_vs_reference", err, 1e-12))

    err = 0.0
    for ai, bi in zip(a[:50], b[:50]):
        y = rng.random(20)
        xx, xc = inverse_regularized_incomplete_beta_pair(y, ai, bi)
        back = np.where(
            y <= 0.5,
            regularized_incomplete_beta(xx, ai, bi),
            1.0 - regularized_incomplete_beta_complement(xx, ai, bi),
        )
        err = max(err, float(np.max(np.abs(back - y))))
    checks.append(_at_most("beta.inverse_round_trip", err, 1e-10))

    mismatches = 0
    for d in range(1, 7):
        pts = np.zeros((len(s), 2 * d + 1))
        pts[:, -1] = 2 * s - 1
        pts[:, 0] = np.sqrt(1 - pts[:, -1] ** 2)
        ok = (s > 0.0005) & (s < 0.9995)
        tan, rad = geo.dphi_norms(pts[ok], d)
        res = beta_inequality_residual(s[ok], d)
        mismatches += int(np.sum((tan - rad >= -1e-12 * np.maximum(tan, rad)) != (res >= -1e-12)))
    checks.append(_at_most("beta.derivative_inequality_equivalence", mismatches, 0))
    return checks


# -- geometry -----------------------------------------------------------------


def ode_residual(g, t, d, h=1e-5):
    """``g' g^{2d-1} / (g^2+1)^{2d} - d B(d,d) t^{2d-1} / (1+t^2)^{d+1}`` with g' by central differences."""
    gp = (g(t + h, d) - g(t - h, d)) / (2 * h)
    gt = g(t, d)
    lhs = gp * gt ** (2 * d - 1) / (gt * gt + 1) ** (2 * d)
    rhs = d * beta(d, d) * t ** (2 * d - 1) / (1 + t * t) ** (d + 1)
    return np.abs(lhs - rhs)


def fd_jacobian_stereographic(p, h=1e-6):
    frame = geo.tangent_frame(p)
    cols = [(geo.stereographic(geo.geodesic(p, v, h)) - geo.stereographic(geo.geodesic(p, v, -h))) / (2 * h) for v in frame]
    return abs(np.linalg.det(np.column_stack(cols)))


def fd_jacobian_radial_inverse(y, d, h=1e-6):
    cols = []
    for k in range(len(y)):
        e = np.zeros_like(y)
        e[k] = h
        cols.append((geo.radial_map_inverse(y + e, d) - geo.radial_map_inverse(y - e, d)) / (2 * h))
    return abs(np.linalg.det(np.column_stack(cols)))


def fd_directional_norm(p, v, d, h=1e-5):
    return np.linalg.norm(geo.lift(geo.geodesic(p, v, h), d) - geo.lift(geo.geodesic(p, v, -h), d)) / (2 * h)


def geometry_suite(rng, g_perturbation=0.0, n_points=100, dims=(1, 2, 3)):
    def g(t, d):
        return geo.g_forward(t, d) * (1.0 + g_perturbation)

    checks = []
    t = np.linspace(0.05, 20, 400)
    worst = max(float(np.max(ode_residual(g, t, d))) for d in range(1, 7))
    checks.append(_at_most("geometry.ode_residual", worst, 1e-6))

    tl = np.logspace(-3, 3, 400)
    checks.append(_at_most("geometry.g1_identity", float(np.max(np.abs(g(tl, 1) - tl))), 1e-10))
    worst = max(float(np.max(np.abs(geo.g_inverse(g(tl, d), d) - tl) / tl)) for d in range(1, 13))
    checks.append(_at_most("geometry.g_round_trip", worst, 1e-10))
    worst = min(float(np.min(np.diff(g(t, d)))) for d in range(1, 13))
    checks.append(_at_least("geometry.g_increasing", worst, 1e-300))

    js, jr, tan, rad, order = 0.0, 0.0, 0.0, 0.0, math.inf
    for d in dims:
        pts = random_sphere_points(rng, n_points, d)
        for p in pts:
            exact = geo.jacobian_stereographic(p)
            js = max(js, abs(fd_jacobian_stereographic(p) - exact) / exact)
            y = geo.stereographic(p)
            exact = geo.jacobian_radial_inverse(y, d)
            jr = max(jr, abs(fd_jacobian_radial_inverse(y, d) - exact) / exact)
            t_norm, r_norm = geo.dphi_norms(p, d)
            fd_t = fd_directional_norm(p, geo.horizontal_tangent(p, rng), d)
            fd_r = fd_directional_norm(p, geo.vertical_tangent(p), d)
            tan = max(tan, abs(fd_t - t_norm) / t_norm)
            rad = max(rad, abs(fd_r - r_norm) / r_norm)
            order = min(order, t_norm - r_norm)
    checks.append(_at_most("geometry.jacobian_stereographic_fd", js, 1e-5))
    checks.append(_at_most("geometry.jacobian_radial_inverse_fd", jr, 1e-5))
    checks.append(_at_most("geometry.dphi_tangential_fd", tan, 1e-5))
    checks.append(_at_most("geometry.dphi_radial_fd", rad, 1e-5))
    checks.append(_at_least("geometry.tangential_dominates_radial", order, -1e-12))
    return checks


# -- kernel -------------------------------------------------------------------


def isotropic_ratio_d1(p, q, L):
    """``|K(p, q)| / K(p, p)`` of the spherical ensemble on S^2: ``(1 - |p-q|^2/4)^{L/2}``."""
    return (1.0 - np.sum((p - q) ** 2, axis=-1) / 4.0) ** (L / 2.0)


def kernel_suite(rng, n_points=1000):
    checks = []
    worst = 0.0
    for d in (1, 2, 3):
        pts = random_sphere_points(rng, n_points, d, max_last=0.999)
        for L in range(1, 7):
            params = make_params(d, L)
            scale = geo.sphere_volume(2 * d) / params.N
            for p in pts[:: max(1, n_points // 60)]:
                worst = max(worst, abs(kernel_sphere(p, p, params).modulus * scale - 1.0))
            lp = lifted_complex(pts, d)
            worst = max(worst, float(np.max(np.abs(np.sum(np.abs(lp) ** 2, axis=1) ** L - 1.0))))
    checks.append(_at_most("kernel.homogeneity", worst, 1e-8))

    worst = 0.0
    pts = random_sphere_points(rng, 2 * n_points, 1, max_last=0.999)
    p, q = pts[:n_points], pts[n_points:]
    for L in (1, 3, 6, 12):
        params = make_params(1, L)
        ratio = np.sqrt(normalized_kernel_sq(p, q, params))
        ref = isotropic_ratio_d1(p, q, L)
        worst = max(worst, float(np.max(np.abs(ratio - ref))))
        kd = params.diagonal
        for i in range(0, n_points, 50):
            worst = max(worst, abs(kernel_sphere(p[i], q[i], params).modulus / kd - ref[i]))
    checks.append(_at_most("kernel.d1_isotropic", worst, 1e-10))

    worst = 0.0
    for d in (1, 2, 3):
        params = make_params(d, 4)
        pts = random_sphere_points(rng, 40, d)
        for a, b in zip(pts[:20], pts[20:]):
            k1 = kernel_sphere(a, b, params).value
            k2 = kernel_sphere(b, a, params).value
            worst = max(worst, abs(k1 - np.conj(k2)) / abs(k1))
    checks.append(_at_most("kernel.hermitian", worst, 1e-10))

    worst = 0.0
    for d in (2, 3):
        params = make_params(d, 5)
        pts = random_sphere_points(rng, 400, d)
        worst = max(worst, float(np.max(prop7_lower_bound(pts[:200], pts[200:], params) - normalized_kernel_sq(pts[:200], pts[200:], params))))
    checks.append(_at_most("kernel.lower_bound_below_ratio", worst, 1e-12))
    return checks


# -- sampler ------------------------------------------------------------------


def sampler_suite(rng, configs=100):
    checks = []
    params = make_params(2, 4)
    cfg = SamplerConfig(params, int(rng.integers(2**32)))
    samples = [sample(cfg, r) for r in range(configs)]
    _, pval = intensity_uniformity_test(samples)
    checks.append(_at_least("sampler.uniform_intensity_pvalue", pval, 1e-3))

    again = sample(cfg, 0)
    checks.append(_at_most("sampler.deterministic", float(np.max(np.abs(again.points - samples[0].points))), 0.0))

    state = GramState(params)
    pts = samples[1].points
    for x in pts[:-1]:
        state.append(lifted_complex(x[None, :], 2)[0])
    worst = float(np.max(conditional_intensity(pts[:-1], state))) / params.diagonal
    checks.append(_at_most("sampler.intensity_vanishes_at_accepted", worst, 1e-8))
    last = float(conditional_intensity(pts[-1], state)) / params.diagonal
    checks.append(_at_least("sampler.intensity_positive_at_last", last, 1e-12))
    return checks


# -- energy -------------------------------------------------------------------


def continuous_energy_quadrature(s, n):
    """``V_s(S^n)`` as a 1D integral over the inner product of two uniform points."""
    from scipy import integrate

    w = geo.sphere_volume(n - 1) / geo.sphere_volume(n)
    val, _ = integrate.quad(
        lambda u: u ** (-s / 2) * (u * (2 - u)) ** ((n - 2) / 2) * 2 ** (-s / 2),
        0,
        2,
        epsabs=0,
        epsrel=1e-12,
        limit=200,
    )
    return w * val


def energy_suite(rng):
    checks = []
    worst = 0.0
    for n, s in ((2, 1.0), (4, 2.0), (8, 6.0), (3, 0.5), (6, 5.5)):
        worst = max(worst, abs(continuous_energy(s, n) / continuous_energy_quadrature(s, n) - 1))
    checks.append(_at_most("energy.continuous_energy_quadrature", worst, 1e-9))

    gap = math.inf
    for d in (2, 3, 4):
        for L in (2, 8, 20):
            params = make_params(d, L)
            s = 1.0
            tau = optimal_tau(params, s)
            gap = min(gap, params.N**2 * continuous_energy(s, 2 * d) - th2_bound(params, s, tau))
            for t in np.linspace(0.05, 0.999, 7) * tau_window(d):
                gap = min(gap, th2_bound(params, s, t) - th2_bound(params, s, tau) + 1e-9 * params.N**2)
    checks.append(_at_least("energy.th2_bound_below_and_optimal", gap, 0.0))

    checks.append(_at_most("energy.cor1_consistency", abs(cor1_expression(3, 2, optimal_C(3, 2)) / cor1_coefficient(3, 2) - 1), 1e-10))
    margin = harmonic_coefficient(8, 6) - cor1_coefficient(4, 6)
    checks.append(_at_least("energy.harmonic_beats_generalized_8_6", margin, 1e-300))
    return checks


def run_suite(name, seed=0, **kwargs):
    """Run one suite (or ``all``) and return the list of checks."""
    if name == "all":
        return [c for s in SUITES for c in run_suite(s, seed)]
    table = {
        "beta": beta_suite,
        "geometry": geometry_suite,
        "kernel": kernel_suite,
        "sampler": sampler_suite,
        "energy": energy_suite,
    }
    if name not in table:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return table[name](stream(seed, SUITES.index(name)), **kwargs)
