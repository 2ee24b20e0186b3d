"""Riesz s-energy of point sets, the continuous energy V_s, and the bounds built on them.

The expected energy of the ensemble decomposes as

    E[E_s] = N^2 V_s(S^{2d}) - N^2/Vol^2 * ∫∫ (|K(p,q)| / K(p,p))^2 |p - q|^{-s} dp dq,

and every bound here is a lower bound on that double integral.  The bound
formulas assume ``d >= 2``: at d = 1 the admissible window for ``tau`` is empty
and the asymptotic coefficient degenerates to zero, so those surfaces raise.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.spatial.distance import pdist

from .dpp_sampler import Configuration, sample, stream, uniform_sphere
from .ensemble_kernel import make_params, normalized_kernel_sq
from .errors import CoincidentPointsError, DomainError, MonteCarloAborted
from .sphere_geometry import sphere_volume, sublevel_volume

MIN_SEPARATION = 1e-14


def riesz_energy(points, s):
    """``sum_{i != j} |x_i - x_j|^{-s}`` (ordered pairs, so each pair counts twice)."""
    if isinstance(points, Configuration):
        points = points.points
    if not s > 0:
        raise DomainError("Riesz exponent must be positive")
    dist = pdist(np.asarray(points, dtype=float))
    if dist.size and dist.min() <= MIN_SEPARATION:
        raise CoincidentPointsError("configuration has coincident points")
    return 2.0 * math.fsum(dist ** (-s))


def continuous_energy(s, n):
    """``V_s(S^n)``: mean of ``|p - q|^{-s}`` over independent uniform p, q."""
    if not 0 < s < n:
        raise DomainError(f"V_s(S^n) needs 0 < s < n, got s={s}, n={n}")
    return math.exp(
        (n - s - 1) * math.log(2.0)
        + math.lgamma((n + 1) / 2)
        + math.lgamma((n - s) / 2)
        - 0.5 * math.log(math.pi)
        - math.lgamma(n - s / 2)
    )


def _check_bound_args(d, s):
    if d < 2:
        raise DomainError("the energy bounds need d >= 2 (the tau window is empty at d = 1)")
    if not 0 < s < 2 * d:
        raise DomainError(f"need 0 < s < 2d, got s={s}, d={d}")


def cap_factor(d):
    """``1 - e^{-1 + 1/(2d)} / (2 sqrt(1 - 1/(2d)))``."""
    return 1.0 - math.exp(-1.0 + 1.0 / (2 * d)) / (2.0 * math.sqrt(1.0 - 1.0 / (2 * d)))


def _contraction(tau, shift):
    return tau * tau * (1.0 + tau * tau) ** 2 / (1.0 - (shift + tau) ** 2)


def tau_window(d):
    """Supremum of admissible tau: below ``1 - 1/sqrt(d)`` and keeping the contraction base positive."""
    if d < 2:
        raise DomainError("the tau window is empty for d = 1")
    shift = 1.0 / math.sqrt(d)
    top = 1.0 - shift
    return optimize.brentq(lambda t: t * t * (1 + t * t) ** 2 + (shift + t) ** 2 - 1.0, 0.0, top, xtol=1e-15)


def th2_subtracted(params, s, tau):
    """The amount by which the tau-bound sits below ``N^2 V_s``."""
    d, L, N = params.d, params.L, params.N
    _check_bound_args(d, s)
    if not 0 < tau < 1 - 1 / math.sqrt(d):
        raise DomainError(f"tau must lie in (0, 1 - 1/sqrt(d)), got {tau}")
    q = _contraction(tau, 1 / math.sqrt(d))
    if not q < 1:
        raise DomainError(f"tau={tau} makes the contraction base nonpositive")
    return (
        N * N * sphere_volume(2 * d - 1) / ((2 * d - s) * sphere_volume(2 * d))
        * (1 - tau * tau / 4) ** (d - 1)
        * tau ** (2 * d - s)
        * (1 - q) ** L
        * cap_factor(d)
    )


def th2_bound(params, s, tau):
    """Upper bound for the expected Riesz s-energy at a fixed admissible tau."""
    return params.N**2 * continuous_energy(s, 2 * params.d) - th2_subtracted(params, s, tau)


def optimal_tau(params, s):
    """The admissible tau minimizing :func:`th2_bound`."""
    d, L = params.d, params.L
    _check_bound_args(d, s)
    top = tau_window(d)
    shift = 1 / math.sqrt(d)

    def neg_log(t):
        return -((2 * d - s) * math.log(t) + (d - 1) * math.log1p(-t * t / 4) + L * math.log1p(-_contraction(t, shift)))

    grid = np.linspace(top * 1e-3, top * (1 - 1e-9), 2001)
    vals = [neg_log(t) for t in grid]
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(neg_log, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    return float(res.x) if res.fun <= vals[i] else float(grid[i])


def optimal_C(d, s):
    """Maximizer of ``C -> C^{d - s/2} exp(-dC/(d-1))``: ``(d - 1)(1 - s/(2d))``."""
    return d - 1 - (d - 1) * s / (2 * d)


def cor1_expression(d, s, C):
    """Coefficient of ``N^{1+s/(2d)}`` obtained with ``tau = sqrt(C/L)`` before optimizing C."""
    _check_bound_args(d, s)
    return (
        sphere_volume(2 * d - 1)
        / (sphere_volume(2 * d) * (2 * d - s) * math.factorial(d) ** (1 - s / (2 * d)))
        * C ** (d - s / 2)
        * math.exp(-d * C / (d - 1))
        * cap_factor(d)
    )


def cor1_coefficient(d, s):
    """Asymptotic gap coefficient of the generalized spherical ensemble."""
    _check_bound_args(d, s)
    base = (2 * d - s) * (1 - 1 / d) / (2 * math.e)
    return (
        sphere_volume(2 * d - 1)
        * base ** (d - s / 2)
        / ((2 * d - s) * sphere_volume(2 * d) * math.factorial(d) ** (1 - s / (2 * d)))
        * cap_factor(d)
    )


def harmonic_coefficient(dim, s):
    """Gap coefficient of ``N^{1+s/dim}`` for the harmonic ensemble on S^dim."""
    if not 0 < s < dim:
        raise DomainError(f"need 0 < s < dim, got s={s}, dim={dim}")
    lg = math.lgamma
    log_c = (
        (s - s / dim) * math.log(2)
        + math.log(continuous_energy(s, dim))
        + math.log(dim)
        + lg(1 + dim / 2)
        + lg((1 + s) / 2)
        + lg(dim - s / 2)
        - 0.5 * math.log(math.pi)
        - lg(1 + s / 2)
        - lg(1 + (s + dim) / 2)
        - (1 - s / dim) * lg(dim + 1)
    )
    return math.exp(log_c)


def projective_2energy_coefficient(d):
    """Gap coefficient for the 2-energy of the projective ensemble (odd-dimensional spheres)."""
    if d < 1:
        raise DomainError("d must be >= 1")
    e = 2 / (2 * d + 1)
    return (
        3 ** (1 - e)
        * (2 * d - 1) ** (1 - e)
        * (2 * d + 1)
        * math.gamma(d - 0.5) ** (2 - e)
        / (2 ** (4 - e) * math.factorial(d) ** (2 - 2 * e))
    )


def prop10_lower_bound(params, s, eps, tau):
    """Closed-form lower bound for ``∫∫ (|K|/K_diag)^2 |p-q|^{-s}``."""
    d, L = params.d, params.L
    if not (0 < eps < 1 and 0 < tau < 1 and eps + tau < 1):
        raise DomainError("need eps, tau in (0, 1) with eps + tau < 1")
    if not 0 < s < 2 * d:
        raise DomainError("need 0 < s < 2d")
    q = _contraction(tau, eps)
    base = max(1.0 - q, 0.0)
    return (
        sublevel_volume(eps, d)
        * sphere_volume(2 * d - 1)
        / (2 * d - s)
        * (1 - tau * tau / 4) ** (d - 1)
        * tau ** (2 * d - s)
        * base**L
    )


def normalized_kernel_integral_mc(params, s, n_pairs, seed, batch=200_000):
    """Uniform-pair Monte-Carlo estimate of ``∫∫ (|K|/K_diag)^2 |p-q|^{-s} dp dq``.

    Returns ``(estimate, stderr)``.
    """
    dim = params.ambient_dim
    vol2 = sphere_volume(2 * params.d) ** 2
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk = 0
    while done < n_pairs:
        m = min(batch, n_pairs - done)
        rng = stream(seed, chunk)
        p = uniform_sphere(rng, m, dim)
        q = uniform_sphere(rng, m, dim)
        f = normalized_kernel_sq(p, q, params) * np.linalg.norm(p - q, axis=1) ** (-s)
        total += math.fsum(f)
        total_sq += math.fsum(f * f)
        done += m
        chunk += 1
    mean = total / n_pairs
    var = max(total_sq / n_pairs - mean * mean, 0.0) * n_pairs / (n_pairs - 1)
    return vol2 * mean, vol2 * math.sqrt(var / n_pairs)


def expected_energy_exact_part(params, s):
    return params.N**2 * continuous_energy(s, 2 * params.d)


@dataclass
class EnergyEstimate:
    mean: float
    stderr: float
    values: list


def _energy_of_replicate(args):
    config, s, r = args
    return riesz_energy(sample(config, r), s)


def expected_energy_mc(config, s, replicates, workers=None):
    """Monte-Carlo mean of the Riesz s-energy over independent configurations.

    Replicate ``r`` is always drawn from stream ``(seed, r)``, so the result
    does not depend on ``workers``.
    """
    if replicates < 2:
        raise ValueError("need at least 2 replicates for a standard error")
    values = []
    jobs = [(config, s, r) for r in range(replicates)]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            try:
                for val in pool.map(_energy_of_replicate, jobs):
                    values.append(val)
            except Exception as exc:
                raise MonteCarloAborted(len(values), values, exc) from exc
    else:
        for job in jobs:
            try:
                values.append(_energy_of_replicate(job))
            except Exception as exc:
                raise MonteCarloAborted(job[2], values, exc) from exc
    arr = np.asarray(values)
    return EnergyEstimate(float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr))), values)


@dataclass
class BoundReport:
    v_s: float
    n2_v_s: float
    th2_bound: float
    tau: float
    C_opt: float
    cor1_coefficient: float
    harmonic_coefficient: float


def bound_report(params, s, tau=None):
    """All closed-form quantities for ``(params, s)``; d = 1 gives NaN for the tau-dependent ones."""
    d = params.d
    v = continuous_energy(s, 2 * d)
    nan = float("nan")
    if d >= 2:
        tau = optimal_tau(params, s) if tau is None else tau
        th2 = th2_bound(params, s, tau)
        c1 = cor1_coefficient(d, s)
    else:
        tau, th2, c1 = nan, nan, nan
    return BoundReport(v, params.N**2 * v, th2, tau, optimal_C(d, s), c1, harmonic_coefficient(2 * d, s))


def gap_ratio_trend(d, s, L_values, replicates, seed):
    """``(N^2 V_s - mean energy) / N^{1 + s/(2d)}`` across degrees L.

    Returns a list of dicts with keys L, N, mean, stderr, ratio, ratio_stderr.
    """
    rows = []
    from .dpp_sampler import SamplerConfig

    for L in L_values:
        params = make_params(d, L)
        est = expected_energy_mc(SamplerConfig(params, seed), s, replicates)
        scale = params.N ** (1 + s / (2 * d))
        gap = expected_energy_exact_part(params, s) - est.mean
        rows.append(
            {
                "L": L,
                "N": params.N,
                "mean": est.mean,
                "stderr": est.stderr,
                "ratio": gap / scale,
                "ratio_stderr": est.stderr / scale,
            }
        )
    return rows
