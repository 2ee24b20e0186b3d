"""Exact sampling of the generalized spherical ensemble.

Points are drawn one at a time.  Given ``k`` accepted points the next one has
density (w.r.t. the uniform measure) proportional to the Schur complement

    K_k(x, x) = K(x, x) - kappa_x^* G^{-1} kappa_x,

which never exceeds the constant ``K(x, x)``.  So a uniform proposal accepted
with probability ``K_k(x, x) / K(x, x)`` is exact.  ``G`` is factored as
``C C^*`` and the factor grows by one row per accepted point.

Randomness for step ``k`` of replicate ``r`` comes from a generator keyed by
``(seed, r, k)``, so a configuration depends only on those integers.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats

from .ensemble_kernel import EnsembleParams, lifted_complex, make_params, normalized_kernel_matrix
from .errors import NumericalDegeneracyError, RejectionBudgetExceeded
from .special_functions import inverse_regularized_incomplete_beta
from .sphere_geometry import stereographic_inverse

PIVOT_FLOOR = 1e-8


@dataclass(frozen=True)
class SamplerConfig:
    params: EnsembleParams
    seed: int
    max_rejections_per_point: int = 10**7

    def __post_init__(self):
        if self.max_rejections_per_point < 1:
            raise ValueError("max_rejections_per_point must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class Configuration:
    points: np.ndarray
    params: EnsembleParams
    seed: int
    replicate: int = 0
    rejection_count: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.points.shape != (self.params.N, self.params.ambient_dim):
            raise ValueError(f"expected {self.params.N} points in R^{self.params.ambient_dim}, got {self.points.shape}")
        if not np.allclose(np.linalg.norm(self.points, axis=1), 1.0, atol=1e-12, rtol=0):
            raise ValueError("configuration points must have unit norm")

    def __len__(self):
        return len(self.points)


def stream(seed, *keys):
    """Independent generator keyed by ``seed`` and any number of integer indices."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def uniform_sphere(rng, n, dim):
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


class GramState:
    """Accepted points plus the Cholesky factor of their normalized Gram matrix."""

    def __init__(self, params):
        self.params = params
        n, m = params.N, params.d + 1
        self.lifted = np.empty((n, m), dtype=complex)
        self.factor = np.zeros((n, n), dtype=complex)
        self.k = 0
        self.refactorizations = 0

    def _project(self, lifted_x):
        """Return ``(v, 1 - |v|^2)`` with ``v = C^{-1} kappa`` for candidate rows."""
        k = self.k
        if k == 0:
            return np.zeros((0, len(lifted_x)), dtype=complex), np.ones(len(lifted_x))
        kappa = normalized_kernel_matrix(self.lifted[:k], lifted_x, self.params.L)
        v = linalg.solve_triangular(self.factor[:k, :k], kappa, lower=True, check_finite=False)
        return v, 1.0 - np.sum(np.abs(v) ** 2, axis=0)

    def acceptance(self, lifted_x):
        """``K_k(x, x) / K(x, x)`` clipped to [0, 1]."""
        _, resid = self._project(lifted_x)
        return np.clip(resid, 0.0, 1.0)

    def append(self, lifted_x, v=None, resid=None):
        k = self.k
        if v is None:
            v, resid = self._project(lifted_x[None, :])
            v, resid = v[:, 0], resid[0]
        self.lifted[k] = lifted_x
        self.k = k + 1
        if resid < PIVOT_FLOOR:
            self._refactor()
            return
        self.factor[k, :k] = np.conj(v)
        self.factor[k, k] = math.sqrt(resid)

    def _refactor(self):
        k = self.k
        gram = normalized_kernel_matrix(self.lifted[:k], self.lifted[:k], self.params.L)
        gram = 0.5 * (gram + gram.conj().T)
        try:
            c = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError as exc:
            raise NumericalDegeneracyError(f"Gram matrix of {k} points is not positive definite") from exc
        if np.min(np.abs(np.diag(c))) ** 2 < PIVOT_FLOOR * 1e-4:
            raise NumericalDegeneracyError(f"Gram matrix of {k} points is numerically singular")
        self.factor[:k, :k] = c
        self.refactorizations += 1


def conditional_intensity(x, state):
    """Schur-complement diagonal ``K_k(x, x)`` (absolute units) for points x."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    lx = lifted_complex(np.atleast_2d(x), state.params.d)
    out = state.params.diagonal * state.acceptance(lx)
    return float(out[0]) if scalar else out


def _batch_size(N, k, remaining):
    return int(min(max(4, math.ceil(2.0 * N / (N - k))), 4096, remaining))


def sample(config, replicate=0):
    """Draw one configuration of N points from the ensemble."""
    params = config.params
    N, dim, d = params.N, params.ambient_dim, params.d
    state = GramState(params)
    points = np.empty((N, dim))
    rejected = 0
    for k in range(N):
        rng = stream(config.seed, replicate, k)
        used = 0
        while True:
            remaining = config.max_rejections_per_point + 1 - used
            if remaining <= 0:
                raise RejectionBudgetExceeded(k, used)
            x = uniform_sphere(rng, _batch_size(N, k, remaining), dim)
            lx = lifted_complex(x, d)
            v, resid = state._project(lx)
            u = rng.random(len(x))
            hits = np.flatnonzero(u < resid)
            if hits.size:
                i = int(hits[0])
                used += i + 1
                break
            used += len(x)
        rejected += used - 1
        points[k] = x[i]
        state.append(lx[i], v[:, i] if k else None, resid[i] if k else 1.0)
    return Configuration(
        points,
        params,
        config.seed,
        replicate,
        rejected,
        {"refactorizations": state.refactorizations},
    )


def sample_many(config, replicates, start=0):
    return [sample(config, r) for r in range(start, start + replicates)]


def eigenvalue_sampler_d1(N, seed, replicate=0, max_attempts=10):
    """Spherical ensemble on S^2 from generalized eigenvalues of a Gaussian pencil.

    ``A`` and ``B`` have i.i.d. standard complex Gaussian entries; the roots of
    ``det(lambda A - B) = 0`` are sent to S^2 by inverse stereographic projection.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = stream(seed, replicate, 2**32 - 1)
    scale = math.sqrt(0.5)
    for _ in range(max_attempts):
        a = scale * (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))
        b = scale * (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))
        try:
            lam = linalg.eigvals(b, a)
        except linalg.LinAlgError:
            continue
        if np.all(np.isfinite(lam)):
            y = np.column_stack([lam.real, lam.imag])
            return Configuration(stereographic_inverse(y), make_params(1, N - 1), seed, replicate)
    raise RuntimeError(f"generalized eigenvalue solve failed {max_attempts} times")


def _band_edges(d, bands):
    """Values of p_{2d+1} splitting S^{2d} into ``bands`` zones of equal volume."""
    x = inverse_regularized_incomplete_beta(np.arange(1, bands) / bands, d, d)
    return 2.0 * np.asarray(x) - 1.0


def cell_index(points, cells=32, sectors=8):
    """Equal-area cell of each point: zones in the last coordinate times sectors in (p_1, p_2)."""
    if cells % sectors:
        raise ValueError(f"cells={cells} is not a multiple of sectors={sectors}")
    points = np.asarray(points, dtype=float)
    d = (points.shape[1] - 1) // 2
    bands = cells // sectors
    band = np.searchsorted(_band_edges(d, bands), points[:, -1])
    ang = np.arctan2(points[:, 1], points[:, 0])
    sector = np.minimum(((ang + math.pi) / (2 * math.pi) * sectors).astype(int), sectors - 1)
    return band * sectors + sector


def intensity_uniformity_test(configs, cells=32, sectors=8):
    """Chi-square test of pooled point counts against equal-area cell expectations."""
    if len(configs) < 100:
        raise ValueError("need at least 100 configurations")
    pooled = np.concatenate([c.points if isinstance(c, Configuration) else np.asarray(c) for c in configs])
    counts = np.bincount(cell_index(pooled, cells, sectors), minlength=cells)
    res = stats.chisquare(counts)
    return float(res.statistic), float(res.pvalue)


def nearest_neighbor_distances(points):
    from scipy.spatial.distance import pdist, squareform

    dist = squareform(pdist(points))
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)
