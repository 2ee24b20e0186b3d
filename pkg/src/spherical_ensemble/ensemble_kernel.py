"""Projection kernels of the generalized spherical ensemble.

On the plane C^d the kernel is the reproducing kernel of the weighted
polynomials of degree <= L; on S^{2d} it is

    K(p, q) = N / Vol(S^{2d}) * (1 + <z, w>)^L / ((1 + |z|^2)^{L/2} (1 + |w|^2)^{L/2}),

with ``z, w`` the plane coordinates of ``p, q`` after undoing the radial map.
The kernel is returned as a :class:`KernelValue` in log-modulus/phase form,
since ``(1 + <z, w>)^L`` overflows for L in the hundreds.

The inner product is conjugate-linear in its second argument.

For bulk work (Gram matrices, Monte-Carlo integrals) the same kernel is
evaluated from the *lifted* points ``theta(z) = (z, 1)/|(z, 1)|``, for which
``K(p, q) = N / Vol * <theta(z), theta(w)>^L`` and every factor has modulus <= 1.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .sphere_geometry import (
    _check_d,
    _check_not_north,
    lift,
    radial_map_inverse,
    sphere_volume,
    stereographic,
)

_MAX_N = 2**63 - 1


@dataclass(frozen=True)
class EnsembleParams:
    d: int
    L: int
    N: int

    @property
    def ambient_dim(self):
        return 2 * self.d + 1

    @property
    def diagonal(self):
        """The constant value ``K(p, p) = N / Vol(S^{2d})``."""
        return self.N / sphere_volume(2 * self.d)


def make_params(d, L):
    """Parameters for degree L on S^{2d}; ``N = C(d + L, d)``."""
    d = _check_d(d)
    if int(L) != L or L < 0:
        raise DomainError(f"L must be a nonnegative integer, got {L!r}")
    L = int(L)
    N = math.comb(d + L, d)
    if N > _MAX_N:
        raise OverflowError(f"N = C({d + L}, {d}) does not fit in a 64-bit integer")
    return EnsembleParams(d, L, N)


@dataclass(frozen=True)
class KernelValue:
    """``K = exp(log_modulus + i * phase)`` with ``phase`` in (-pi, pi]."""

    log_modulus: float
    phase: float

    @property
    def modulus(self):
        return math.exp(self.log_modulus)

    @property
    def value(self):
        return complex(math.exp(self.log_modulus) * math.cos(self.phase), math.exp(self.log_modulus) * math.sin(self.phase))

    def conjugate(self):
        return KernelValue(self.log_modulus, _wrap_phase(-self.phase))


def _wrap_phase(ph):
    ph = math.remainder(ph, 2.0 * math.pi)
    return math.pi if ph <= -math.pi else ph


def as_complex(x):
    """Read a real vector of even length ``2d`` as a complex vector of length d."""
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def hermitian_inner(z, w):
    """``sum_j z_j conj(w_j)`` for real-coordinate plane points."""
    return np.sum(as_complex(z) * np.conj(as_complex(w)), axis=-1)


def plane_coordinates(p, d):
    """``phi_g^{-1}(Pi(p))``, with the south pole sent to the origin."""
    y = np.atleast_2d(stereographic(p))
    out = np.zeros_like(y)
    nz = np.linalg.norm(y, axis=-1) > 0
    if nz.any():
        out[nz] = radial_map_inverse(y[nz], d)
    return out.reshape(np.shape(p)[:-1] + (2 * d,))


def _log_kernel(prefactor_log, z, w, L, weight):
    c = 1.0 + complex(hermitian_inner(z, w))
    nz = float(np.dot(z, z))
    nw = float(np.dot(w, w))
    with np.errstate(divide="ignore"):
        lm = prefactor_log + L * math.log(abs(c)) if c != 0 else -math.inf
    if L == 0:
        lm = prefactor_log
    lm -= weight * (math.log1p(nz) + math.log1p(nw))
    return KernelValue(lm, _wrap_phase(L * math.atan2(c.imag, c.real)))


def kernel_plane(z, w, params):
    """``(N d!/pi^d) (1 + <z,w>)^L / ((1+|z|^2)(1+|w|^2))^{(d+L+1)/2}``."""
    d, L, N = params.d, params.L, params.N
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    pre = math.log(N) + math.lgamma(d + 1) - d * math.log(math.pi)
    return _log_kernel(pre, z, w, L, (d + L + 1) / 2.0)


def kernel_sphere(p, q, params):
    """The homogeneous projection kernel on S^{2d}."""
    d, L = params.d, params.L
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_not_north(p)
    _check_not_north(q)
    z = plane_coordinates(p, d)
    w = z if np.array_equal(p, q) else plane_coordinates(q, d)
    return _log_kernel(math.log(params.diagonal), z, w, L, L / 2.0)


def lifted_complex(p, d):
    """Complex coordinates (length d + 1) of ``theta(phi_g^{-1}(Pi(p)))``."""
    lp = lift(p, d)
    return np.concatenate([as_complex(lp[..., :-1]), lp[..., -1:] + 0j], axis=-1)


def normalized_kernel_matrix(za, zb, L):
    """``<za_i, zb_j>^L`` for lifted complex coordinates, shape (len(za), len(zb))."""
    inner = za @ np.conj(zb).T
    if L == 0:
        return np.ones_like(inner)
    return inner**L


def normalized_kernel_sq(p, q, params):
    """``(|K(p, q)| / K(p, p))^2``, vectorized over matching leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_not_north(p)
    _check_not_north(q)
    zp = lifted_complex(p, params.d)
    zq = lifted_complex(q, params.d)
    inner = np.abs(np.sum(zp * np.conj(zq), axis=-1))
    out = np.minimum(inner, 1.0) ** (2 * params.L)
    return float(out) if out.ndim == 0 else out


def prop7_lower_bound(p, q, params):
    """``max(1 - |phi(p) - phi(q)|^2, 0)^L`` with phi the upper-hemisphere map."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_not_north(p)
    _check_not_north(q)
    diff = lift(p, params.d) - lift(q, params.d)
    base = np.maximum(1.0 - np.sum(diff * diff, axis=-1), 0.0)
    out = base ** params.L
    return float(out) if out.ndim == 0 else out


def enumerate_multi_indices(d, L):
    """All ``alpha`` in N^d with ``|alpha| <= L``, graded then lexicographic."""
    d = _check_d(d)
    idx = [a for a in itertools.product(range(L + 1), repeat=d) if sum(a) <= L]
    return sorted(idx, key=lambda a: (sum(a), a))


def basis_constant(alpha, params):
    """Orthonormalizing constant ``(N d!/pi^d) L! / (alpha! (L - |alpha|)!)``."""
    d, L, N = params.d, params.L, params.N
    if len(alpha) != d or sum(alpha) > L:
        raise DomainError("multi-index does not belong to this basis")
    multinom = math.factorial(L) // (math.prod(math.factorial(a) for a in alpha) * math.factorial(L - sum(alpha)))
    return N * math.factorial(d) / math.pi**d * multinom
