"""Stereographic projection, the homogenizing radial map and related geometry on S^{2d}.

Points of S^{2d} are float arrays whose last axis has length ``2d + 1``; plane
points are arrays of length ``2d`` read as ``(Re z1, Im z1, ..., Re zd, Im zd)``.
Most functions broadcast over leading axes.

The radial profile ``g = g_d`` is defined implicitly by

    I_{g^2/(1+g^2)}(d, d) = (t^2 / (1 + t^2))^d,

and reduces to the identity for ``d = 1``.  Both ``g`` and its inverse are
evaluated through the complement of the incomplete beta whenever the argument
is large, which keeps round trips accurate to ~1e-13 over [1e-3, 1e3].
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, SingularityError
from .special_functions import (
    inverse_regularized_incomplete_beta_pair,
    ln_beta,
    root_pair,
    sym_beta_pair,
)

POLE_TOL = 1e-12


def _wrap(arr, scalar):
    return float(arr) if scalar else arr


def _check_d(d):
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d!r}")
    return int(d)


def north_pole(d):
    n = np.zeros(2 * d + 1)
    n[-1] = 1.0
    return n


def south_pole(d):
    n = np.zeros(2 * d + 1)
    n[-1] = -1.0
    return n


def _check_not_north(p):
    if np.any(p[..., -1] >= 1.0 - POLE_TOL):
        raise SingularityError("point at (or numerically at) the north pole")


# -- stereographic projection -------------------------------------------------


def stereographic(p):
    """Project from the north pole: ``(p_1, ..., p_2d) / (1 - p_{2d+1})``."""
    p = np.asarray(p, dtype=float)
    _check_not_north(p)
    return p[..., :-1] / (1.0 - p[..., -1:])


def stereographic_inverse(y):
    y = np.asarray(y, dtype=float)
    r2 = np.sum(y * y, axis=-1, keepdims=True)
    return np.concatenate([2.0 * y / (r2 + 1.0), (r2 - 1.0) / (r2 + 1.0)], axis=-1)


# -- the radial profile g and its inverse --------------------------------------


def g_forward(t, d):
    """``g_d(t)`` for ``t >= 0`` (``g_d(0) = 0`` by continuity)."""
    d = _check_d(d)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0) or np.any(~np.isfinite(t)):
        raise DomainError("g_forward needs finite t >= 0")
    out = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    # log of t^2/(1+t^2), written to stay finite for tiny and huge t
    with np.errstate(over="ignore"):
        log_ratio = np.where(tp > 1.0, -np.log1p(1.0 / (tp * tp)), 2.0 * np.log(tp) - np.log1p(tp * tp))
    y = np.exp(d * log_ratio)
    yc = -np.expm1(d * log_ratio)
    x, xc = inverse_regularized_incomplete_beta_pair(y, d, d, yc)
    out[pos] = np.sqrt(x / xc)
    return _wrap(out[0] if scalar else out, scalar)


def _ginv_from_u(u, uc, d):
    """Evaluate g^{-1} from ``u = s^2/(1+s^2)`` and ``uc = 1 - u``.

    Returns ``(g^{-1}(s), a, 1 - a)`` where ``a = I_u(d,d)^{1/d}`` equals
    ``g^{-1}(s)^2 / (1 + g^{-1}(s)^2)``.
    """
    val, comp = sym_beta_pair(u, d, uc)
    a, ac = root_pair(val, comp, d)
    with np.errstate(divide="ignore"):
        rho = np.sqrt(a / ac)
    return rho, a, ac, val


def _u_pair(s):
    s2 = s * s
    with np.errstate(divide="ignore", over="ignore"):
        uc = np.where(s > 1.0, (1.0 / s2) / (1.0 + 1.0 / s2), 1.0 / (1.0 + s2))
        u = np.where(s > 1.0, 1.0 / (1.0 + 1.0 / s2), s2 / (1.0 + s2))
    return u, uc


def g_inverse(s, d):
    """Closed form ``g^{-1}(s) = (I^{1/d} / (1 - I^{1/d}))^{1/2}`` with ``I = I_{s^2/(1+s^2)}(d,d)``."""
    d = _check_d(d)
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s < 0) or np.any(~np.isfinite(s)):
        raise DomainError("g_inverse needs finite s >= 0")
    u, uc = _u_pair(s)
    rho, *_ = _ginv_from_u(u, uc, d)
    return _wrap(rho[0] if scalar else rho, scalar)


def _ginv_derivative_from_u(s, u, uc, d):
    """Analytic ``(g^{-1})'(s)``, chaining through dI/du = u^(d-1)(1-u)^(d-1)/B(d,d)."""
    rho, a, ac, val = _ginv_from_u(u, uc, d)
    with np.errstate(divide="ignore"):
        log_da = (
            np.log(a)
            - math.log(d)
            - np.log(val)
            + (d - 1) * (np.log(u) + np.log(uc))
            - ln_beta(d, d)
            + np.log(2.0 * s)
            + 2.0 * np.log(uc)
        )
        return np.exp(log_da - math.log(2.0) - np.log(rho) - 2.0 * np.log(ac)), rho, a, ac


def g_inverse_derivative(s, d):
    d = _check_d(d)
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s <= 0):
        raise DomainError("g_inverse_derivative needs s > 0")
    u, uc = _u_pair(s)
    der, *_ = _ginv_derivative_from_u(s, u, uc, d)
    return _wrap(der[0] if scalar else der, scalar)


def g_derivative(t, d):
    """``g'(t)`` from the homogenizing differential equation (no differencing)."""
    d = _check_d(d)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    g = np.atleast_1d(g_forward(t, d))
    out = np.exp(
        math.log(d)
        + ln_beta(d, d)
        + (2 * d - 1) * (np.log(t) - np.log(g))
        - (d + 1) * np.log1p(t * t)
        + 2 * d * np.log1p(g * g)
    )
    return _wrap(out[0] if scalar else out, scalar)


@dataclass(frozen=True)
class RadialMap:
    """The radial profile for a fixed d, bundled with the induced maps of R^{2d}."""

    d: int

    def __post_init__(self):
        _check_d(self.d)

    def g(self, t):
        return g_forward(t, self.d)

    def g_inv(self, s):
        return g_inverse(s, self.d)

    def apply(self, x):
        return radial_map(x, self.d)

    def apply_inverse(self, y):
        return radial_map_inverse(y, self.d)


class GCache:
    """Cubic Hermite interpolant of ``log g`` against ``log t`` on a fixed knot grid.

    Knot slopes come from the differential equation, so the interpolant is
    C^1 and agrees with the exact path to ~1e-12 inside ``[t_min, t_max]``.
    Outside that range calls fall through to :func:`g_forward`.  The object is
    immutable after construction and safe to share between threads.
    """

    def __init__(self, d, knots=10_000, t_min=1e-3, t_max=1e3):
        self.d = _check_d(d)
        self.t_min, self.t_max = float(t_min), float(t_max)
        t = np.geomspace(t_min, t_max, knots)
        g = g_forward(t, d)
        slope = t * g_derivative(t, d) / g
        if np.any(np.diff(g) <= 0) or np.any(slope <= 0):
            raise RuntimeError("g is not increasing on the cache grid")
        self._spline = CubicHermiteSpline(np.log(t), np.log(g), slope)

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        inside = (t >= self.t_min) & (t <= self.t_max)
        out[inside] = np.exp(self._spline(np.log(t[inside])))
        if (~inside).any():
            out[~inside] = g_forward(t[~inside], self.d)
        return _wrap(out[0] if scalar else out, scalar)


def radial_map(x, d, g=None):
    """``x -> g(|x|) x / |x|`` on R^{2d} minus the origin."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(r == 0):
        raise SingularityError("radial map is undefined at the origin")
    gr = (g or (lambda t: g_forward(t, d)))(r)
    return np.asarray(gr) * x / r


def radial_map_inverse(y, d):
    """``y -> g^{-1}(|y|) y / |y|``."""
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(y, axis=-1, keepdims=True)
    if np.any(r == 0):
        raise SingularityError("inverse radial map is undefined at the origin")
    return g_inverse(r, d) * y / r


def sample_push(z, d, cache=None):
    """Transport a plane point to S^{2d}: stereographic inverse of the radial map.

    The origin goes to the south pole.
    """
    z = np.asarray(z, dtype=float)
    r = np.linalg.norm(z, axis=-1, keepdims=True)
    g = cache if cache is not None else (lambda t: g_forward(t, d))
    with np.errstate(invalid="ignore", divide="ignore"):
        scaled = np.where(r > 0, np.asarray(g(r)) * z / np.where(r > 0, r, 1.0), 0.0)
    return stereographic_inverse(scaled)


# -- the upper-hemisphere map and its derivative norms ------------------------


def lift(p, d):
    """Pole-stable evaluation of ``theta(phi_g^{-1}(Pi(p)))``.

    With ``u`` the unit direction of ``(p_1, ..., p_2d)`` and
    ``a = I_{(1+p_{2d+1})/2}(d,d)^{1/d}`` the composite equals
    ``(sqrt(a) u, sqrt(1 - a))``.  The north pole itself is sent to the
    equator along whatever direction ``u`` has (zero there), so callers that
    care must reject it first.
    """
    p = np.asarray(p, dtype=float)
    last = p[..., -1]
    s = np.clip(0.5 * (1.0 + last), 0.0, 1.0)
    sc = np.clip(0.5 * (1.0 - last), 0.0, 1.0)
    val, comp = sym_beta_pair(s.ravel(), d, sc.ravel())
    a, ac = root_pair(val, comp, d)
    a, ac = a.reshape(last.shape), ac.reshape(last.shape)
    head = p[..., :-1]
    nrm = np.linalg.norm(head, axis=-1, keepdims=True)
    u = np.divide(head, nrm, out=np.zeros_like(head), where=nrm > 0)
    return np.concatenate([np.sqrt(a)[..., None] * u, np.sqrt(ac)[..., None]], axis=-1)


def phi_def10(p, d):
    """Map S^{2d} minus the north pole into the open upper hemisphere."""
    p = np.asarray(p, dtype=float)
    _check_not_north(p)
    return lift(p, d)


def theta(x):
    """``x -> (x, 1) / |(x, 1)|`` from R^{2d} to S^{2d}."""
    x = np.asarray(x, dtype=float)
    ext = np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1)
    return ext / np.linalg.norm(ext, axis=-1, keepdims=True)


def jacobian_stereographic(p):
    """``(1 - p_{2d+1})^{-2d}``."""
    p = np.asarray(p, dtype=float)
    _check_not_north(p)
    d2 = p.shape[-1] - 1
    out = (1.0 - p[..., -1]) ** (-d2)
    return _wrap(out, out.ndim == 0)


def jacobian_radial_inverse(y, d):
    """``(g^{-1})'(|y|) (g^{-1}(|y|) / |y|)^{2d-1}``."""
    d = _check_d(d)
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(y, axis=-1)
    if np.any(r == 0):
        raise SingularityError("Jacobian of the inverse radial map is singular at the origin")
    rf = np.atleast_1d(r)
    u, uc = _u_pair(rf)
    der, rho, _, _ = _ginv_derivative_from_u(rf, u, uc, d)
    out = (der * (rho / rf) ** (2 * d - 1)).reshape(r.shape)
    return _wrap(out, out.ndim == 0)


def dphi_norms(p, d):
    """Norms of ``Dphi(p)`` on the horizontal and on the vertical tangent directions.

    Returns ``(tangential, radial)``; the first applies to every tangent vector
    orthogonal to the north pole, the second to ``(n - p_{2d+1} p) / sqrt(1 - p_{2d+1}^2)``.
    """
    d = _check_d(d)
    p = np.asarray(p, dtype=float)
    last = p[..., -1]
    if np.any(np.abs(last) >= 1.0 - POLE_TOL):
        raise SingularityError("derivative norms need p away from both poles")
    scalar = last.ndim == 0
    x = np.atleast_1d(last)
    s, sc = 0.5 * (1.0 + x), 0.5 * (1.0 - x)
    r = np.sqrt(s / sc)
    der, rho, a, ac = _ginv_derivative_from_u(r, s, sc, d)
    one_minus_x2 = 4.0 * s * sc
    tangential = rho / (np.sqrt(one_minus_x2) * np.sqrt(1.0 + rho * rho))
    radial = der / ((1.0 + rho * rho) * (1.0 - x))
    if scalar:
        return float(tangential[0]), float(radial[0])
    return tangential.reshape(last.shape), radial.reshape(last.shape)


def dphi_operator_norm(p, d):
    tangential, radial = dphi_norms(p, d)
    return np.maximum(tangential, radial)


def dphi_norm_envelope(eps, tau, d):
    """The tighter of the two derivative envelopes near the sublevel set ``p_{2d+1} <= eps``.

    Returns ``(sharp, crude)`` with ``crude = 1 / sqrt(1 - (tau + eps)^2)``.
    """
    h = eps + tau
    if not 0 < h < 1:
        raise DomainError("need 0 < eps + tau < 1")
    rho = g_inverse(math.sqrt((1 + h) / (1 - h)), d)
    sharp = rho / (math.sqrt(1 - h * h) * math.sqrt(1 + rho * rho))
    return sharp, 1.0 / math.sqrt(1 - h * h)


# -- tangent frames and geodesics ---------------------------------------------


def vertical_tangent(p):
    """``(n - p_{2d+1} p) / sqrt(1 - p_{2d+1}^2)``."""
    p = np.asarray(p, dtype=float)
    n = np.zeros_like(p)
    n[..., -1] = 1.0
    last = p[..., -1:]
    return (n - last * p) / np.sqrt(1.0 - last * last)


def horizontal_tangent(p, rng):
    """A random unit tangent vector at p orthogonal to the north pole."""
    p = np.asarray(p, dtype=float)
    v = rng.standard_normal(p.shape)
    v[..., -1] = 0.0
    head = p.copy()
    head[..., -1] = 0.0
    hn2 = np.sum(head * head, axis=-1, keepdims=True)
    v = v - np.sum(v * head, axis=-1, keepdims=True) / hn2 * head
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def tangent_frame(p):
    """Orthonormal basis of the tangent space at p, as rows of a (2d, 2d+1) array."""
    p = np.asarray(p, dtype=float)
    m = p.size
    basis = np.linalg.qr(np.column_stack([p, np.eye(m)]))[0]
    return basis[:, 1:].T


def geodesic(p, v, h):
    """Great circle through p with unit initial velocity v, at arc length h."""
    return np.cos(h) * p + np.sin(h) * v


def slerp(p, q, t):
    """Point at fraction t along the minimizing great-circle arc from p to q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    omega = math.acos(float(np.clip(np.dot(p, q), -1.0, 1.0)))
    if omega < 1e-15:
        return p.copy()
    t = np.asarray(t, dtype=float)[..., None]
    return (np.sin((1 - t) * omega) * p + np.sin(t * omega) * q) / math.sin(omega)


# -- volumes ------------------------------------------------------------------


def sphere_volume(n):
    """Surface measure of the unit sphere S^n in R^{n+1}."""
    if n < 1:
        raise DomainError("sphere dimension must be >= 1")
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def cap_volume_lower_bound(r, n):
    """Lower bound for the volume of a geodesic cap of radius ``pi/2 + r`` in S^{n+1}."""
    if not r > 0 or n < 1:
        raise DomainError("need r > 0 and n >= 1")
    return sphere_volume(n + 1) * (1.0 - math.exp(-r * r * n / 2.0) * math.sqrt(1.0 + 1.0 / n) / 2.0)


def cap_volume(r, n):
    """Volume of the geodesic cap of radius ``pi/2 + r`` in S^{n+1}, by quadrature."""
    if r >= math.pi / 2:
        return sphere_volume(n + 1)
    num, _ = integrate.quad(lambda th: math.cos(th) ** n, -math.pi / 2, r, epsabs=0, epsrel=1e-13)
    den, _ = integrate.quad(lambda th: math.cos(th) ** n, -math.pi / 2, math.pi / 2, epsabs=0, epsrel=1e-13)
    return sphere_volume(n + 1) * num / den


def sublevel_volume(eps, d):
    """Volume of ``{p in S^{2d} : p_{2d+1} <= eps}`` by adaptive quadrature."""
    d = _check_d(d)
    if not -1 < eps <= 1:
        raise DomainError("eps must lie in (-1, 1]")
    val, _ = integrate.quad(lambda t: (1.0 - t * t) ** (d - 1), -1.0, eps, epsabs=0, epsrel=1e-13)
    return sphere_volume(2 * d - 1) * val
