"""Integration primitives: arcsine-weight integrals, principal values, paths.

Everything the period conditions and Green's integrals need reduces to three
primitives:

* ``singular_integral`` -- integral of a smooth ``f`` against the weight
  ``1/sqrt((x - a)(b - x))``, by Gauss-Chebyshev after ``x = m + r cos(t)``.
  Exact for polynomials of degree ``<= 2N - 1`` at ``N`` nodes.
* ``pv_singular_integral`` -- the same weight with an extra Cauchy kernel
  ``1/(x - x0)``.  Inside the interval the smooth part is subtracted and the
  leftover kernel term uses the classical fact that the principal value of
  the bare arcsine-weighted Cauchy kernel is zero; outside, the integrand is
  smooth and is dispatched to ``singular_integral`` directly.
* ``path_integral`` -- adaptive Gauss-Legendre along a polyline in the
  plane, with an optional square-root-absorbing substitution on the first
  segment for integrands singular like ``1/sqrt(.)`` at the start point.

Node counts double until two successive results agree to ``REL_TOL``; the
cap exists because heavily shrunk bands push singularities of the smooth
part close to the integration interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NumericsError, ValidationError

__all__ = [
    "QuadratureRule",
    "singular_integral",
    "pv_singular_integral",
    "path_integral",
    "integrate_unit_interval",
]

REL_TOL = 1e-12
N_START = 64
N_MAX = 4096


@dataclass(frozen=True)
class QuadratureRule:
    """A fixed rule: ``kind`` names the family, ``order`` the node count."""

    kind: str = "endpoint-singular-cosine"
    order: int = N_START

    def __post_init__(self):
        if self.kind not in ("endpoint-singular-cosine", "adaptive-path"):
            raise ValidationError(f"unknown quadrature kind {self.kind!r}")
        if self.order < 1:
            raise ValidationError("order must be positive")


def _gc_nodes(n: int) -> np.ndarray:
    # Gauss-Chebyshev abscissas on (-1, 1); every node has weight pi/n.
    k = np.arange(1, n + 1)
    return np.cos((2 * k - 1) * np.pi / (2 * n))


def _gc_apply(f: Callable, alpha: float, beta: float, n: int) -> float:
    mid = 0.5 * (alpha + beta)
    rad = 0.5 * (beta - alpha)
    x = mid + rad * _gc_nodes(n)
    y = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)]
        raise NumericsError(f"integrand returned a non-finite value near x={bad[:3]}")
    return float(np.pi / n * np.sum(y))


def singular_integral(
    f: Callable,
    alpha: float,
    beta: float,
    rule: QuadratureRule | None = None,
) -> float:
    """``int_a^b f(x) / sqrt((x - a)(b - x)) dx`` for smooth vectorized ``f``.

    With an explicit ``rule`` the fixed-order Gauss-Chebyshev rule is
    applied once; otherwise the order doubles from ``N_START`` until two
    successive results agree to ``REL_TOL`` (relative), capped at ``N_MAX``.
    """
    if not alpha < beta:
        raise ValidationError(f"need alpha < beta, got ({alpha}, {beta})")
    if rule is not None:
        return _gc_apply(f, alpha, beta, rule.order)
    prev = _gc_apply(f, alpha, beta, N_START)
    n = 2 * N_START
    while n <= N_MAX:
        cur = _gc_apply(f, alpha, beta, n)
        if abs(cur - prev) <= REL_TOL * max(1.0, abs(cur)):
            return cur
        prev = cur
        n *= 2
    return prev


def pv_singular_integral(
    f: Callable,
    alpha: float,
    beta: float,
    x0: float,
    rule: QuadratureRule | None = None,
) -> float:
    """Cauchy-kernel arcsine integral ``int f(x) / ((x - x0) w(x)) dx``.

    ``w(x) = sqrt((x - a)(b - x))``.  For ``x0`` strictly inside ``(a, b)``
    the value is the principal value; the subtraction
    ``f(x) = (f(x) - f(x0)) + f(x0)`` leaves a smooth integrand plus the
    bare kernel, whose principal value vanishes identically.  For ``x0``
    outside ``[a, b]`` the integrand is smooth and handled directly.
    """
    if x0 == alpha or x0 == beta:
        raise ValidationError(
            f"pole x0={x0} collides with an interval endpoint; integral diverges"
        )
    if alpha < x0 < beta:
        f_at = float(np.asarray(f(np.array([x0])), dtype=float).ravel()[0])

        def smooth(x):
            return (np.asarray(f(x), dtype=float) - f_at) / (x - x0)

        return singular_integral(smooth, alpha, beta, rule)
    return singular_integral(lambda x: np.asarray(f(x), dtype=float) / (x - x0),
                             alpha, beta, rule)


# -- complex path integration ------------------------------------------------

# 64-point Gauss-Legendre on (0, 1), shared by all segments.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def _gl_sum(g: Callable, a: float, b: float) -> complex:
    t = a + (b - a) * _GL_X
    return complex((b - a) * np.sum(_GL_W * np.asarray(g(t), dtype=complex)))


def _adaptive_gl(g: Callable, a: float, b: float, tol: float, depth: int):
    whole = _gl_sum(g, a, b)
    mid = 0.5 * (a + b)
    left = _gl_sum(g, a, mid)
    right = _gl_sum(g, mid, b)
    err = abs(left + right - whole)
    if err <= tol or depth >= 40:
        if err > tol:
            raise NumericsError(
                "path integral failed to converge within the refinement budget",
                best_estimate=left + right,
                error_bound=err,
            )
        return left + right, err
    lv, le = _adaptive_gl(g, a, mid, 0.5 * tol, depth + 1)
    rv, re_ = _adaptive_gl(g, mid, b, 0.5 * tol, depth + 1)
    return lv + rv, le + re_


def integrate_unit_interval(g: Callable, tol: float = 1e-12) -> complex:
    """Adaptively integrate a vectorized complex ``g`` over ``[0, 1]``."""
    val, _ = _adaptive_gl(g, 0.0, 1.0, tol, 0)
    return val


def path_integral(
    f: Callable,
    path: Sequence[complex],
    tol: float = 1e-12,
    sqrt_start: bool = False,
) -> complex:
    """Integrate vectorized complex ``f`` along the polyline ``path``.

    ``sqrt_start=True`` applies ``z = z0 + tau^2 (z1 - z0)`` on the first
    segment so an integrable ``1/sqrt`` singularity at ``path[0]`` (a band
    endpoint, typically) is absorbed; ``f`` is then never evaluated at the
    start point itself.  Raises NumericsError with the best estimate when a
    segment cannot reach its share of ``tol``.
    """
    pts = [complex(p) for p in path]
    if len(pts) < 2:
        raise ValidationError("path needs at least two points")
    seg_tol = tol / (len(pts) - 1)
    total = 0.0 + 0.0j
    for k, (z0, z1) in enumerate(zip(pts, pts[1:])):
        if z1 == z0:
            continue
        dz = z1 - z0
        if k == 0 and sqrt_start:
            def g(tau, z0=z0, dz=dz):
                return f(z0 + tau**2 * dz) * 2.0 * tau * dz
        else:
            def g(t, z0=z0, dz=dz):
                return f(z0 + t * dz) * dz
        val, _ = _adaptive_gl(g, 0.0, 1.0, seg_tol, 0)
        total += val
    return total
