"""Green's functions, capacity and harmonic measures for interval systems.

The complex Green's mapping with pole at infinity is

    phi(z, inf) = exp( int_{a_{2l}}^{z} r_inf(xi) / sqrt(H(xi)) dxi )

where ``r_inf`` is the monic polynomial of degree ``l - 1`` whose integral
against ``1/sqrt(H)`` vanishes over every gap; those l - 1 conditions make
``log|phi|`` vanish on every band, not just the one carrying the anchor
point.  With a finite real pole ``x0`` off E the density becomes
``r_{x0}(xi) / ((xi - x0) sqrt(H(xi)))`` where ``r_{x0}`` has degree at most
``l - 1``, satisfies ``r_{x0}(x0) = -sqrt(H(x0))`` on the analytic branch,
and has vanishing principal-value periods over the gaps.  The interpolation
value uses the analytic branch (which is negative on some gaps and left of
the first band) rather than the positive square root: that sign is what
makes the integrand's residue at ``x0`` equal to -1, so the Green's
function blows up (rather than down) at its pole and stays positive.

Real-valued quantities (period conditions, harmonic-measure densities)
integrate against ``1/sqrt(|H|)`` on gaps and bands; the per-gap sign of the
analytic branch never enters because every period condition equals zero and
every measure takes absolute values.

Band indices in the public functions are 1-based, matching the usual
``E_1, ..., E_l`` labelling.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import NumericsError, ValidationError
from .intervals import IntervalSystem
from .quadrature import (
    integrate_unit_interval,
    path_integral,
    pv_singular_integral,
    singular_integral,
)

__all__ = [
    "PeriodPolynomial",
    "GreenEvaluation",
    "solve_r_inf",
    "solve_r_x0",
    "green_inf",
    "green_pole",
    "capacity",
    "robin_constant",
    "harmonic_measure_inf",
    "harmonic_measure_at",
    "pole_mapping_modulus_at_infinity",
]

PATH_TOL = 1e-12
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class PeriodPolynomial:
    """Polynomial density making the Green's integrand's gap periods vanish.

    ``coefficients`` are ascending.  ``pole`` is None for the
    pole-at-infinity variant (monic, degree exactly l - 1) and the real pole
    location for the finite-pole variant (degree at most l - 1).
    """

    coefficients: tuple[float, ...]
    pole: float | None = None

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        return P.polyval(x, np.asarray(self.coefficients))


@dataclass(frozen=True)
class GreenEvaluation:
    """One query-point evaluation: ``g = log|phi|`` plus the complex phi."""

    g: float
    phi: complex
    branch_note: str


def _weight_dropping(sys: IntervalSystem, drop: tuple[int, int]):
    """1/sqrt(prod |x - a_j|) over all endpoints except the two dropped ones."""
    rest = np.delete(np.asarray(sys.endpoints), list(drop))

    def w(x):
        x = np.asarray(x, dtype=float)
        return 1.0 / np.sqrt(np.prod(np.abs(x[..., None] - rest), axis=-1))

    return w


def _require_off_bands(sys: IntervalSystem, z: complex, what: str = "point"):
    z = complex(z)
    if z.imag == 0.0 and sys.band_of(z.real) is not None:
        raise ValidationError(f"{what} {z.real} lies on the band system")
    return z


@functools.lru_cache(maxsize=512)
def solve_r_inf(sys: IntervalSystem) -> PeriodPolynomial:
    """Monic degree-(l-1) polynomial with zero gap periods.

    The l - 1 interior gaps give l - 1 linear conditions on the non-leading
    coefficients; the moment matrix entries are arcsine-weighted gap
    integrals of monomials.  After solving, the gap residuals are checked
    and the polynomial is verified to change sign across every gap (it has
    exactly one zero per gap).
    """
    l = sys.l
    if l == 1:
        return PeriodPolynomial(coefficients=(1.0,))

    moments = np.empty((l - 1, l))
    for j, (lo, hi) in enumerate(sys.gaps):
        w = _weight_dropping(sys, (2 * j + 1, 2 * j + 2))
        for i in range(l):
            moments[j, i] = singular_integral(lambda x, i=i: x**i * w(x), lo, hi)

    a = moments[:, : l - 1]
    b = -moments[:, l - 1]
    try:
        c = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"gap period system is singular: {exc}") from exc

    coeffs = np.append(c, 1.0)
    scale = max(1.0, float(np.max(np.abs(moments))) * max(1.0, float(np.max(np.abs(coeffs)))))
    residuals = moments @ coeffs
    if np.max(np.abs(residuals)) > RESIDUAL_TOL * scale:
        raise NumericsError(
            f"gap period residuals too large: {residuals} (scale {scale})"
        )

    poly = PeriodPolynomial(coefficients=tuple(coeffs))
    for lo, hi in sys.gaps:
        if not poly(lo) * poly(hi) < 0:
            raise NumericsError(
                f"period polynomial does not change sign across gap ({lo}, {hi})"
            )
    return poly


@functools.lru_cache(maxsize=1024)
def solve_r_x0(sys: IntervalSystem, x0: float) -> PeriodPolynomial:
    """Degree <= l-1 density for the Green's function with pole at ``x0``.

    Solves the l x l system: principal-value gap periods of
    ``r(xi)/((xi - x0) sqrt(H))`` vanish, and ``r(x0)`` equals minus the
    analytic-branch value of ``sqrt(H(x0))``.
    """
    x0 = float(x0)
    if sys.band_of(x0) is not None:
        raise ValidationError(f"pole x0={x0} lies on the band system")
    l = sys.l

    a = np.empty((l, l))
    b = np.zeros(l)
    for j, (lo, hi) in enumerate(sys.gaps):
        w = _weight_dropping(sys, (2 * j + 1, 2 * j + 2))
        for i in range(l):
            a[j, i] = pv_singular_integral(lambda x, i=i: x**i * w(x), lo, hi, x0)
    a[l - 1, :] = [x0**i for i in range(l)]
    sqrt_h_x0 = complex(sys.sqrt_h(x0)).real
    b[l - 1] = -sqrt_h_x0

    try:
        c = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"pole period system is singular: {exc}") from exc

    residuals = a @ c - b
    scale = max(1.0, float(np.max(np.abs(a))) * max(1.0, float(np.max(np.abs(c)))))
    if np.max(np.abs(residuals)) > RESIDUAL_TOL * scale:
        raise NumericsError(f"pole period residuals too large: {residuals}")
    return PeriodPolynomial(coefficients=tuple(c), pole=x0)


# -- path routing -------------------------------------------------------------


def _segment_point_distance(z0: complex, z1: complex, p: complex) -> float:
    d = z1 - z0
    t = ((p - z0) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (z0 + t * d))


def _route(sys: IntervalSystem, z: complex, poles: tuple[float, ...] = ()):
    """Integration path from the rightmost endpoint to z, off E and poles.

    A segment from the rightmost endpoint to any non-real z only meets the
    real axis at its start, so it is already off E; it is rejected only when
    it passes too close to a pole.  Real targets right of the system are
    reached along the axis when no pole intervenes.  Every other case rises
    to Im = |z| + 1 on the side of z, travels horizontally, and descends.
    """
    anchor = sys.endpoints[-1]
    z = complex(z)
    margins = {p: 0.45 * sys.distance(p) for p in poles}

    def clear(p0, p1):
        return all(
            _segment_point_distance(p0, p1, complex(p)) >= m for p, m in margins.items()
        )

    if z.imag == 0.0 and z.real > anchor:
        if clear(anchor, z):
            return [anchor, z], "straight-real"
    elif z.imag != 0.0:
        if clear(anchor, z):
            return [anchor, z], "straight"

    s = 1.0 if z.imag >= 0.0 else -1.0
    m = abs(z) + 1.0
    path = [anchor, anchor + 1j * s * m, complex(z.real, s * m), z]
    for p0, p1 in zip(path, path[1:]):
        if not clear(p0, p1):
            raise NumericsError(
                f"cannot route an integration path to {z} away from poles {poles}"
            )
    note = f"waypoints at Im={s * m:g}"
    return path, note


def _anchored_integral(sys: IntervalSystem, numer, path, tol=PATH_TOL) -> complex:
    """``int numer(xi)/sqrt(H(xi)) dxi`` along a path starting at the anchor.

    The anchor is the rightmost endpoint, a simple zero of H.  On the first
    segment ``xi = anchor + tau^2 dz`` the singular factor is taken out
    exactly: ``sqrt(xi - anchor) = tau sqrt(dz)`` (principal root; identical
    to the pointwise branch since ``tau > 0``), which sidesteps the
    cancellation in ``xi - anchor`` that would otherwise scramble the branch
    near the anchor.  The reduced product over the remaining endpoints has
    all its cuts left of the anchor, so it is analytic along the segment.
    """
    anchor = complex(path[0])
    rest = np.asarray(sys.endpoints[:-1])

    def sqrt_h_reduced(xi):
        return np.prod(np.sqrt(xi[..., None] - rest), axis=-1)

    dz = complex(path[1]) - anchor
    root_dz = np.sqrt(complex(dz))

    def g_first(tau):
        xi = anchor + tau**2 * dz
        return 2.0 * root_dz * numer(xi) / sqrt_h_reduced(xi)

    total = integrate_unit_interval(g_first, tol=tol)
    if len(path) > 2:
        def f_full(xi):
            return numer(xi) / sys.sqrt_h(xi)

        total += path_integral(f_full, path[1:], tol=tol)
    return total


def _green_exponent_inf(sys: IntervalSystem, z: complex) -> tuple[complex, str]:
    r = solve_r_inf(sys)
    path, note = _route(sys, z)
    return _anchored_integral(sys, r, path), note


def green_inf(sys: IntervalSystem, z: complex) -> GreenEvaluation:
    """Green's function and complex mapping with pole at infinity.

    ``g`` is positive off E, vanishes on E, and behaves like ``log|z|`` at
    infinity; ``phi = exp`` of the path integral along the canonical route,
    so ``|phi| = exp(g)`` exactly and the phase is the one accumulated on
    that route.
    """
    z = _require_off_bands(sys, z, "query point")
    exponent, note = _green_exponent_inf(sys, z)
    return GreenEvaluation(g=float(exponent.real), phi=complex(np.exp(exponent)),
                           branch_note=note)


def green_pole(sys: IntervalSystem, x0: float, z: complex) -> GreenEvaluation:
    """Green's function and mapping with a finite real pole ``x0 not in E``."""
    x0 = float(x0)
    if sys.band_of(x0) is not None:
        raise ValidationError(f"pole x0={x0} lies on the band system")
    z = _require_off_bands(sys, z, "query point")
    if z == complex(x0):
        raise ValidationError(f"query point coincides with the pole x0={x0}")
    r = solve_r_x0(sys, x0)

    def numer(xi):
        return r(xi) / (xi - x0)

    path, note = _route(sys, z, poles=(x0,))
    exponent = _anchored_integral(sys, numer, path)
    return GreenEvaluation(g=float(exponent.real), phi=complex(np.exp(exponent)),
                           branch_note=note)


# -- capacity -----------------------------------------------------------------


def _first_moment(sys: IntervalSystem, r: PeriodPolynomial) -> float:
    # Mean of the equilibrium measure, read off the 1/xi^2 coefficient of
    # r/sqrt(H): mu = c_{l-2} + (sum of endpoints)/2.
    s1 = float(np.sum(sys.endpoints))
    c = r.coefficients[-2] if len(r.coefficients) >= 2 else 0.0
    return c + 0.5 * s1


def capacity(sys: IntervalSystem) -> float:
    """Logarithmic capacity, to quadrature accuracy.

    The Robin constant is extracted from the convergent integral

        J = int_{a_{2l}}^{inf} ( r_inf/sqrt(H) - 1/(xi - mu) ) dxi,

    where ``mu`` matches the subtracted kernel to the density through order
    ``1/xi^2`` (mu is the mean of the equilibrium measure, strictly inside
    the system's span, so the kernel is regular on the integration ray).
    Then ``cap = (a_{2l} - mu) * exp(-J)``.  The tail beyond a cutoff is
    mapped to a bounded interval by ``u = 1/xi``, where the integrand is
    analytic and vanishes linearly, so both pieces converge spectrally.
    """
    r = solve_r_inf(sys)
    mu = _first_moment(sys, r)
    a_last = sys.endpoints[-1]
    if not mu < a_last:
        raise NumericsError(f"equilibrium mean {mu} not left of last endpoint {a_last}")

    cutoff = a_last + 10.0 * sys.diameter

    # Head: the kernel integrates in closed form, so only r/sqrt(H) needs
    # quadrature on [anchor, cutoff].
    i_head = _anchored_integral(sys, r, [a_last, cutoff]).real
    i_head -= float(np.log((cutoff - mu) / (a_last - mu)))

    def tail(u):
        xi = 1.0 / u
        return (r(xi) / sys.sqrt_h(xi) - 1.0 / (xi - mu)) / u**2

    i_tail = path_integral(tail, [0.0, 1.0 / cutoff], tol=PATH_TOL).real

    return float((a_last - mu) * np.exp(-(i_head + i_tail)))


def robin_constant(sys: IntervalSystem) -> float:
    """``lim (log|z| - g(z))`` at infinity; equals ``-log capacity``."""
    return float(-np.log(capacity(sys)))


# -- harmonic measures --------------------------------------------------------


def _check_band_index(sys: IntervalSystem, band_index: int) -> int:
    if not 1 <= band_index <= sys.l:
        raise ValidationError(
            f"band_index must be in 1..{sys.l}, got {band_index}"
        )
    return band_index - 1


def harmonic_measure_inf(sys: IntervalSystem, band_index: int, raw: bool = False) -> float:
    """Equilibrium mass of band ``E_j`` (1-based ``band_index``).

    Computed as ``(1/pi) int_{E_j} |r_inf| / sqrt(|H|)``.  The raw integral
    (without the ``1/pi``) is available with ``raw=True``; the normalized
    values sum to 1 over the bands.
    """
    idx = _check_band_index(sys, band_index)
    r = solve_r_inf(sys)
    lo, hi = sys.bands[idx]
    w = _weight_dropping(sys, (2 * idx, 2 * idx + 1))
    val = singular_integral(lambda x: np.abs(r(x)) * w(x), lo, hi)
    return float(val if raw else val / np.pi)


def harmonic_measure_at(
    sys: IntervalSystem, x0: float, band_index: int, raw: bool = False
) -> float:
    """Harmonic measure of band ``E_j`` seen from the real point ``x0``.

    Density ``(1/pi) |r_{x0}(t)| / (|t - x0| sqrt(|H(t)|))`` on the bands;
    the finite-pole analogue of the equilibrium density, and the quantity a
    Brownian path started at ``x0`` realizes as its first-hit distribution.
    """
    x0 = float(x0)
    if sys.band_of(x0) is not None:
        raise ValidationError(f"x0={x0} lies on the band system")
    idx = _check_band_index(sys, band_index)
    r = solve_r_x0(sys, x0)
    lo, hi = sys.bands[idx]
    w = _weight_dropping(sys, (2 * idx, 2 * idx + 1))
    val = singular_integral(
        lambda x: np.abs(r(x)) / np.abs(x - x0) * w(x), lo, hi
    )
    return float(val if raw else val / np.pi)


def pole_mapping_modulus_at_infinity(
    sys: IntervalSystem, x0: float, method: str = "symmetry"
) -> float:
    """``lim_{z to inf} |phi(z, x0)|``, the mapping radius seen from the pole.

    ``method='symmetry'`` uses the symmetry of the Green's function in its
    two arguments: the limit equals ``exp(g(x0, inf))``, available directly
    and to full accuracy.  ``method='limit'`` evaluates ``g(z, x0)`` at two
    large radii and extrapolates the ``1/R`` term away; it exists to confirm
    the symmetry reading numerically.
    """
    if method == "symmetry":
        return float(np.exp(green_inf(sys, x0).g))
    if method == "limit":
        radius = 50.0 * sys.diameter + 10.0 * max(abs(x0), abs(sys.endpoints[0]),
                                                  abs(sys.endpoints[-1]))
        g1 = green_pole(sys, x0, sys.endpoints[-1] + radius).g
        g2 = green_pole(sys, x0, sys.endpoints[-1] + 2.0 * radius).g
        return float(np.exp(2.0 * g2 - g1))
    raise ValidationError(f"unknown method {method!r}")
