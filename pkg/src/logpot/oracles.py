"""Brute-force cross-checks, independent of the period-polynomial machinery.

Three oracles gate the analytic formulas elsewhere in the package:

* ``equilibrium_capacity`` discretizes the equilibrium problem directly: the
  measure's smooth density (in the cosine variable of each band) is expanded
  in Chebyshev polynomials, the log-potential is forced to be constant at
  collocation points, and capacity comes out of the constant.  Same-band
  potential entries use the exact log moments of the arcsine weight, so the
  method converges spectrally; no square-root branch, no period polynomial.
* ``brownian_hm`` samples harmonic measure with walk-on-spheres: jump to a
  uniform point on the largest circle centered at the walker that avoids the
  bands, absorb when within ``h`` of them.  A start "at infinity" is a
  uniform point on a large circle; averaging over that circle reproduces the
  value at infinity of any function harmonic outside it, so the only biases
  are the ``O(h)`` shell and Monte Carlo noise.
* ``pv_excision`` computes principal values the slow, classical way:
  symmetric excision plus Richardson extrapolation of the excision radius.

Randomness is counter-based: paths are simulated in fixed-size blocks and
block ``i`` draws from ``Philox(key=(seed, i))``, so results are identical
no matter how blocks are scheduled.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import NumericsError, ValidationError
from .intervals import IntervalSystem

__all__ = [
    "EquilibriumSolve",
    "WalkConfig",
    "solve_equilibrium",
    "equilibrium_capacity",
    "brownian_hm",
    "brownian_hm_all",
    "pv_excision",
]


# -- equilibrium measure ------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumSolve:
    """Discretized equilibrium measure: node positions, weights, Robin constant."""

    nodes: tuple[float, ...]
    weights: tuple[float, ...]
    robin_constant: float
    residual: float

    @property
    def capacity(self) -> float:
        return float(np.exp(-self.robin_constant))


def solve_equilibrium(sys: IntervalSystem, nodes_per_band: int = 64) -> EquilibriumSolve:
    """Solve the constant-potential problem for the equilibrium measure.

    Unknowns are Chebyshev coefficients of the density's smooth part on each
    band plus the Robin constant; equations are potential constancy at
    ``nodes_per_band`` interior collocation points per band plus unit mass.
    """
    if nodes_per_band < 16:
        raise ValidationError("nodes_per_band must be at least 16")
    n = nodes_per_band
    l = sys.l
    mids = np.array([0.5 * (lo + hi) for lo, hi in sys.bands])
    rads = np.array([0.5 * (hi - lo) for lo, hi in sys.bands])

    t_nodes = np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n))
    t_coll = np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
    # T_k at the quadrature nodes, for the cross-band quadrature sums.
    tk_nodes = np.cos(np.arange(n)[:, None] * np.arccos(t_nodes)[None, :])

    size = l * n + 1
    a = np.zeros((size, size))
    b = np.zeros(size)

    def col(band, k):
        return band * n + k

    row = 0
    for bp in range(l):  # collocation band
        y = mids[bp] + rads[bp] * t_coll
        for j in range(n):
            for bq in range(l):  # source band
                if bq == bp:
                    a[row, col(bq, 0)] += np.pi * np.log(rads[bq] / 2.0)
                    for k in range(1, n):
                        a[row, col(bq, k)] += -(np.pi / k) * np.cos(k * np.arccos(t_coll[j]))
                else:
                    logs = np.log(np.abs(y[j] - (mids[bq] + rads[bq] * t_nodes)))
                    a[row, col(bq, 0) : col(bq, n)] += (np.pi / n) * (tk_nodes @ logs)
            a[row, -1] = 1.0
            row += 1
    # unit total mass
    for bq in range(l):
        a[row, col(bq, 0)] = np.pi
    b[row] = 1.0

    try:
        sol = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(
            "equilibrium discretization is singular; increase nodes_per_band"
        ) from exc

    robin = float(sol[-1])
    coeffs = sol[:-1].reshape(l, n)

    # discrete weights at the quadrature nodes; they are >= 0 for a valid
    # solve and sum to the enforced unit mass
    nodes, weights = [], []
    for bq in range(l):
        density = coeffs[bq] @ tk_nodes
        nodes.extend(mids[bq] + rads[bq] * t_nodes)
        weights.extend(np.pi / n * density)

    # potential-constancy residual at fresh midpoints between collocations
    t_check = np.cos((np.arange(1, n) + 0.5) * np.pi / (n + 1))
    resid = 0.0
    for bp in range(l):
        yc = mids[bp] + rads[bp] * t_check
        pot = np.full_like(yc, 0.0)
        for bq in range(l):
            if bq == bp:
                pot += np.pi * coeffs[bq, 0] * np.log(rads[bq] / 2.0)
                for k in range(1, n):
                    pot += -(np.pi / k) * coeffs[bq, k] * np.cos(k * np.arccos(t_check))
            else:
                xs = mids[bq] + rads[bq] * t_nodes
                dens = coeffs[bq] @ tk_nodes
                pot += (np.pi / n) * (np.log(np.abs(yc[:, None] - xs)) * dens).sum(axis=1)
        resid = max(resid, float(np.max(np.abs(pot + robin))))

    return EquilibriumSolve(
        nodes=tuple(float(x) for x in nodes),
        weights=tuple(float(w) for w in weights),
        robin_constant=robin,
        residual=resid,
    )


def equilibrium_capacity(sys: IntervalSystem, nodes_per_band: int = 64) -> tuple[float, float]:
    """(capacity estimate, Robin constant) from the equilibrium discretization."""
    sol = solve_equilibrium(sys, nodes_per_band)
    return sol.capacity, sol.robin_constant


# -- walk on spheres ----------------------------------------------------------


@dataclass(frozen=True)
class WalkConfig:
    """Walk-on-spheres configuration.

    ``start=None`` means "from infinity": walkers begin uniformly on a circle
    of radius ``start_radius_factor * diameter`` around the system's center.
    ``h`` is the absorption half-width around the bands (default
    ``1e-4 * diameter``); ``budget`` is the number of paths.
    """

    start: complex | None = None
    h: float | None = None
    budget: int = 100_000
    seed: int = 0
    max_steps: int = 100_000
    start_radius_factor: float = 50.0
    block: int = 8192

    def __post_init__(self):
        if self.budget < 10_000:
            raise ValidationError("path budget must be at least 10^4")
        if self.h is not None and self.h <= 0:
            raise ValidationError("absorption width h must be positive")


def _band_distances(sys: IntervalSystem, pts: np.ndarray) -> np.ndarray:
    """(npts, l) distances from complex points to each band segment."""
    x, y = pts.real[:, None], pts.imag[:, None]
    lo = np.array([b[0] for b in sys.bands])[None, :]
    hi = np.array([b[1] for b in sys.bands])[None, :]
    dx = x - np.clip(x, lo, hi)
    return np.hypot(dx, y)


@functools.lru_cache(maxsize=64)
def brownian_hm_all(sys: IntervalSystem, cfg: WalkConfig) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Hitting fractions and standard errors for every band at once.

    Walkers that drift beyond 1.5x the start radius are returned to the
    start circle in a single exact move: a path outside that circle must
    cross it before reaching the bands, and the crossing point follows the
    exterior Poisson kernel, sampled by the Moebius map
    ``e^{i phi} = (e^{i psi} + c) / (1 + c e^{i psi})`` with ``psi`` uniform
    and ``c`` the radius ratio.  This keeps the walk in a bounded region
    without biasing the hit distribution.
    """
    h = cfg.h if cfg.h is not None else 1e-4 * sys.diameter
    center = 0.5 * (sys.endpoints[0] + sys.endpoints[-1])
    radius = cfg.start_radius_factor * sys.diameter
    far = 1.5 * radius
    if cfg.start is not None:
        start = complex(cfg.start)
        if sys.distance(start) <= h:
            raise ValidationError(f"start {start} is inside the absorption shell")
        radius = max(radius, 2.0 * abs(start - center))
        far = 1.5 * radius

    counts = np.zeros(sys.l, dtype=np.int64)
    absorbed_total = 0
    done = 0
    block_index = 0
    while done < cfg.budget:
        m = min(cfg.block, cfg.budget - done)
        rng = np.random.Generator(np.random.Philox(key=[cfg.seed, block_index]))
        if cfg.start is None:
            theta = rng.uniform(0.0, 2.0 * np.pi, m)
            z = center + radius * np.exp(1j * theta)
        else:
            z = np.full(m, complex(start))
        for _ in range(cfg.max_steps):
            if z.size == 0:
                break
            d = _band_distances(sys, z)
            dmin = d.min(axis=1)
            hit = dmin <= h
            if np.any(hit):
                counts += np.bincount(d[hit].argmin(axis=1), minlength=sys.l)
                absorbed_total += int(hit.sum())
                z, dmin = z[~hit], dmin[~hit]
                if z.size == 0:
                    break
            rho = np.abs(z - center)
            out = rho > far
            if np.any(out):
                c = radius / rho[out]
                psi = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, int(out.sum())))
                phi = (psi + c) / (1.0 + c * psi)
                z[out] = center + radius * phi * (z[out] - center) / rho[out]
                dmin[out] = _band_distances(sys, z[out]).min(axis=1)
            theta = rng.uniform(0.0, 2.0 * np.pi, z.size)
            z = z + dmin * np.exp(1j * theta)
        done += m
        block_index += 1

    rate = absorbed_total / cfg.budget
    est = counts / max(absorbed_total, 1)
    err = np.sqrt(est * (1.0 - est) / max(absorbed_total, 1))
    if rate < 0.99:
        raise NumericsError(
            f"only {rate:.1%} of walks were absorbed within max_steps",
            best_estimate=tuple(est),
        )
    return tuple(float(v) for v in est), tuple(float(v) for v in err)


def brownian_hm(sys: IntervalSystem, cfg: WalkConfig, band_index: int) -> tuple[float, float]:
    """(estimate, stderr) of the harmonic measure of band ``band_index`` (1-based)."""
    if not 1 <= band_index <= sys.l:
        raise ValidationError(f"band_index must be in 1..{sys.l}, got {band_index}")
    est, err = brownian_hm_all(sys, cfg)
    return est[band_index - 1], err[band_index - 1]


# -- excised principal values --------------------------------------------------


def pv_excision(f, alpha: float, beta: float, x0: float, eps_sequence) -> float:
    """Principal value of ``f(x)/((x - x0) sqrt((x - a)(b - x)))`` by excision.

    Integrates over ``[a, x0 - eps]`` and ``[x0 + eps, b]`` (endpoint
    square-root weights handled by the quadrature's algebraic-weight mode)
    for each excision radius, then extrapolates ``eps -> 0`` with a Neville
    table.  Raises when the extrapolants do not settle.
    """
    eps_seq = [float(e) for e in eps_sequence]
    if not alpha < x0 < beta:
        raise ValidationError(f"x0={x0} must lie strictly inside ({alpha}, {beta})")
    if any(e2 >= e1 for e1, e2 in zip(eps_seq, eps_seq[1:])) or not eps_seq:
        raise ValidationError("eps_sequence must be strictly decreasing")
    if x0 - eps_seq[0] <= alpha or x0 + eps_seq[0] >= beta:
        raise ValidationError("largest excision radius reaches the endpoints")

    vals = []
    for eps in eps_seq:
        left, _ = quad(
            lambda x: f(x) / ((x - x0) * np.sqrt(beta - x)),
            alpha, x0 - eps, weight="alg", wvar=(-0.5, 0.0),
            epsabs=1e-13, epsrel=1e-13, limit=400,
        )
        right, _ = quad(
            lambda x: f(x) / ((x - x0) * np.sqrt(x - alpha)),
            x0 + eps, beta, weight="alg", wvar=(0.0, -0.5),
            epsabs=1e-13, epsrel=1e-13, limit=400,
        )
        vals.append(left + right)

    # Neville extrapolation to eps = 0
    tab = list(vals)
    n = len(tab)
    last_diag = tab[0]
    for level in range(1, n):
        new = []
        for i in range(n - level):
            e_i, e_ik = eps_seq[i], eps_seq[i + level]
            new.append((e_i * tab[i + 1] - e_ik * tab[i]) / (e_i - e_ik))
        tab = new
        prev_diag, last_diag = last_diag, tab[0]
    if n >= 3 and abs(last_diag - prev_diag) > 1e-7 * max(1.0, abs(last_diag)):
        raise NumericsError(
            "excision sequence is not Cauchy; refine eps_sequence",
            best_estimate=last_diag,
            error_bound=abs(last_diag - prev_diag),
        )
    return float(last_diag)
