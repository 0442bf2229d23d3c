"""Shrinking-band families and the asymptotic factorization they obey.

Add to a base system ``E`` a set of extra bands ``I_n``, one around each
center ``c_k``, with widths from a decreasing schedule.  As the widths go to
zero the Green's function of the union factorizes: writing ``w_k`` for the
harmonic measure (at infinity) of the k-th small band within the union,

    g(z, inf, E u I_n)  =  g(z, inf, E) - sum_k w_k g(z, c_k, E) + O(max w_k^2)

uniformly on compacta away from E and the centers.  Two consequences are
checked alongside: capacity of the union approaches
``cap(E) prod_k |phi(inf, c_k, E)|^{w_k}``, and the harmonic measure of a
base band loses mass ``sum_k w_k omega(c_k, E_j, E)``.

``convergence_sweep`` runs a width schedule, compares exact values (computed
on the enlarged system) against the factorized form, and reports the ratio
``|error| / (max_k w_k)^2`` per quantity.  The ratio staying bounded is the
testable content of the error order; the FAIL heuristic flags a series whose
ratio doubles twice consecutively over the last three refinements, ignoring
entries whose absolute error sits at the quadrature noise floor (an exactly
zero error would otherwise trip the doubling test on rounding dust).

Verification happens on Green's values (log-moduli) throughout: there the
factorization is additive and single-valued, while the complex non-integer
powers would carry a branch ambiguity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .green import (
    capacity,
    green_inf,
    green_pole,
    harmonic_measure_at,
    harmonic_measure_inf,
)
from .intervals import IntervalSystem, make_system

__all__ = [
    "ShrinkFamily",
    "AsymptoticReport",
    "SweepResult",
    "make_family",
    "shrunk_system",
    "small_band_measures",
    "phi_asymptotic",
    "capacity_asymptotic",
    "hm_asymptotic",
    "convergence_sweep",
    "ratio_series_flags",
]

NOISE_FLOOR = 1e-11

_PLACEMENTS = ("centered", "left-end", "right-end")


@dataclass(frozen=True)
class ShrinkFamily:
    """Base system, limit centers, and a decreasing width schedule.

    ``placement`` maps ``(c, eps)`` to a band of width ``eps`` containing
    ``c``: centered on it, or with ``c`` at the left or right endpoint.
    """

    base: IntervalSystem
    centers: tuple[float, ...]
    epsilons: tuple[float, ...]
    placement: str = "centered"

    def __post_init__(self):
        if not self.centers:
            raise ValidationError("at least one center is required")
        if any(c2 <= c1 for c1, c2 in zip(self.centers, self.centers[1:])):
            raise ValidationError("centers must be strictly increasing")
        for c in self.centers:
            if self.base.band_of(c) is not None:
                raise ValidationError(f"center {c} lies on the base system")
        if not self.epsilons:
            raise ValidationError("width schedule is empty")
        if any(e <= 0 for e in self.epsilons):
            raise ValidationError("widths must be positive")
        if any(e2 >= e1 for e1, e2 in zip(self.epsilons, self.epsilons[1:])):
            raise ValidationError("width schedule must be strictly decreasing")
        if self.placement not in _PLACEMENTS:
            raise ValidationError(f"placement must be one of {_PLACEMENTS}")
        # The widest configuration dominates all others: validate it.
        shrunk_system(self, 0)

    @property
    def num_steps(self) -> int:
        return len(self.epsilons)

    @property
    def m(self) -> int:
        return len(self.centers)

    def interval_for(self, k: int, n: int) -> tuple[float, float]:
        """The k-th small band at schedule step ``n``."""
        c, eps = self.centers[k], self.epsilons[n]
        if self.placement == "centered":
            return c - 0.5 * eps, c + 0.5 * eps
        if self.placement == "left-end":
            return c, c + eps
        return c - eps, c


def make_family(
    base: IntervalSystem,
    centers: Sequence[float],
    num_steps: int = 6,
    eps0: float | None = None,
    placement: str = "centered",
) -> ShrinkFamily:
    """Family with the geometric schedule ``eps0 * 2^-n``.

    The default ``eps0`` is a quarter of the smallest of: distances from
    centers to the base system, and distances between consecutive centers.
    That keeps every configuration separated from the base bands by at least
    half the center distance.
    """
    centers = tuple(sorted(float(c) for c in centers))
    if num_steps < 1:
        raise ValidationError("num_steps must be positive")
    if eps0 is None:
        dists = [base.distance(c) for c in centers]
        dists += [c2 - c1 for c1, c2 in zip(centers, centers[1:])]
        eps0 = min(dists) / 4.0
    eps = tuple(eps0 * 2.0**-n for n in range(num_steps))
    return ShrinkFamily(base=base, centers=centers, epsilons=eps, placement=placement)


def _check_step(fam: ShrinkFamily, n: int) -> int:
    if not 0 <= n < fam.num_steps:
        raise ValidationError(f"schedule step {n} outside 0..{fam.num_steps - 1}")
    return n


def shrunk_system(fam: ShrinkFamily, n: int) -> IntervalSystem:
    """The combined validated system: base bands plus the step-n small bands."""
    n = _check_step(fam, n)
    pairs = list(fam.base.bands)
    pairs += [fam.interval_for(k, n) for k in range(fam.m)]
    try:
        return make_system(pairs)
    except ValidationError as exc:
        raise ValidationError(f"placement collision at step {n}: {exc}") from exc


def _band_positions(fam: ShrinkFamily, n: int) -> tuple[list[int], list[int]]:
    """1-based positions of (base bands, small bands) inside the combined system."""
    tagged = [(lo, "base", j) for j, (lo, _) in enumerate(fam.base.bands)]
    tagged += [
        (fam.interval_for(k, n)[0], "small", k) for k in range(fam.m)
    ]
    tagged.sort()
    base_pos = [0] * fam.base.l
    small_pos = [0] * fam.m
    for pos, (_, kind, idx) in enumerate(tagged, start=1):
        (base_pos if kind == "base" else small_pos)[idx] = pos
    return base_pos, small_pos


def small_band_measures(fam: ShrinkFamily, n: int) -> np.ndarray:
    """Harmonic measures at infinity of the small bands within the union."""
    n = _check_step(fam, n)
    comb = shrunk_system(fam, n)
    _, small_pos = _band_positions(fam, n)
    return np.array([harmonic_measure_inf(comb, pos) for pos in small_pos])


def phi_asymptotic(
    fam: ShrinkFamily, n: int, z: complex, margin: float | None = None
) -> tuple[float, float]:
    """Factorized Green's value at ``z``: ``(g_approx, exp(g_approx))``.

    ``g_approx = g(z, inf, E) - sum_k w_k g(z, c_k, E)``.  Points closer to
    a center than ``margin`` (default: half its distance to the base) are
    rejected, mirroring the exclusion neighborhoods of the factorization.
    """
    n = _check_step(fam, n)
    z = complex(z)
    for c in fam.centers:
        lim = margin if margin is not None else 0.5 * fam.base.distance(c)
        if abs(z - c) < lim:
            raise ValidationError(
                f"probe {z} is within the exclusion margin {lim:g} of center {c}"
            )
    omegas = small_band_measures(fam, n)
    g = green_inf(fam.base, z).g
    g -= sum(w * green_pole(fam.base, c, z).g for w, c in zip(omegas, fam.centers))
    return float(g), float(np.exp(g))


def capacity_asymptotic(fam: ShrinkFamily, n: int, double_cap_reading: bool = False) -> float:
    """Factorized capacity ``cap(E) * prod_k |phi(inf, c_k, E)|^{w_k}``.

    ``|phi(inf, c_k, E)| = exp(g(c_k, inf, E))`` by the symmetry of the
    Green's function in its arguments.  ``double_cap_reading=True`` returns
    the variant with a second ``cap(E)`` factor; it is recorded by sweeps for
    comparison but is not the implemented reading (a second factor is
    inconsistent with the factorization's behavior at infinity).
    """
    n = _check_step(fam, n)
    omegas = small_band_measures(fam, n)
    cap = capacity(fam.base)
    expo = sum(w * green_inf(fam.base, c).g for w, c in zip(omegas, fam.centers))
    val = cap * float(np.exp(expo))
    return val * cap if double_cap_reading else val


def hm_asymptotic(fam: ShrinkFamily, n: int, band_index: int) -> float:
    """Factorized harmonic measure of base band ``band_index`` (1-based)."""
    n = _check_step(fam, n)
    omegas = small_band_measures(fam, n)
    val = harmonic_measure_inf(fam.base, band_index)
    val -= sum(
        w * harmonic_measure_at(fam.base, c, band_index)
        for w, c in zip(omegas, fam.centers)
    )
    return float(val)


@dataclass(frozen=True)
class AsymptoticReport:
    """Exact vs factorized value of one quantity at one schedule step."""

    n: int
    epsilon: float
    omegas: tuple[float, ...]
    probe_id: str
    exact: float
    approx: float
    abs_error: float
    ratio: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[AsymptoticReport, ...]
    failed_series: tuple[str, ...]

    @property
    def failed(self) -> bool:
        return bool(self.failed_series)

    def series(self, probe_id: str) -> list[AsymptoticReport]:
        return sorted((r for r in self.rows if r.probe_id == probe_id),
                      key=lambda r: r.n)

    @property
    def probe_ids(self) -> list[str]:
        seen = dict.fromkeys(r.probe_id for r in self.rows)
        return list(seen)


def ratio_series_flags(
    ratios: Sequence[float],
    errors: Sequence[float],
    scale: float = 1.0,
    noise_floor: float = NOISE_FLOOR,
) -> bool:
    """True when the ratio doubles twice consecutively over the last three entries.

    Entries whose absolute error is below the noise floor are treated as
    converged and never flag: at that level the ratio measures rounding
    noise, not the factorization error.
    """
    if len(ratios) < 3:
        return False
    r = list(ratios[-3:])
    e = list(errors[-3:])
    if any(err <= noise_floor * max(1.0, scale) for err in e):
        return False
    return r[1] >= 2.0 * r[0] and r[2] >= 2.0 * r[1]


def convergence_sweep(
    fam: ShrinkFamily,
    z_probes: Sequence[complex],
    include_capacity: bool = True,
    include_harmonic_measures: bool = True,
) -> SweepResult:
    """Run the schedule, compare exact against factorized, flag runaway ratios.

    Emits one row per (step, quantity).  Quantities are the Green's values
    at each probe (``z0, z1, ...``), capacity (``cap``, plus the recorded
    alternative ``cap-double-reading``, excluded from failure detection),
    and the base-band harmonic measures (``hm1, hm2, ...``).
    """
    if fam.num_steps < 4:
        raise ValidationError("sweep needs a schedule with at least 4 entries")
    probes = [complex(z) for z in z_probes]

    base_g = {z: green_inf(fam.base, z).g for z in probes}
    pole_g = {
        (c, z): green_pole(fam.base, c, z).g for c in fam.centers for z in probes
    }
    base_cap = capacity(fam.base)
    g_at_centers = {c: green_inf(fam.base, c).g for c in fam.centers}
    base_hm = {j: harmonic_measure_inf(fam.base, j) for j in range(1, fam.base.l + 1)}
    hm_at_centers = {
        (c, j): harmonic_measure_at(fam.base, c, j)
        for c in fam.centers
        for j in range(1, fam.base.l + 1)
    }

    rows = []
    for n in range(fam.num_steps):
        comb = shrunk_system(fam, n)
        base_pos, small_pos = _band_positions(fam, n)
        omegas = np.array([harmonic_measure_inf(comb, pos) for pos in small_pos])
        om_sq = float(np.max(omegas)) ** 2
        eps = fam.epsilons[n]
        om_t = tuple(float(w) for w in omegas)

        def add(probe_id, exact, approx):
            err = abs(exact - approx)
            rows.append(AsymptoticReport(
                n=n, epsilon=eps, omegas=om_t, probe_id=probe_id,
                exact=float(exact), approx=float(approx),
                abs_error=float(err), ratio=float(err / om_sq),
            ))

        for i, z in enumerate(probes):
            exact = green_inf(comb, z).g
            approx = base_g[z] - sum(
                w * pole_g[(c, z)] for w, c in zip(omegas, fam.centers)
            )
            add(f"z{i}", exact, approx)

        if include_capacity:
            cap_exact = capacity(comb)
            expo = sum(w * g_at_centers[c] for w, c in zip(omegas, fam.centers))
            cap_approx = base_cap * float(np.exp(expo))
            add("cap", cap_exact, cap_approx)
            add("cap-double-reading", cap_exact, cap_approx * base_cap)

        if include_harmonic_measures:
            for j in range(1, fam.base.l + 1):
                exact = harmonic_measure_inf(comb, base_pos[j - 1])
                approx = base_hm[j] - sum(
                    w * hm_at_centers[(c, j)] for w, c in zip(omegas, fam.centers)
                )
                add(f"hm{j}", exact, approx)

    result_rows = tuple(rows)
    failed = []
    ids = dict.fromkeys(r.probe_id for r in result_rows)
    for pid in ids:
        if "double" in pid:
            continue
        series = sorted((r for r in result_rows if r.probe_id == pid), key=lambda r: r.n)
        scale = max(1.0, max(abs(r.exact) for r in series))
        if ratio_series_flags([r.ratio for r in series],
                              [r.abs_error for r in series], scale=scale):
            failed.append(pid)
    return SweepResult(rows=result_rows, failed_series=tuple(failed))
