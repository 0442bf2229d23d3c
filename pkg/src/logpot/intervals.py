"""Unions of disjoint closed real intervals and the branched square root of H.

A system is ``E = [a_1,a_2] u ... u [a_{2l-1},a_{2l}]`` with strictly
increasing endpoints and nonempty open gaps between consecutive bands.
``H(x) = prod_j (x - a_j)`` has degree ``2l``; its square root is taken on
the branch that is analytic on ``C \\ E``, positive on ``(a_{2l}, inf)`` and
asymptotic to ``z^l`` at infinity.  That branch is realized as the product of
per-endpoint principal square roots: each factor ``sqrt(z - a_j)`` has its
cut on ``(-inf, a_j]``, and an even number of cuts overlap everywhere except
on the bands, so the product is single-valued exactly off ``E``.

On the real line off ``E`` the branch is real; its sign on the gap between
band ``j`` and band ``j+1`` is ``(-1)^(l-j)``, and ``(-1)^l`` left of the
first band.  On band interiors the two one-sided limits are purely imaginary
and opposite; callers must say which side they want.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "IntervalSystem",
    "BranchedSqrtH",
    "make_system",
    "h_eval",
    "sqrt_h_eval",
]


@dataclass(frozen=True)
class IntervalSystem:
    """A validated union of ``l`` disjoint closed real intervals."""

    endpoints: tuple[float, ...]

    def __post_init__(self):
        pts = self.endpoints
        if len(pts) == 0 or len(pts) % 2 != 0:
            raise ValidationError(
                f"need a positive even number of endpoints, got {len(pts)}"
            )
        if not all(np.isfinite(pts)):
            raise ValidationError(f"endpoints must be finite, got {pts}")
        for u, v in zip(pts, pts[1:]):
            if not u < v:
                raise ValidationError(
                    f"endpoints must be strictly increasing; {u} !< {v} "
                    "(touching or overlapping intervals are rejected)"
                )
        object.__setattr__(self, "_arr", np.asarray(pts, dtype=float))

    # -- structure ---------------------------------------------------------

    @property
    def l(self) -> int:
        """Number of bands."""
        return len(self.endpoints) // 2

    @property
    def bands(self) -> tuple[tuple[float, float], ...]:
        e = self.endpoints
        return tuple((e[2 * j], e[2 * j + 1]) for j in range(self.l))

    @property
    def gaps(self) -> tuple[tuple[float, float], ...]:
        """The ``l - 1`` bounded open intervals between consecutive bands."""
        e = self.endpoints
        return tuple((e[2 * j + 1], e[2 * j + 2]) for j in range(self.l - 1))

    @property
    def span(self) -> tuple[float, float]:
        return self.endpoints[0], self.endpoints[-1]

    @property
    def diameter(self) -> float:
        return self.endpoints[-1] - self.endpoints[0]

    def band_of(self, x: float) -> int | None:
        """Index (0-based) of the band whose closed interval contains x, else None."""
        for j, (lo, hi) in enumerate(self.bands):
            if lo <= x <= hi:
                return j
        return None

    def contains(self, x: float) -> bool:
        return self.band_of(x) is not None

    def distance(self, z: complex) -> float:
        """Euclidean distance from a point of the plane to E."""
        zs = complex(z)
        d = np.inf
        for lo, hi in self.bands:
            xr = min(max(zs.real, lo), hi)
            d = min(d, abs(zs - complex(xr, 0.0)))
        return float(d)

    # -- H and its branched square root -------------------------------------

    def h(self, z):
        """Evaluate ``H(z) = prod_j (z - a_j)``; accepts real/complex scalars or arrays."""
        z = np.asarray(z)
        vals = np.prod(z[..., None] - self._arr, axis=-1)
        return vals[()] if vals.ndim == 0 else vals

    def sqrt_h(self, z, side: str | None = None):
        """Branch-consistent ``sqrt(H)``.

        ``z`` may be a scalar or array, real or complex.  Real points in a
        band interior are a branch cut: pass ``side='upper'`` or
        ``side='lower'`` to select the boundary value there (the two values
        are negatives of each other).  Everywhere else ``side`` is ignored.
        """
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        zv = np.atleast_1d(z).ravel()

        real_mask = zv.imag == 0.0
        x = zv.real
        # A real point strictly inside a band has an odd number of endpoints
        # to its left and is not itself an endpoint.
        idx = np.searchsorted(self._arr, x, side="left")
        on_cut = real_mask & (idx % 2 == 1) & ~np.isin(x, self._arr)
        if np.any(on_cut):
            if side is None:
                raise ValidationError(
                    "point lies in a band interior; pass side='upper' or side='lower'"
                )
            if side not in ("upper", "lower"):
                raise ValidationError(f"side must be 'upper' or 'lower', got {side!r}")
            # Signed zero selects the boundary value of the principal sqrt.
            imag = np.where(on_cut, 0.0 if side == "upper" else -0.0, zv.imag)
            zv = x + 1j * imag

        vals = np.prod(np.sqrt(zv[..., None] - self._arr), axis=-1)
        # Real inputs off the cut have exactly real values; strip rounding
        # dust so downstream sign logic sees clean reals.
        clean = real_mask & ~on_cut
        if np.any(clean):
            vals = np.where(clean, vals.real + 0j, vals)
        if scalar:
            return complex(vals[0])
        return vals.reshape(z.shape)

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {"intervals": [[lo, hi] for lo, hi in self.bands]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "IntervalSystem":
        if not isinstance(data, dict):
            raise ValidationError("system JSON must be an object")
        unknown = set(data) - {"intervals"}
        if unknown:
            raise ValidationError(f"unknown keys in system JSON: {sorted(unknown)}")
        if "intervals" not in data:
            raise ValidationError("system JSON must have an 'intervals' key")
        return make_system(data["intervals"])


@dataclass(frozen=True)
class BranchedSqrtH:
    """The square-root branch owned by a system, as a first-class callable.

    ``convention`` documents the branch: analytic off the bands, positive on
    the real axis right of the last endpoint, ``~ z^l`` at infinity.
    """

    parent: IntervalSystem
    convention: str = "analytic-off-bands, positive right of last endpoint"

    def __call__(self, z, side: str | None = None):
        return self.parent.sqrt_h(z, side=side)


def make_system(pairs: Sequence[Sequence[float]]) -> IntervalSystem:
    """Build a validated system from ``(lo, hi)`` pairs given in any order."""
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("at least one interval is required")
    cleaned = []
    for p in pairs:
        if len(p) != 2:
            raise ValidationError(f"interval must be a (lo, hi) pair, got {p!r}")
        lo, hi = float(p[0]), float(p[1])
        if not lo < hi:
            raise ValidationError(f"interval ({lo}, {hi}) is empty or reversed")
        cleaned.append((lo, hi))
    cleaned.sort()
    for (lo1, hi1), (lo2, hi2) in zip(cleaned, cleaned[1:]):
        if hi1 >= lo2:
            raise ValidationError(
                f"intervals ({lo1}, {hi1}) and ({lo2}, {hi2}) overlap or touch"
            )
    endpoints = tuple(x for pair in cleaned for x in pair)
    return IntervalSystem(endpoints)


def h_eval(sys: IntervalSystem, x):
    """``H(x)``, the monic degree-2l polynomial vanishing at all endpoints."""
    return sys.h(x)


def sqrt_h_eval(sys: IntervalSystem, z, side: str | None = None):
    """Branch value of ``sqrt(H)`` at ``z``; see IntervalSystem.sqrt_h."""
    return sys.sqrt_h(z, side=side)
