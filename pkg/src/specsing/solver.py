"""Locate spectral singularities on the real k axis and design systems that have one.

A spectral singularity of a composite scatterer is a real zero of m22(k).  For
a system bounded by a hard wall on the left, the analogous quantity is the
amplitude of the incoming wave on the right once the wall condition
psi(x_wall) = 0 is imposed, normalised so that it reduces to m22 when the wall
reflects with r = -1 and nothing else is present.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateGeometryError, PreconditionError, SingularAmplitudeError
from .scatter import (
    HARD_WALL,
    ZERO_TOL,
    ScatteringCenter,
    composite_matrix,
    prepare_centers,
)

DEFAULT_GRID_POINTS = 2001
INV_PHI = (math.sqrt(5) - 1) / 2


class SingularPointWarning(RuntimeWarning):
    """A grid point of the scan had to be skipped."""


@dataclass(frozen=True)
class SsQuery:
    centers: tuple[ScatteringCenter, ...]
    k_min: float
    k_max: float
    grid_points: int = DEFAULT_GRID_POINTS
    tolerance: float = ZERO_TOL

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(self.centers))
        if not self.k_min < self.k_max:
            raise PreconditionError(f"need k_min < k_max, got {self.k_min} >= {self.k_max}")
        if self.k_min < 0:
            raise PreconditionError(f"k_min must be non-negative, got {self.k_min}")
        if self.grid_points < 2:
            raise PreconditionError(f"grid_points must be >= 2, got {self.grid_points}")
        if not self.tolerance > 0:
            raise PreconditionError(f"tolerance must be positive, got {self.tolerance}")


@dataclass(frozen=True)
class SsResult:
    k_c: float
    residual: float
    multiplicity_hint: int = 1


@dataclass
class ScanReport:
    """Diagnostics of one scan, kept next to the results."""

    skipped: list[float] = field(default_factory=list)


def matching_residual(r_right_A: complex, r_left_B: complex, separation: float, k: float) -> complex:
    """``r_R^A r_L^B exp(2ik d) - 1``; zero exactly when the pair has a singularity at k."""
    if not separation > 0:
        raise PreconditionError(f"separation must be positive, got {separation}")
    return r_right_A * r_left_B * cmath.exp(2j * k * separation) - 1


def spectral_function(centers: Sequence[ScatteringCenter], k: float) -> complex:
    """m22(k), or its hard-wall analogue when the first center is a wall."""
    cs = prepare_centers(centers)
    if cs and cs[0].kind == HARD_WALL:
        xw = cs[0].position
        m = composite_matrix(cs[1:], k)
        # psi = exp(ik(x-xw)) - exp(-ik(x-xw)) just right of the wall
        return m.m22 - m.m21 * cmath.exp(-2j * k * xw)
    return composite_matrix(cs, k).m22


def _golden_minimize(f, lo: float, hi: float, xtol: float = 1e-15, max_iter: int = 200) -> float:
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if hi - lo <= xtol * max(1.0, abs(lo)):
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    return c if fc < fd else d


def _multiplicity(f, k: float, h: float) -> int:
    """Order of the zero from how |m22| scales between offsets h and 2h."""
    small = max(f(k - h), f(k + h))
    large = max(f(k - 2 * h), f(k + 2 * h))
    if small <= 0 or large <= 0:
        return 1
    return max(1, int(round(math.log2(large / small))))


def find_ss(query: SsQuery, report: ScanReport | None = None) -> list[SsResult]:
    """Scan |m22|^2 on a uniform grid and refine every interior local minimum.

    A refined minimum is accepted when |m22| < ``query.tolerance``.  Grid points
    where the amplitudes are singular are skipped with a warning.
    """
    centers = prepare_centers(query.centers)
    walls = [c for c in centers if c.kind == HARD_WALL]
    if walls and centers[0].kind != HARD_WALL:
        raise PreconditionError("a hard wall is only supported as the leftmost center")

    def modulus(k: float) -> float:
        return abs(spectral_function(centers, k))

    ks = np.linspace(query.k_min, query.k_max, query.grid_points)
    vals = np.empty_like(ks)
    for i, k in enumerate(ks):
        try:
            vals[i] = modulus(k)
        except SingularAmplitudeError:
            vals[i] = np.nan
            if report is not None:
                report.skipped.append(float(k))
            warnings.warn(f"skipping singular grid point k = {k}", SingularPointWarning, stacklevel=2)

    results: list[SsResult] = []
    for i in range(1, len(ks) - 1):
        v0, v1, v2 = vals[i - 1], vals[i], vals[i + 1]
        if np.isnan(v0) or np.isnan(v1) or np.isnan(v2):
            continue
        if not (v1 <= v0 and v1 <= v2) or (v1 == v0 and v1 == v2):
            continue
        k_star = _golden_minimize(modulus, ks[i - 1], ks[i + 1])
        residual = modulus(k_star)
        if residual < query.tolerance:
            step = 1e-4 * (ks[1] - ks[0])
            results.append(SsResult(float(k_star), float(residual), _multiplicity(modulus, k_star, step)))

    results.sort(key=lambda r: r.k_c)
    # neighbouring brackets can converge to the same zero
    unique: list[SsResult] = []
    for r in results:
        if unique and abs(r.k_c - unique[-1].k_c) < 1e-9 * max(1.0, r.k_c):
            if r.residual < unique[-1].residual:
                unique[-1] = r
            continue
        unique.append(r)
    return unique


def design_two_delta(k_c: float, split: float, m: int) -> tuple[float, float, float]:
    """Gain strengths ``(V1, V2)`` and spacing giving a singularity at ``k_c``."""
    if not k_c > 0:
        raise PreconditionError(f"k_c must be positive, got {k_c}")
    if not 0 <= split <= 1:
        raise PreconditionError(f"split must lie in [0, 1], got {split}")
    if m < 0 or int(m) != m:
        raise PreconditionError(f"m must be a non-negative integer, got {m}")
    return split * k_c, (1 - split) * k_c, m * math.pi / k_c


def two_delta_centers(V1: float, V2: float, spacing: float, x1: float = 0.0) -> list[ScatteringCenter]:
    return [ScatteringCenter.gain_delta(x1, V1), ScatteringCenter.gain_delta(x1 + spacing, V2)]


def design_lattice_pair(k_c: float, a: int, kappa: float = 1.0) -> tuple[float, float]:
    """Gain ``gamma`` (site j1, potential i*gamma) and real ``V`` (site j1 + a).

    gamma = 2 kappa sin k_c / (1 - cos 2 k_c a),  V = -2 kappa sin k_c / tan 2 k_c a.
    """
    if not 0 < k_c < math.pi:
        raise PreconditionError(f"k_c must lie in (0, pi), got {k_c}")
    if a < 1 or int(a) != a:
        raise PreconditionError(f"a must be a positive integer, got {a}")
    if not kappa > 0:
        raise PreconditionError(f"kappa must be positive, got {kappa}")
    phase = 2 * k_c * a
    if abs(math.sin(phase)) < 1e-9:
        raise DegenerateGeometryError(
            f"2 k_c a = {phase} is a multiple of pi; no finite (gamma, V) exists"
        )
    s = 2 * kappa * math.sin(k_c)
    return s / (1 - math.cos(phase)), -s / math.tan(phase)


def lattice_pair_centers(gamma: float, V: float, a: int, kappa: float = 1.0, j1: int = 0) -> list[ScatteringCenter]:
    return [ScatteringCenter.site(j1, 1j * gamma, kappa), ScatteringCenter.site(j1 + a, V, kappa)]


def design_cavity(gamma: float, n: int) -> tuple[float, float]:
    """Wavenumber and cavity length for a wall at 0 and a gain delta ``i*gamma`` at ``a``."""
    if not gamma > 0:
        raise PreconditionError(f"gamma must be positive, got {gamma}")
    if n < 0 or int(n) != n:
        raise PreconditionError(f"n must be a non-negative integer, got {n}")
    k_c = 2 * gamma
    return k_c, (n + 0.5) * math.pi / k_c


def cavity_centers(gamma: float, a: float) -> list[ScatteringCenter]:
    return [ScatteringCenter.wall(0.0), ScatteringCenter.gain_delta(a, gamma)]
