"""Piecewise plane-wave eigenfunctions.

A :class:`PiecewiseWave` stores, for each region, the coefficients of
``exp(ikx)`` and ``exp(-ikx)`` in the global coordinate.  Closed forms written
with sines and cosines are converted to that representation when the wave is
built, so evaluation, derivatives, Wronskians and overlaps all work on the
same data.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .errors import DomainError, PreconditionError
from .scatter import HARD_WALL, ScatteringCenter, composite_matrix, prepare_centers, region_coefficients


@dataclass(frozen=True)
class Region:
    x_lo: float
    x_hi: float
    c_plus: complex
    c_minus: complex


@dataclass(frozen=True)
class PiecewiseWave:
    """``c_plus e^{ikx} + c_minus e^{-ikx}`` on consecutive regions.

    ``jumps[i]`` is the delta strength ``g`` sitting on the boundary between
    regions ``i`` and ``i + 1`` (0 for a plain interface); the derivative there
    jumps by ``2 g psi``.  ``wall_left`` marks psi = 0 at the left end.  Waves
    that are not stationary solutions (``stationary=False``) may be
    discontinuous.
    """

    regions: tuple[Region, ...]
    k: float
    jumps: tuple[complex, ...] = ()
    wall_left: bool = False
    stationary: bool = True

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        if not self.jumps:
            object.__setattr__(self, "jumps", (0j,) * (len(self.regions) - 1))
        if len(self.jumps) != len(self.regions) - 1:
            raise ValueError("need one jump strength per interior boundary")
        for left, right in zip(self.regions, self.regions[1:]):
            if left.x_hi != right.x_lo:
                raise ValueError("regions must be contiguous")

    @property
    def boundaries(self) -> np.ndarray:
        return np.array([r.x_hi for r in self.regions[:-1]])

    @property
    def domain(self) -> tuple[float, float]:
        return self.regions[0].x_lo, self.regions[-1].x_hi

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([[r.c_plus, r.c_minus] for r in self.regions])

    def _index(self, x: np.ndarray, side: str) -> np.ndarray:
        lo, hi = self.domain
        if np.any(x < lo) or np.any(x > hi):
            raise DomainError(f"x outside the wave's domain [{lo}, {hi}]")
        return np.searchsorted(self.boundaries, x, side="right" if side == "right" else "left")

    def _terms(self, x, side: str):
        x = np.asarray(x, dtype=float)
        idx = self._index(x, side)
        c = self.coefficients[idx]
        ep = np.exp(1j * self.k * x)
        return c[..., 0] * ep, c[..., 1] / ep

    def __call__(self, x, side: str = "right"):
        return evaluate(self, x, side)

    def derivative(self, x, side: str = "right", order: int = 1):
        plus, minus = self._terms(x, side)
        ik = 1j * self.k
        return ik**order * plus + (-ik) ** order * minus


def evaluate(wave: PiecewiseWave, x, side: str = "right"):
    """Value at ``x``; on a boundary ``side`` picks the region used."""
    plus, minus = wave._terms(x, side)
    out = plus + minus
    return complex(out) if np.ndim(out) == 0 else out


def check_wave(wave: PiecewiseWave, samples: int = 7) -> dict[str, float]:
    """Largest residuals of the stationary Schroedinger problem.

    ``helmholtz``: -psi''/2 - k^2 psi/2 inside each region (from the stored
    analytic form); ``continuity`` and ``jump`` at the interior boundaries;
    ``wall``: |psi| at a hard-wall left end.
    """
    out = {"helmholtz": 0.0, "continuity": 0.0, "jump": 0.0, "wall": 0.0}
    k = wave.k
    for r in wave.regions:
        lo = r.x_lo if math.isfinite(r.x_lo) else r.x_hi - 10.0
        hi = r.x_hi if math.isfinite(r.x_hi) else lo + 10.0
        xs = np.linspace(lo, hi, samples + 2)[1:-1]
        ep = np.exp(1j * k * xs)
        psi = r.c_plus * ep + r.c_minus / ep
        d2 = -(k**2) * (r.c_plus * ep + r.c_minus / ep)
        out["helmholtz"] = max(out["helmholtz"], float(np.max(np.abs(-d2 / 2 - k**2 * psi / 2))))
    for x, g in zip(wave.boundaries, wave.jumps):
        left, right = evaluate(wave, x, "left"), evaluate(wave, x, "right")
        out["continuity"] = max(out["continuity"], abs(right - left))
        slope_jump = wave.derivative(x, "right") - wave.derivative(x, "left")
        out["jump"] = max(out["jump"], abs(slope_jump - 2 * g * left))
    if wave.wall_left:
        out["wall"] = abs(evaluate(wave, wave.domain[0]))
    return out


def two_delta_ss_wave(V1: float, V2: float, x1: float, x2: float, tol: float = 1e-9) -> PiecewiseWave:
    """Coalesced solution of two gain deltas at their singularity k = V1 + V2.

    Measured from ``x1`` (u = x - x1) the wave is ``exp(-iKu)`` on the left,
    ``cos Ku + i (V1-V2)/K sin Ku`` between the deltas and ``exp(iKu)`` on the
    right, K = V1 + V2.
    """
    K = V1 + V2
    if not K > 0:
        raise PreconditionError(f"V1 + V2 must be positive, got {K}")
    if x2 < x1:
        raise PreconditionError("need x1 <= x2")
    m = K * (x2 - x1) / math.pi
    if abs(m - round(m)) > tol * max(1.0, abs(m)):
        raise PreconditionError(f"(V1+V2)(x2-x1) = {m} pi is not a multiple of pi: not a singular geometry")
    shift = cmath.exp(1j * K * x1)
    beta = (V1 - V2) / K
    left = Region(-math.inf, x1, 0j, shift)
    right_tail = Region(x2, math.inf, 1 / shift, 0j)
    if x2 == x1:
        return PiecewiseWave((left, Region(x1, math.inf, 1 / shift, 0j)), K, (1j * K,))
    middle = Region(x1, x2, (1 + beta) / 2 / shift, (1 - beta) / 2 * shift)
    return PiecewiseWave((left, middle, right_tail), K, (1j * V1, 1j * V2))


def cavity_wave(k: float, gamma: float, a: float) -> PiecewiseWave:
    """Scattering solution for a wall at 0 and a delta ``i*gamma`` at ``a``.

    sin(kx) inside; sin(kx) + (2i gamma / k) sin(k(x-a)) sin(ka) outside.
    """
    if not k > 0:
        raise PreconditionError(f"k must be positive, got {k}")
    if not a > 0:
        raise PreconditionError(f"a must be positive, got {a}")
    beta = 2j * gamma / k * math.sin(k * a)
    inside = Region(0.0, a, -0.5j, 0.5j)
    e = cmath.exp(1j * k * a)
    outside = Region(a, math.inf, -0.5j + beta / (2j * e), 0.5j - beta * e / 2j)
    return PiecewiseWave((inside, outside), k, (1j * gamma,), wall_left=True)


def initial_cavity_state(k_c: float, a: float) -> PiecewiseWave:
    """``(e^{ik_c x} - e^{-ik_c x}) / sqrt(Lambda)`` on (0, a), zero beyond; unit L2 norm."""
    if not k_c > 0:
        raise PreconditionError(f"k_c must be positive, got {k_c}")
    if not a > 0:
        raise PreconditionError(f"a must be positive, got {a}")
    lam = 2 * a - math.sin(2 * k_c * a) / k_c
    c = 1 / math.sqrt(lam)
    regions = (Region(0.0, a, c, -c), Region(a, math.inf, 0j, 0j))
    return PiecewiseWave(regions, k_c, wall_left=True, stationary=False)


def jost_wave(centers: Sequence[ScatteringCenter], k: float, side: str = "plus") -> PiecewiseWave:
    """Jost solution: ``plus`` is exp(ikx) on the far right, ``minus`` is exp(-ikx) on the far left."""
    cs = prepare_centers(centers)
    if any(c.kind == HARD_WALL for c in cs) or any(c.is_lattice for c in cs):
        raise PreconditionError("Jost waves are built for continuous deltas only")
    if side == "plus":
        left = composite_matrix(cs, k).solve(1, 0)
    elif side == "minus":
        left = (0j, 1 + 0j)
    else:
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    coeffs = region_coefficients(cs, k, left)
    edges = [-math.inf] + [c.position for c in cs] + [math.inf]
    regions = tuple(Region(edges[i], edges[i + 1], *coeffs[i]) for i in range(len(coeffs)))
    return PiecewiseWave(regions, k, tuple(c.strength for c in cs))


def _exp_integral(q: float, lo: float, hi: float) -> complex:
    """Integral of exp(iqx) over [lo, hi]."""
    if abs(q) * (hi - lo) < 1e-8:
        return (hi - lo) * cmath.exp(1j * q * (lo + hi) / 2)
    return (cmath.exp(1j * q * hi) - cmath.exp(1j * q * lo)) / (1j * q)


def overlap(bra: PiecewiseWave, ket: PiecewiseWave, x_lo: float, x_hi: float) -> complex:
    """Exact ``integral conj(bra) ket dx`` over the finite window [x_lo, x_hi]."""
    if not (math.isfinite(x_lo) and math.isfinite(x_hi)) or x_hi <= x_lo:
        raise PreconditionError("overlaps need a finite, non-empty window")
    for w in (bra, ket):
        lo, hi = w.domain
        if x_lo < lo or x_hi > hi:
            raise DomainError(f"window [{x_lo}, {x_hi}] exceeds the domain [{lo}, {hi}]")
    cuts = sorted({x_lo, x_hi, *[b for b in bra.boundaries if x_lo < b < x_hi],
                   *[b for b in ket.boundaries if x_lo < b < x_hi]})
    total = 0j
    for lo, hi in zip(cuts, cuts[1:]):
        mid = (lo + hi) / 2
        i = bra._index(np.array(mid), "right")
        j = ket._index(np.array(mid), "right")
        a, b = bra.regions[int(i)].c_plus.conjugate(), bra.regions[int(i)].c_minus.conjugate()
        c, d = ket.regions[int(j)].c_plus, ket.regions[int(j)].c_minus
        k, q = bra.k, ket.k
        total += (a * c * _exp_integral(q - k, lo, hi) + a * d * _exp_integral(-q - k, lo, hi)
                  + b * c * _exp_integral(q + k, lo, hi) + b * d * _exp_integral(k - q, lo, hi))
    return total


def write_csv(wave: PiecewiseWave, xs, stream: TextIO) -> None:
    """Columns x, Re psi, Im psi, |psi|^2 with round-trip precision."""
    values = evaluate(wave, np.asarray(xs, dtype=float))
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["x", "re_psi", "im_psi", "abs2_psi"])
    for x, v in zip(np.atleast_1d(xs), np.atleast_1d(values)):
        writer.writerow([f"{x:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}", f"{abs(v) ** 2:.17g}"])
