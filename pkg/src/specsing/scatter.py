"""Transfer-matrix algebra and closed-form amplitudes for point scatterers.

Units are hbar = m = 1, so the free Hamiltonian is -(1/2) d^2/dx^2 and a plane
wave exp(ikx) has energy k^2/2.  A continuous delta of complex strength ``g``
is the potential ``g * delta(x - x0)``; the imaginary deltas used for gain are
``g = 1j * V``.  On the tight-binding chain the hopping is ``-kappa``, the
dispersion is ``E = -2 kappa cos k`` and a site potential ``V`` acts on a
single site ``j0``.

Every transfer matrix maps the coefficients ``(A, B)`` of
``A exp(ikx) + B exp(-ikx)`` on the left of a center to those on its right
(``x`` is replaced by the site index ``j`` on the lattice).  For all centers
handled here ``t - r = 1``, so the matrix only depends on ``alpha = r / t``::

    M = [[1 + alpha,                alpha * exp(-2ik x0)],
         [-alpha * exp(2ik x0),     1 - alpha          ]]

``alpha`` stays finite at a pole of ``r`` (the single-center spectral
singularity), which is why matrices are assembled from it rather than from
``r`` and ``t`` separately.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    IncompatibleWavenumberError,
    PreconditionError,
    SingularAmplitudeError,
    UnsupportedCenterError,
)

CONTINUOUS_DELTA = "continuous-delta"
HARD_WALL = "hard-wall"
LATTICE_SITE = "lattice-site"
KINDS = (CONTINUOUS_DELTA, HARD_WALL, LATTICE_SITE)

# |m22| below this counts as a zero
ZERO_TOL = 1e-10
# coincident-center merge distance
MERGE_TOL = 1e-12
K_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class ScatteringCenter:
    """One point scatterer.

    ``strength`` is energy x length for a continuous delta and energy for a
    lattice site; a hard wall has none.  ``hopping`` (kappa) is only read for
    lattice sites.
    """

    kind: str
    position: float
    strength: complex = 0j
    hopping: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown center kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == LATTICE_SITE:
            if float(self.position) != int(round(self.position)):
                raise ValueError(f"lattice site position must be an integer, got {self.position}")
            if not self.hopping > 0:
                raise ValueError(f"hopping must be positive, got {self.hopping}")
        object.__setattr__(self, "strength", complex(self.strength))

    @classmethod
    def delta(cls, position: float, strength: complex) -> "ScatteringCenter":
        return cls(CONTINUOUS_DELTA, float(position), strength)

    @classmethod
    def gain_delta(cls, position: float, V: float) -> "ScatteringCenter":
        """Imaginary delta ``1j * V * delta(x - position)``."""
        return cls(CONTINUOUS_DELTA, float(position), 1j * V)

    @classmethod
    def wall(cls, position: float = 0.0) -> "ScatteringCenter":
        return cls(HARD_WALL, float(position))

    @classmethod
    def site(cls, index: int, strength: complex, hopping: float = 1.0) -> "ScatteringCenter":
        return cls(LATTICE_SITE, int(index), strength, hopping)

    @property
    def is_lattice(self) -> bool:
        return self.kind == LATTICE_SITE


@dataclass(frozen=True)
class ScatteringAmplitudes:
    r_left: complex
    r_right: complex
    t_left: complex
    t_right: complex
    k: float


@dataclass(frozen=True)
class TransferMatrix:
    m11: complex
    m12: complex
    m21: complex
    m22: complex
    k: float

    @classmethod
    def identity(cls, k: float) -> "TransferMatrix":
        return cls(1 + 0j, 0j, 0j, 1 + 0j, k)

    @classmethod
    def from_array(cls, arr, k: float) -> "TransferMatrix":
        arr = np.asarray(arr, dtype=complex)
        return cls(complex(arr[0, 0]), complex(arr[0, 1]), complex(arr[1, 0]), complex(arr[1, 1]), k)

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=complex)

    def det(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    def apply(self, a: complex, b: complex) -> tuple[complex, complex]:
        return self.m11 * a + self.m12 * b, self.m21 * a + self.m22 * b

    def solve(self, c: complex, d: complex) -> tuple[complex, complex]:
        """Left coefficients that map to ``(c, d)`` on the right."""
        det = self.det()
        return (self.m22 * c - self.m12 * d) / det, (-self.m21 * c + self.m11 * d) / det

    def amplitudes(self) -> ScatteringAmplitudes:
        """Reflection/transmission amplitudes in the global coordinate frame."""
        if self.m22 == 0:
            raise SingularAmplitudeError(f"m22 = 0 at k = {self.k}: amplitudes diverge")
        return ScatteringAmplitudes(
            r_left=-self.m21 / self.m22,
            r_right=self.m12 / self.m22,
            t_left=self.det() / self.m22,
            t_right=1 / self.m22,
            k=self.k,
        )


def _check_continuous_k(k: float) -> None:
    if not k >= 0:
        raise PreconditionError(f"wavenumber must be positive, got k = {k}")
    if k == 0:
        raise SingularAmplitudeError("t = 0 at k = 0")


def _check_lattice_k(k: float) -> None:
    if not 0 <= k <= math.pi:
        raise PreconditionError(f"lattice wavenumber must lie in (0, pi), got k = {k}")
    if k == 0 or k == math.pi:
        raise SingularAmplitudeError(f"t = 0 at the band edge k = {k}")


def _ratio(center: ScatteringCenter, k: float) -> complex:
    """``r / t`` of the center placed at the origin."""
    if center.kind == CONTINUOUS_DELTA:
        _check_continuous_k(k)
        return -1j * center.strength / k
    if center.kind == LATTICE_SITE:
        _check_lattice_k(k)
        return -1j * center.strength / (2 * center.hopping * math.sin(k))
    raise UnsupportedCenterError(
        "a hard wall has no transfer matrix (t = 0); it enters only through r = -1"
    )


def _from_ratio(alpha: complex, k: float) -> ScatteringAmplitudes:
    if alpha == 1:
        raise SingularAmplitudeError(f"reflection pole at k = {k}")
    t = 1 / (1 - alpha)
    r = alpha * t
    return ScatteringAmplitudes(r, r, t, t, k)


def center_amplitudes(center: ScatteringCenter, k: float) -> ScatteringAmplitudes:
    """Amplitudes of ``center`` as if it sat at the origin."""
    if center.kind == HARD_WALL:
        _check_continuous_k(k)
        return ScatteringAmplitudes(-1 + 0j, -1 + 0j, 0j, 0j, k)
    return _from_ratio(_ratio(center, k), k)


def delta_amplitudes(V: float, k: float) -> ScatteringAmplitudes:
    """Amplitudes of the imaginary delta ``1j*V*delta(x)``: r = V/(k-V), t = k/(k-V)."""
    if not k > 0:
        raise PreconditionError(f"k must be positive, got {k}")
    if k == V:
        raise SingularAmplitudeError(f"k = V = {V} is the pole of r (single-delta singularity)")
    return ScatteringAmplitudes(V / (k - V), V / (k - V), k / (k - V), k / (k - V), k)


def lattice_amplitudes(V: complex, kappa: float, k: float) -> ScatteringAmplitudes:
    """Amplitudes of a single site potential ``V`` on a chain with hopping ``-kappa``."""
    if not kappa > 0:
        raise PreconditionError(f"kappa must be positive, got {kappa}")
    if not 0 < k < math.pi:
        raise PreconditionError(f"k must lie in (0, pi), got {k}")
    s = 2 * kappa * math.sin(k)
    den = s + 1j * V
    if abs(den) <= 1e-15 * max(1.0, s):
        raise SingularAmplitudeError(f"2 kappa sin k + iV = 0 at k = {k}")
    r = -1j * V / den
    t = s / den
    return ScatteringAmplitudes(r, r, t, t, k)


def matrix_from_amplitudes(amps: ScatteringAmplitudes, position: float) -> TransferMatrix:
    """General two-port transfer matrix of a center at ``position``.

    ``amps`` are the amplitudes of the center at the origin.
    """
    if amps.t_right == 0:
        raise SingularAmplitudeError("t_R = 0: no transfer matrix")
    k = amps.k
    phase = cmath.exp(2j * k * position)
    return TransferMatrix(
        amps.t_left - amps.r_right * amps.r_left / amps.t_right,
        amps.r_right / amps.t_right / phase,
        -phase * amps.r_left / amps.t_right,
        1 / amps.t_right,
        k,
    )


def transfer_matrix(center: ScatteringCenter, k: float) -> TransferMatrix:
    alpha = _ratio(center, k)
    phase = cmath.exp(2j * k * center.position)
    return TransferMatrix(1 + alpha, alpha / phase, -alpha * phase, 1 - alpha, k)


def compose(outer: TransferMatrix, inner: TransferMatrix) -> TransferMatrix:
    """``outer @ inner``; ``outer`` is the center further to the right."""
    if abs(outer.k - inner.k) > K_MATCH_TOL * max(1.0, abs(outer.k)):
        raise IncompatibleWavenumberError(
            f"cannot compose matrices at k = {outer.k} and k = {inner.k}"
        )
    return TransferMatrix(
        outer.m11 * inner.m11 + outer.m12 * inner.m21,
        outer.m11 * inner.m12 + outer.m12 * inner.m22,
        outer.m21 * inner.m11 + outer.m22 * inner.m21,
        outer.m21 * inner.m12 + outer.m22 * inner.m22,
        inner.k,
    )


def prepare_centers(centers: Iterable[ScatteringCenter]) -> list[ScatteringCenter]:
    """Validate ordering and merge coincident centers.

    Coincident deltas (or sites) are replaced by one center carrying the summed
    strength.  Positions must otherwise be strictly increasing, a hard wall may
    only appear first, and continuous and lattice centers cannot be mixed.
    """
    out: list[ScatteringCenter] = []
    for c in centers:
        if out and out[-1].kind == HARD_WALL and c.kind == HARD_WALL:
            raise UnsupportedCenterError("at most one hard wall is supported")
        if c.kind == HARD_WALL and out:
            raise UnsupportedCenterError("a hard wall must be the leftmost center")
        if out:
            prev = out[-1]
            if c.kind != HARD_WALL and prev.kind != HARD_WALL and c.is_lattice != prev.is_lattice:
                raise UnsupportedCenterError("cannot mix continuous deltas and lattice sites")
            if c.is_lattice and prev.is_lattice and c.hopping != prev.hopping:
                raise UnsupportedCenterError("all lattice sites must share the same hopping")
            gap = c.position - prev.position
            if abs(gap) <= MERGE_TOL and prev.kind == c.kind:
                out[-1] = ScatteringCenter(c.kind, prev.position, prev.strength + c.strength, c.hopping)
                continue
            if gap <= MERGE_TOL:
                raise PreconditionError(
                    f"center positions must be strictly increasing ({prev.position} then {c.position})"
                )
        out.append(c)
    return out


def composite_matrix(centers: Sequence[ScatteringCenter], k: float) -> TransferMatrix:
    """Product ``M_n ... M_2 M_1`` over centers ordered left to right."""
    total = TransferMatrix.identity(k)
    for c in prepare_centers(centers):
        total = compose(transfer_matrix(c, k), total)
    return total


def composite_m22(centers: Sequence[ScatteringCenter], k: float) -> complex:
    return composite_matrix(centers, k).m22


def composite_amplitudes(centers: Sequence[ScatteringCenter], k: float) -> ScatteringAmplitudes:
    return composite_matrix(centers, k).amplitudes()


def region_coefficients(
    centers: Sequence[ScatteringCenter], k: float, left: tuple[complex, complex]
) -> list[tuple[complex, complex]]:
    """Plane-wave coefficients in each of the ``n + 1`` regions, left to right."""
    coeffs = [(complex(left[0]), complex(left[1]))]
    for c in prepare_centers(centers):
        coeffs.append(transfer_matrix(c, k).apply(*coeffs[-1]))
    return coeffs


def jost_wronskian(centers: Sequence[ScatteringCenter], k: float) -> complex:
    """Wronskian of the two Jost solutions.

    ``f_plus`` is normalised to ``exp(ikx)`` on the far right and ``f_minus``
    to ``exp(-ikx)`` on the far left; ``W = f_plus f_minus' - f_plus' f_minus``
    is evaluated from their values one unit left of the first center, which
    gives ``W = -2ik m22 / det M`` (free space: ``-2ik``).  On the lattice the
    Casoratian ``f_plus(j) f_minus(j+1) - f_plus(j+1) f_minus(j)`` is used
    instead and equals ``-2i sin(k) m22 / det M``.
    """
    cs = prepare_centers(centers)
    if any(c.kind == HARD_WALL for c in cs):
        raise UnsupportedCenterError("Jost solutions from the left do not exist next to a hard wall")
    m = composite_matrix(cs, k)
    a_plus, b_plus = m.solve(1, 0)
    x = (cs[0].position if cs else 0) - 1

    def value(a, b, x):
        return a * cmath.exp(1j * k * x) + b * cmath.exp(-1j * k * x)

    if cs and cs[0].is_lattice:
        return value(a_plus, b_plus, x) * value(0, 1, x + 1) - value(a_plus, b_plus, x + 1) * value(0, 1, x)

    def slope(a, b, x):
        return 1j * k * (a * cmath.exp(1j * k * x) - b * cmath.exp(-1j * k * x))

    return value(a_plus, b_plus, x) * slope(0, 1, x) - slope(a_plus, b_plus, x) * value(0, 1, x)
