"""Lattice simulation of the half-infinite gain cavity.

The continuum Hamiltonian -(1/2) d^2/dx^2 + i gamma delta(x - a) on x > 0 with
a hard wall at the origin is discretised on sites x_j = j dx, j = 1..N, with
psi_0 = psi_{N+1} = 0.  The hopping is -kappa and every site carries 2 kappa,
kappa = 1/(2 dx^2), so the free band 2 kappa (1 - cos(k dx)) tends to k^2/2.
The delta becomes the on-site term i gamma / dx at the site nearest to a.

Time stepping uses the Crank-Nicolson (Cayley) form
(1 + i dt H / 2) psi(t + dt) = (1 - i dt H / 2) psi(t), factorised once with
LAPACK's tridiagonal LU.  The right end is a plain truncation; runs must stop
before anything launched from the cavity can reach it (``guard_time``).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np
from scipy.linalg import lapack

from .errors import IntegratorError, PreconditionError, ResolutionError
from .scatter import ScatteringCenter
from .wavefield import cavity_wave, evaluate, initial_cavity_state

DEFAULT_CELLS_PER_CAVITY = 2048
DEFAULT_LENGTH_FACTOR = 8.0
DEFAULT_DT_FACTOR = 0.25
DEFAULT_EPSILON = 1e-3
DEFAULT_WINDOW = 5.0
MAX_K_DX = 0.2


@dataclass(frozen=True)
class LatticeModel:
    n_sites: int
    dx: float
    gain_site: int
    gamma: float
    a: float
    length: float

    @property
    def kappa(self) -> float:
        return 1.0 / (2.0 * self.dx**2)

    @property
    def x(self) -> np.ndarray:
        return np.arange(1, self.n_sites + 1) * self.dx

    @property
    def onsite(self) -> np.ndarray:
        d = np.full(self.n_sites, 2 * self.kappa, dtype=complex)
        d[self.gain_site - 1] += 1j * self.gamma / self.dx
        return d

    @property
    def v_max(self) -> float:
        """Largest group velocity of the lattice band, 2 kappa dx."""
        return 2 * self.kappa * self.dx

    @property
    def guard_time(self) -> float:
        """Latest time before a disturbance from the cavity can reach the right edge."""
        return (self.length - self.a) / self.v_max

    def centers(self) -> list[ScatteringCenter]:
        """The model as lattice scatterers: a wall at site 0 and the gain site."""
        return [ScatteringCenter.wall(0), ScatteringCenter.site(self.gain_site, 1j * self.gamma / self.dx, self.kappa)]

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = self.onsite * psi
        out[:-1] -= self.kappa * psi[1:]
        out[1:] -= self.kappa * psi[:-1]
        return out

    def dense(self) -> np.ndarray:
        """Full Hamiltonian matrix (small lattices only)."""
        return (np.diag(self.onsite) - self.kappa * np.eye(self.n_sites, k=1)
                - self.kappa * np.eye(self.n_sites, k=-1))


def build_lattice(gamma: float, a: float, length: float | None = None, dx: float | None = None,
                  k: float | None = None) -> LatticeModel:
    """Discretise the cavity; ``length`` defaults to 8a and ``dx`` to a/2048.

    ``k`` is the largest wavenumber that must be resolved (default 2 gamma).
    """
    if not a > 0:
        raise PreconditionError(f"a must be positive, got {a}")
    length = DEFAULT_LENGTH_FACTOR * a if length is None else length
    dx = a / DEFAULT_CELLS_PER_CAVITY if dx is None else dx
    if not length > a:
        raise PreconditionError(f"need 0 < a < L, got a = {a}, L = {length}")
    if not dx > 0:
        raise PreconditionError(f"dx must be positive, got {dx}")
    k_res = max(2 * abs(gamma), k or 0.0)
    if k_res * dx >= MAX_K_DX:
        raise ResolutionError(
            f"k dx = {k_res * dx:.3g} >= {MAX_K_DX}: refine dx below {MAX_K_DX / k_res:.3g} "
            f"to resolve k = {k_res:.6g}"
        )
    n_sites = int(round(length / dx)) - 1
    gain_site = int(round(a / dx))
    return LatticeModel(n_sites, dx, gain_site, float(gamma), float(a), float(length))


@dataclass(frozen=True)
class SimulationState:
    amplitudes: np.ndarray
    t: float
    dx: float

    @cached_property
    def norm(self) -> float:
        return float(self.dx * np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class FidelityTrace:
    times: np.ndarray
    values: np.ndarray
    k: float
    window: tuple[float, float] = (0.0, math.inf)

    def __post_init__(self):
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trace times must be strictly increasing")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class KSpectrum:
    k: np.ndarray
    values: np.ndarray
    peak_k: float
    fwhm: float


def initial_state(model: LatticeModel, k_c: float | None = None) -> SimulationState:
    """Cavity standing wave sampled on the sites and renormalised on the lattice."""
    k_c = 2 * model.gamma if k_c is None else k_c
    psi = np.asarray(evaluate(initial_cavity_state(k_c, model.a), model.x), dtype=complex)
    psi /= math.sqrt(model.dx * np.sum(np.abs(psi) ** 2))
    return SimulationState(psi, 0.0, model.dx)


class CrankNicolson:
    """Prefactorised Cayley propagator for one model and time step."""

    def __init__(self, model: LatticeModel, dt: float):
        if not dt > 0:
            raise PreconditionError(f"dt must be positive, got {dt}")
        self.model = model
        self.dt = dt
        half = 0.5j * dt
        off = np.full(model.n_sites - 1, -half * model.kappa, dtype=complex)
        diag = 1 + half * model.onsite
        dl, d, du, du2, ipiv, info = lapack.zgttrf(off.copy(), diag, off.copy())
        if info != 0:
            raise IntegratorError(
                f"tridiagonal factor of (1 + i dt H/2) is singular at row {info} (dt = {dt}, dx = {model.dx})"
            )
        self._lu = (dl, d, du, du2, ipiv)
        self._half = half

    def step(self, psi: np.ndarray) -> np.ndarray:
        rhs = psi - self._half * self.model.apply(psi)
        out, info = lapack.zgttrs(*self._lu, rhs)
        if info != 0:
            raise IntegratorError(f"tridiagonal solve failed (info = {info})")
        return out


def evolve(model: LatticeModel, state: SimulationState, dt: float, steps: int) -> SimulationState:
    prop = CrankNicolson(model, dt)
    psi = state.amplitudes
    for _ in range(steps):
        psi = prop.step(psi)
    return SimulationState(psi, state.t + steps * dt, state.dx)


def sampled_mode(model: LatticeModel, k: float) -> np.ndarray:
    return np.asarray(evaluate(cavity_wave(k, model.gamma, model.a), model.x), dtype=complex)


def fidelity(model: LatticeModel, state: SimulationState, k: float, symmetric: bool = False,
             mode: np.ndarray | None = None) -> complex:
    """``sum conj(Psi) psi_k dx / sum |Psi|^2 dx`` over the whole lattice.

    With ``symmetric`` the numerator is divided by ``sqrt(norm(Psi) norm(psi_k))``
    instead, which bounds |F| by 1.
    """
    psi_k = sampled_mode(model, k) if mode is None else mode
    norm = state.norm
    if norm == 0:
        raise ZeroDivisionError("fidelity of a zero-norm state")
    num = model.dx * np.vdot(state.amplitudes, psi_k)
    if symmetric:
        return complex(num / math.sqrt(norm * model.dx * np.sum(np.abs(psi_k) ** 2)))
    return complex(num / norm)


@dataclass
class SimulationRun:
    trace: FidelityTrace
    norms: np.ndarray
    final: SimulationState
    snapshots: list[SimulationState] = field(default_factory=list)

    def snapshot_at(self, t: float) -> SimulationState:
        """First stored state at or after ``t``."""
        for s in self.snapshots:
            if s.t >= t - 1e-12:
                return s
        return self.final


def simulate(model: LatticeModel, state: SimulationState, dt: float, t_end: float, k: float,
             sample_interval: float = 0.01, snapshot_interval: float | None = None,
             symmetric: bool = False, enforce_guard: bool = True) -> SimulationRun:
    """Evolve to ``t_end`` recording F(k, t) and the norm every ``sample_interval``."""
    if enforce_guard and t_end > model.guard_time * (1 + 1e-12):
        raise PreconditionError(
            f"t_end = {t_end} exceeds the reflection guard {model.guard_time:.6g}; lengthen the lattice"
        )
    prop = CrankNicolson(model, dt)
    mode = sampled_mode(model, k)
    steps = int(round(t_end / dt))
    every = max(1, int(round(sample_interval / dt)))
    snap_every = None if snapshot_interval is None else max(1, int(round(snapshot_interval / dt)))

    psi = state.amplitudes
    times, values, norms, snaps = [], [], [], []

    def record(n):
        s = SimulationState(psi, state.t + n * dt, state.dx)
        times.append(s.t)
        values.append(fidelity(model, s, k, symmetric, mode))
        norms.append(s.norm)
        if snap_every is not None and n % snap_every == 0:
            snaps.append(s)

    record(0)
    for n in range(1, steps + 1):
        psi = prop.step(psi)
        if n % every == 0 or n == steps:
            record(n)
    trace = FidelityTrace(np.array(times), np.array(values), k, (0.0, model.length))
    return SimulationRun(trace, np.array(norms), SimulationState(psi, state.t + steps * dt, state.dx), snaps)


def relaxation_time(trace: FidelityTrace, window: float = DEFAULT_WINDOW, epsilon: float = DEFAULT_EPSILON,
                    relative: bool = False) -> float | None:
    """Earliest t with max - min of |F| over [t, t + window] below ``epsilon``.

    With ``relative`` |F| is first divided by its last value.  Returns None when
    no such t exists inside the trace; a trace shorter than ``window`` cannot be
    judged at all and is rejected.
    """
    t = np.asarray(trace.times)
    if len(t) == 0 or t[-1] - t[0] < window:
        span = 0.0 if len(t) == 0 else t[-1] - t[0]
        raise PreconditionError(f"trace spans {span:.6g} time units, shorter than the plateau window {window}")
    f = trace.magnitude
    if relative:
        f = f / f[-1]
    end = np.searchsorted(t, t + window * (1 - 1e-12), side="right")
    for i in range(len(t)):
        if t[i] + window > t[-1] * (1 + 1e-12) + 1e-12:
            break
        seg = f[i:end[i]]
        if seg.max() - seg.min() < epsilon:
            return float(t[i])
    return None


def _half_crossing(k: np.ndarray, v: np.ndarray, i: int, step: int, half: float) -> float | None:
    j = i
    while 0 <= j + step < len(v):
        if v[j + step] < half:
            k0, k1, v0, v1 = k[j], k[j + step], v[j], v[j + step]
            return float(k0 + (half - v0) * (k1 - k0) / (v1 - v0))
        j += step
    return None


def k_spectrum(model: LatticeModel, state: SimulationState, k_grid: Iterable[float],
               symmetric: bool = False) -> KSpectrum:
    """|F(k, t)| on ``k_grid`` with its peak and full width at half maximum (nan if unresolved)."""
    ks = np.asarray(list(k_grid), dtype=float)
    vals = np.array([abs(fidelity(model, state, k, symmetric)) for k in ks])
    i = int(np.argmax(vals))
    half = vals[i] / 2
    lo, hi = _half_crossing(ks, vals, i, -1, half), _half_crossing(ks, vals, i, 1, half)
    fwhm = math.nan if lo is None or hi is None else hi - lo
    return KSpectrum(ks, vals, float(ks[i]), fwhm)


def write_checkpoint(state: SimulationState, stream: TextIO) -> None:
    """CSV checkpoint: a ``# n_sites=..,dx=..,t=..`` header, then j, re, im per site."""
    stream.write(f"# n_sites={len(state.amplitudes)},dx={state.dx:.17g},t={state.t:.17g}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["j", "re", "im"])
    for j, v in enumerate(state.amplitudes, start=1):
        writer.writerow([j, f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_checkpoint(stream: TextIO) -> SimulationState:
    header = stream.readline().lstrip("#").strip()
    meta = dict(item.split("=") for item in header.split(","))
    rows = list(csv.reader(stream))[1:]
    amps = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    if len(amps) != int(meta["n_sites"]):
        raise ValueError("checkpoint length does not match its header")
    return SimulationState(amps, float(meta["t"]), float(meta["dx"]))
