"""JSON scene configuration.

A scene is one JSON object; unknown keys anywhere are rejected.  Complex
strengths are written either as a number (real) or as ``[re, im]``.

Example::

    {
      "model": {"type": "continuous"},
      "centers": [
        {"kind": "continuous-delta", "position": 0.0, "strength": [0, 0.6]},
        {"kind": "continuous-delta", "position": 3.14159, "strength": [0, 0.4]}
      ],
      "solver": {"k_min": 0.5, "k_max": 1.5}
    }
"""
from __future__ import annotations

import math
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, model_validator

from . import cavity
from .scatter import CONTINUOUS_DELTA, HARD_WALL, LATTICE_SITE, ZERO_TOL, ScatteringCenter, prepare_centers
from .solver import DEFAULT_GRID_POINTS


def _to_complex(v: Any) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError("complex values are written as [re, im]")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool):
        raise ValueError("expected a number or [re, im]")
    if isinstance(v, (int, float, complex)):
        return complex(v)
    raise ValueError("expected a number or [re, im]")


Complex = Annotated[
    complex,
    BeforeValidator(_to_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list),
]


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CenterSpec(Strict):
    kind: Literal["continuous-delta", "hard-wall", "lattice-site"]
    position: float
    strength: Complex = 0j


class ModelSpec(Strict):
    type: Literal["continuous", "lattice"] = "continuous"
    kappa: float = Field(1.0, gt=0)


class SolverSpec(Strict):
    k_min: Optional[float] = Field(None, ge=0)
    k_max: Optional[float] = Field(None, gt=0)
    grid_points: int = Field(DEFAULT_GRID_POINTS, ge=2)
    tolerance: float = Field(ZERO_TOL, gt=0)


class KGrid(Strict):
    k_min: float = Field(gt=0)
    k_max: float = Field(gt=0)
    points: int = Field(ge=2)


class SimSpec(Strict):
    gamma: float = Field(1.0, ge=0)
    n: int = Field(20, ge=0)
    a: Optional[float] = Field(None, gt=0)
    k_c: Optional[float] = Field(None, gt=0)
    length: Optional[float] = Field(None, gt=0)
    dx: Optional[float] = Field(None, gt=0)
    dt: Optional[float] = Field(None, gt=0)
    t_end: Optional[float] = Field(None, gt=0)
    sample_interval: float = Field(0.01, gt=0)
    epsilon: float = Field(cavity.DEFAULT_EPSILON, gt=0)
    window: float = Field(cavity.DEFAULT_WINDOW, gt=0)
    relative: bool = False
    symmetric: bool = False
    k_grid: Optional[KGrid] = None
    convergence: bool = False


class WaveSpec(Strict):
    type: Literal["two-delta", "cavity", "initial", "jost-plus", "jost-minus"]
    k: Optional[float] = Field(None, gt=0)
    x_min: float
    x_max: float
    points: int = Field(ge=2)


class SceneConfig(Strict):
    model: ModelSpec = ModelSpec()
    centers: list[CenterSpec] = []
    solver: SolverSpec = SolverSpec()
    sim: SimSpec = SimSpec()
    wave: Optional[WaveSpec] = None

    @model_validator(mode="after")
    def _check_centers(self):
        lattice = self.model.type == "lattice"
        for i, c in enumerate(self.centers):
            if lattice and c.kind == CONTINUOUS_DELTA:
                raise ValueError(f"centers[{i}]: continuous deltas are not allowed in a lattice model")
            if not lattice and c.kind == LATTICE_SITE:
                raise ValueError(f"centers[{i}]: lattice sites need model.type = 'lattice'")
        prepare_centers(self.scattering_centers())
        return self

    def scattering_centers(self) -> list[ScatteringCenter]:
        out = []
        for c in self.centers:
            if c.kind == HARD_WALL:
                out.append(ScatteringCenter.wall(c.position))
            elif c.kind == LATTICE_SITE:
                out.append(ScatteringCenter.site(int(c.position), c.strength, self.model.kappa))
            else:
                out.append(ScatteringCenter.delta(c.position, c.strength))
        return out

    def resolved_sim(self) -> dict:
        """Simulation parameters with every default filled in.

        k_c defaults to 2 gamma and a to (n + 1/2) pi / k_c.
        """
        s = self.sim
        k_c = s.k_c if s.k_c is not None else 2 * s.gamma
        if not k_c > 0:
            raise ValueError("sim.k_c is required when sim.gamma = 0")
        a = s.a if s.a is not None else (s.n + 0.5) * math.pi / k_c
        dx = s.dx if s.dx is not None else a / cavity.DEFAULT_CELLS_PER_CAVITY
        length = s.length if s.length is not None else cavity.DEFAULT_LENGTH_FACTOR * a
        dt = s.dt if s.dt is not None else cavity.DEFAULT_DT_FACTOR * dx**2
        grid = s.k_grid or KGrid(k_min=0.5 * k_c, k_max=1.5 * k_c, points=401)
        out = s.model_dump()
        out.update(a=a, k_c=k_c, dx=dx, length=length, dt=dt, k_grid=grid.model_dump())
        return out


def parse_scene(data: Union[dict, list]) -> Union[SceneConfig, list[SceneConfig]]:
    if isinstance(data, list):
        return [SceneConfig.model_validate(d) for d in data]
    return SceneConfig.model_validate(data)
