"""Arena geometry, coverage grid, experiment configuration and seeded RNG streams.

All lengths are SI meters and times are seconds.  The canonical arena is the
rectangle [-0.9, 0.9] x [-1.1, 1.1] (1.8 m x 2.2 m) with a 1 cm coverage grid.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Arena",
    "GridSpec",
    "ExperimentConfig",
    "Placement",
    "CANONICAL_ARENA",
    "make_rng",
    "cell_index",
    "ring_placement",
    "default_ring_diameter",
]


@dataclass(frozen=True)
class Arena:
    """Rectangular domain with reflective walls."""

    x_min: float = -0.9
    x_max: float = 0.9
    y_min: float = -1.1
    y_max: float = 1.1

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("arena bounds must satisfy x_min < x_max and y_min < y_max")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def area(self) -> float:
        return self.width * self.height

    def contains(self, p) -> bool:
        x, y = p
        return (self.x_min <= x <= self.x_max) and (self.y_min <= y <= self.y_max)


CANONICAL_ARENA = Arena()


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell grid overlaid on an arena for coverage bookkeeping."""

    cell_size: float
    nx: int
    ny: int

    @classmethod
    def for_arena(cls, arena: Arena, cell_size: float = 0.01) -> "GridSpec":
        if cell_size <= 0:
            raise ValueError("cell_size must be positive")
        nx = int(round(arena.width / cell_size))
        ny = int(round(arena.height / cell_size))
        return cls(cell_size=cell_size, nx=nx, ny=ny)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    def cell_centers(self, arena: Arena):
        """Coordinates of cell centers as 1-D arrays (xs of length nx, ys of length ny)."""
        xs = arena.x_min + (np.arange(self.nx) + 0.5) * self.cell_size
        ys = arena.y_min + (np.arange(self.ny) + 0.5) * self.cell_size
        return xs, ys


def cell_index(p, grid: GridSpec, arena: Arena):
    """Map a point inside the arena to its (i, j) cell index.

    Boundary points are clamped into the grid; points outside raise ValueError.
    """
    x, y = p
    if not arena.contains(p):
        raise ValueError(f"point {p!r} out of domain")
    i = int((x - arena.x_min) / grid.cell_size)
    j = int((y - arena.y_min) / grid.cell_size)
    i = min(max(i, 0), grid.nx - 1)
    j = min(max(j, 0), grid.ny - 1)
    return i, j


def cell_index_array(xy: np.ndarray, grid: GridSpec, arena: Arena):
    """Vectorized cell_index for an (n, 2) array of points (assumed inside)."""
    ij = np.empty((len(xy), 2), dtype=np.intp)
    ij[:, 0] = np.clip((xy[:, 0] - arena.x_min) / grid.cell_size, 0, grid.nx - 1)
    ij[:, 1] = np.clip((xy[:, 1] - arena.y_min) / grid.cell_size, 0, grid.ny - 1)
    return ij


# Initial ring diameters used in the robot experiments, by population size.
RING_DIAMETERS = {5: 0.25, 10: 0.30, 15: 0.40, 20: 0.55}


def default_ring_diameter(n_robots: int) -> float:
    return RING_DIAMETERS.get(n_robots, 0.55)


def ring_placement(n_robots: int, diameter: float, center=(0.0, 0.0)):
    """Place robots equally spaced on a ring, headings facing radially outward.

    Robot k sits at angle 2*pi*k/N on the circle of the given diameter and its
    heading equals that angle, so all robots face away from one another.
    """
    if n_robots < 1:
        raise ValueError("need at least one robot")
    if diameter < 0:
        raise ValueError("diameter must be nonnegative")
    r = diameter / 2.0
    cx, cy = center
    out = []
    for k in range(n_robots):
        ang = 2.0 * np.pi * k / n_robots
        pos = (cx + r * np.cos(ang), cy + r * np.sin(ang))
        heading = np.arctan2(pos[1] - cy, pos[0] - cx) if r > 0 else 0.0
        out.append((pos, heading))
    return out


@dataclass(frozen=True)
class Placement:
    """Initial placement: a centered ring, or explicit positions and headings."""

    kind: str = "ring"  # "ring" | "explicit"
    diameter: float | None = None
    positions: tuple = ()  # tuple of ((x, y), heading) for kind="explicit"

    def resolve(self, n_robots: int):
        if self.kind == "ring":
            d = self.diameter if self.diameter is not None else default_ring_diameter(n_robots)
            return ring_placement(n_robots, d)
        if self.kind == "explicit":
            if len(self.positions) != n_robots:
                raise ValueError("explicit placement must list one entry per robot")
            return [((float(x), float(y)), float(h)) for (x, y), h in self.positions]
        raise ValueError(f"unknown placement kind {self.kind!r}")


VALID_MODES = ("webots", "kinetic", "point")


@dataclass(frozen=True)
class ExperimentConfig:
    """Run parameters shared by the agent simulator and the continuum solver."""

    n_robots: int
    alpha: float
    duration: float = 1200.0
    record_interval: float = 1.0
    seed: int = 0
    mode: str = "kinetic"
    replicates: int = 1
    placement: Placement = field(default_factory=Placement)

    def __post_init__(self):
        if not (1.0 < self.alpha < 2.0):
            raise ValueError("alpha must lie in (1, 2)")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.record_interval <= 0:
            raise ValueError("record_interval must be positive")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.n_robots < 1:
            raise ValueError("n_robots must be >= 1")
        if self.mode not in VALID_MODES:
            raise ValueError(f"mode must be one of {VALID_MODES}")

    def to_json(self) -> str:
        if self.placement.kind == "ring":
            placement = {"type": "ring", "diameter_m": self.placement.diameter}
        else:
            placement = {
                "type": "explicit",
                "positions": [[list(p), h] for p, h in self.placement.positions],
            }
        doc = {
            "n_robots": self.n_robots,
            "alpha": self.alpha,
            "duration_s": self.duration,
            "record_interval_s": self.record_interval,
            "seed": self.seed,
            "mode": self.mode,
            "replicates": self.replicates,
            "placement": placement,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        pl = doc.get("placement", {"type": "ring"})
        if pl.get("type", "ring") == "ring":
            placement = Placement(kind="ring", diameter=pl.get("diameter_m"))
        else:
            placement = Placement(
                kind="explicit",
                positions=tuple((tuple(p), float(h)) for p, h in pl["positions"]),
            )
        try:
            return cls(
                n_robots=int(doc["n_robots"]),
                alpha=float(doc["alpha"]),
                duration=float(doc["duration_s"]),
                record_interval=float(doc["record_interval_s"]),
                seed=int(doc["seed"]),
                mode=str(doc["mode"]),
                replicates=int(doc["replicates"]),
                placement=placement,
            )
        except KeyError as exc:
            raise ValueError(f"config missing key {exc.args[0]!r}") from exc


def make_rng(seed: int, replicate_id: int = 0, robot_id: int = 0) -> np.random.Generator:
    """Deterministic, statistically independent stream keyed by (seed, replicate, robot).

    Identical keys give bit-identical sample sequences; distinct keys give
    independent streams (numpy SeedSequence spawn-key mechanism).
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate_id), int(robot_id)))
    return np.random.Generator(np.random.Philox(ss))
