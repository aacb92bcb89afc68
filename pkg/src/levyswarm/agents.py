"""Individual-robot simulator with two movement engines: the tick-based
e-puck style controller (rotate on the spot, then drive straight, stop on
obstacles) and the kinetic velocity-jump process (instantaneous reorientations,
specular walls, elastic robot-robot collisions).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Arena, GridSpec, cell_index_array, make_rng
from .sampling import (
    KineticParams,
    TurnKernel,
    sample_run_time,
    sample_step_vector,
    sample_turn,
    wrap_angle,
)

__all__ = [
    "RobotState",
    "SimWorld",
    "step_webots",
    "step_kinetic",
    "elastic_collision",
    "reflect_wall",
    "record_coverage",
    "export_hitmap_csv",
    "export_hitmap_pgm",
]

ROTATION_SPEED = 0.858  # rad/s, on-the-spot turn rate of the e-puck controller
WEBOTS_SPEED = 0.0644  # m/s, straight-drive speed of the e-puck controller

PHASE_STOPPED = 0
PHASE_ROTATING = 1
PHASE_MOVING = 2


@dataclass
class RobotState:
    """Snapshot of one robot: position, heading and motion phase."""

    id: int
    pos: tuple
    heading: float
    phase: int
    remaining_distance: float
    run_time_left: float


class SimWorld:
    """State of one simulation replicate.

    Robots are updated in id order each tick; every robot owns its RNG stream
    so replicate results are independent of any outer scheduling.
    """

    def __init__(
        self,
        placements,
        params: KineticParams,
        kernel: TurnKernel,
        arena: Arena | None = None,
        grid: GridSpec | None = None,
        dt: float = 0.05,
        mode: str = "kinetic",
        point_robots: bool = False,
        step_scale: float = 0.05,
        seed: int = 0,
        replicate_id: int = 0,
    ):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.arena = arena or Arena()
        self.grid = grid or GridSpec.for_arena(self.arena)
        self.params = params
        self.kernel = kernel
        self.dt = dt
        self.mode = "kinetic" if mode == "point" else mode
        self.point_robots = point_robots or mode == "point"
        self.step_scale = step_scale
        self.clock = 0.0

        n = len(placements)
        self.n = n
        self.pos = np.array([p for p, _ in placements], dtype=float)
        self.heading = np.array([h for _, h in placements], dtype=float)
        self.rngs = [make_rng(seed, replicate_id, i) for i in range(n)]

        self.margin = 0.0 if self.point_robots else params.rho_diam / 2.0
        lo = (self.arena.x_min + self.margin, self.arena.y_min + self.margin)
        hi = (self.arena.x_max - self.margin, self.arena.y_max - self.margin)
        self.bounds_lo = np.array(lo)
        self.bounds_hi = np.array(hi)
        if np.any(self.pos < self.bounds_lo) or np.any(self.pos > self.bounds_hi):
            raise ValueError("initial placement outside the shrunk arena")

        # webots controller state
        self.phase = np.full(n, PHASE_STOPPED, dtype=np.int8)
        self.target_angle = np.zeros(n)
        self.remaining = np.zeros(n)
        # kinetic state: residual run times
        self.run_left = np.array(
            [sample_run_time(params, rng) for rng in self.rngs], dtype=float
        )

        self.hit_map = np.full((self.grid.nx, self.grid.ny), np.nan)
        self.visited = np.zeros((self.grid.nx, self.grid.ny), dtype=bool)
        self.visited_count = 0
        record_coverage(self)

    def robots(self):
        return [
            RobotState(
                id=i,
                pos=tuple(self.pos[i]),
                heading=float(self.heading[i]),
                phase=int(self.phase[i]),
                remaining_distance=float(self.remaining[i]),
                run_time_left=float(self.run_left[i]),
            )
            for i in range(self.n)
        ]

    def coverage(self) -> float:
        return self.visited_count / self.grid.n_cells

    def step(self):
        if self.mode == "webots":
            step_webots(self)
        else:
            step_kinetic(self)

    def run(self, duration: float, record_interval: float):
        """Advance for the given duration, returning (times, coverage) sampled
        every record_interval starting at the current clock."""
        n_records = int(round(duration / record_interval))
        ticks_per_record = max(1, int(round(record_interval / self.dt)))
        times = [self.clock]
        cov = [self.coverage()]
        for _ in range(n_records):
            for _ in range(ticks_per_record):
                self.step()
            times.append(self.clock)
            cov.append(self.coverage())
        return np.array(times), np.array(cov)


def elastic_collision(theta_vec, nu):
    """Reflect a heading vector off the contact normal: theta - 2 (theta . nu) nu."""
    nu = np.asarray(nu, dtype=float)
    if abs(np.hypot(*nu) - 1.0) > 1e-12:
        raise ValueError("collision normal must be a unit vector")
    theta_vec = np.asarray(theta_vec, dtype=float)
    return theta_vec - 2.0 * np.dot(theta_vec, nu) * nu


def reflect_wall(pos, heading, arena: Arena, margin: float = 0.0):
    """Specular reflection of an overshooting position back into the shrunk
    arena; the heading component normal to each violated wall is negated."""
    x, y = float(pos[0]), float(pos[1])
    dx, dy = np.cos(heading), np.sin(heading)
    lo_x, hi_x = arena.x_min + margin, arena.x_max - margin
    lo_y, hi_y = arena.y_min + margin, arena.y_max - margin
    # mirror repeatedly in case of extreme overshoot
    for _ in range(8):
        if x < lo_x:
            x = 2 * lo_x - x
            dx = -dx
        elif x > hi_x:
            x = 2 * hi_x - x
            dx = -dx
        else:
            break
    for _ in range(8):
        if y < lo_y:
            y = 2 * lo_y - y
            dy = -dy
        elif y > hi_y:
            y = 2 * hi_y - y
            dy = -dy
        else:
            break
    return (x, y), float(np.arctan2(dy, dx))


def _reflect_positions(world: SimWorld, idx=None):
    """Vectorized fold of out-of-bounds positions back inside, flipping the
    matching heading components."""
    pos = world.pos
    lo, hi = world.bounds_lo, world.bounds_hi
    dxy = np.stack([np.cos(world.heading), np.sin(world.heading)], axis=1)
    for axis in range(2):
        for _ in range(4):
            under = pos[:, axis] < lo[axis]
            over = pos[:, axis] > hi[axis]
            if not (under.any() or over.any()):
                break
            pos[under, axis] = 2 * lo[axis] - pos[under, axis]
            pos[over, axis] = 2 * hi[axis] - pos[over, axis]
            flip = under | over
            dxy[flip, axis] = -dxy[flip, axis]
    world.heading = np.arctan2(dxy[:, 1], dxy[:, 0])


def record_coverage(world: SimWorld):
    """Mark the cells currently containing robot centers; first visits only."""
    ij = cell_index_array(world.pos, world.grid, world.arena)
    fresh = ~world.visited[ij[:, 0], ij[:, 1]]
    if fresh.any():
        ii, jj = ij[fresh, 0], ij[fresh, 1]
        world.visited[ii, jj] = True
        world.hit_map[ii, jj] = world.clock
        # duplicate indices within one tick are counted once
        world.visited_count = int(world.visited.sum())
    return world.hit_map


def _resolve_collisions(world: SimWorld):
    """Pairwise elastic collisions in robot-index order; overlapping disks are
    separated to contact distance and both headings reflected."""
    rho = world.params.rho_diam
    pos = world.pos
    for i in range(world.n - 1):
        d = pos[i + 1 :] - pos[i]
        dist = np.hypot(d[:, 0], d[:, 1])
        hits = np.nonzero(dist < rho)[0]
        for k in hits:
            j = i + 1 + k
            diff = pos[i] - pos[j]
            r = np.hypot(*diff)
            if r == 0:
                continue
            nu = diff / r
            vi = np.array([np.cos(world.heading[i]), np.sin(world.heading[i])])
            vj = np.array([np.cos(world.heading[j]), np.sin(world.heading[j])])
            vi = elastic_collision(vi, nu)
            vj = elastic_collision(vj, nu)
            world.heading[i] = np.arctan2(vi[1], vi[0])
            world.heading[j] = np.arctan2(vj[1], vj[0])
            push = (rho - r) / 2.0 + 1e-12
            pos[i] += nu * push
            pos[j] -= nu * push
    np.clip(pos, world.bounds_lo, world.bounds_hi, out=pos)


def step_kinetic(world: SimWorld):
    """One tick of the velocity-jump process: straight runs at constant speed,
    instantaneous reorientations when the run time expires, specular walls,
    elastic pair collisions unless running point robots."""
    dt = world.dt
    c = world.params.speed_c
    expiring = world.run_left < dt
    # common path: run continues through the whole tick
    alive = ~expiring
    if alive.any():
        world.pos[alive, 0] += c * dt * np.cos(world.heading[alive])
        world.pos[alive, 1] += c * dt * np.sin(world.heading[alive])
        world.run_left[alive] -= dt
    # robots whose run ends inside the tick: advance piecewise
    for i in np.nonzero(expiring)[0]:
        t_left = dt
        rng = world.rngs[i]
        while t_left > 0:
            move = min(world.run_left[i], t_left)
            world.pos[i, 0] += c * move * np.cos(world.heading[i])
            world.pos[i, 1] += c * move * np.sin(world.heading[i])
            t_left -= move
            world.run_left[i] -= move
            if world.run_left[i] <= 0:
                world.heading[i] = sample_turn(world.kernel, world.heading[i], rng)
                world.run_left[i] = sample_run_time(world.params, rng)
    _reflect_positions(world)
    if not world.point_robots:
        _resolve_collisions(world)
    world.clock += dt
    record_coverage(world)


def _obstacle_ahead(world: SimWorld, i: int) -> bool:
    """Forward obstacle test: a wall or another robot inside the sensing disk
    and in the half-plane the robot is driving into."""
    rng_sense = world.params.sensor_range
    x, y = world.pos[i]
    dx, dy = np.cos(world.heading[i]), np.sin(world.heading[i])
    lo, hi = world.bounds_lo, world.bounds_hi
    if dx < 0 and x - lo[0] < rng_sense:
        return True
    if dx > 0 and hi[0] - x < rng_sense:
        return True
    if dy < 0 and y - lo[1] < rng_sense:
        return True
    if dy > 0 and hi[1] - y < rng_sense:
        return True
    if world.point_robots or world.n == 1:
        return False
    reach = rng_sense + world.params.rho_diam / 2.0
    rel = world.pos - world.pos[i]
    dist = np.hypot(rel[:, 0], rel[:, 1])
    dist[i] = np.inf
    near = dist < reach
    if not near.any():
        return False
    ahead = rel[near, 0] * dx + rel[near, 1] * dy > 0
    return bool(ahead.any())


def step_webots(world: SimWorld):
    """One tick of the e-puck controller: draw a target displacement while
    stopped, rotate on the spot toward it, then drive straight until the
    distance is covered or an obstacle interrupts the run."""
    dt = world.dt
    alpha = world.params.alpha
    for i in range(world.n):
        phase = world.phase[i]
        if phase == PHASE_STOPPED:
            rng = world.rngs[i]
            dx, dy = sample_step_vector(alpha, rng, step_scale=world.step_scale)
            world.remaining[i] = float(np.hypot(dx, dy))
            world.target_angle[i] = float(np.arctan2(dy, dx))
            world.phase[i] = PHASE_ROTATING
        elif phase == PHASE_ROTATING:
            diff = wrap_angle(world.target_angle[i] - world.heading[i])
            step = ROTATION_SPEED * dt
            if abs(diff) <= step:
                world.heading[i] = world.target_angle[i]
                world.phase[i] = PHASE_MOVING
            else:
                world.heading[i] = wrap_angle(world.heading[i] + np.sign(diff) * step)
        else:  # moving
            if _obstacle_ahead(world, i):
                world.phase[i] = PHASE_STOPPED
                world.remaining[i] = 0.0
                continue
            move = min(WEBOTS_SPEED * dt, world.remaining[i])
            world.pos[i, 0] += move * np.cos(world.heading[i])
            world.pos[i, 1] += move * np.sin(world.heading[i])
            world.remaining[i] -= move
            np.clip(world.pos[i], world.bounds_lo, world.bounds_hi, out=world.pos[i])
            if world.remaining[i] <= 0:
                world.phase[i] = PHASE_STOPPED
    world.clock += dt
    record_coverage(world)


def export_hitmap_csv(hit_map: np.ndarray, path):
    """CSV with header i,j,t_first_s; unvisited cells omitted."""
    with open(path, "w") as fh:
        fh.write("i,j,t_first_s\n")
        nx, ny = hit_map.shape
        for i in range(nx):
            row = hit_map[i]
            for j in np.nonzero(~np.isnan(row))[0]:
                fh.write(f"{i},{j},{row[j]:.6f}\n")


def export_hitmap_pgm(hit_map: np.ndarray, path):
    """Dense 8-bit PGM: unvisited cells 0, visit times scaled into 1..255."""
    nx, ny = hit_map.shape
    img = np.zeros((ny, nx), dtype=np.uint8)
    seen = ~np.isnan(hit_map)
    if seen.any():
        tmax = np.nanmax(hit_map)
        scale = 254.0 / tmax if tmax > 0 else 0.0
        img.T[seen] = (1.0 + scale * hit_map[seen]).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode())
        fh.write(img[::-1].tobytes())
