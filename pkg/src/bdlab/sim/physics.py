"""Event-driven 2-D billiards in a bordered (optionally split) table.

Balls are equal-mass frictionless discs with perfectly elastic collisions, so
kinetic energy and momentum are conserved exactly up to float rounding.  Each
``step`` advances one frame of time by processing impact events in
chronological order; simultaneous events break ties by lowest ball index with
wall hits before ball-ball hits.

Coordinates are image-like: x grows rightward in [0, width], y grows downward
in [0, height].  A context's playable region is the rectangle inside its four
borders, minus the optional vertical split bar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

REFERENCE_WIDTH = 192
REFERENCE_HEIGHT = 96

MAX_EVENTS_PER_FRAME = 10_000
MAX_PLACE_ATTEMPTS = 100_000


class GenerationError(RuntimeError):
    """Raised when a valid initial scene cannot be sampled."""


class SimulationError(RuntimeError):
    """Raised on event-cascade overflow (a geometry/config pathology)."""


@dataclass(frozen=True)
class EnvContext:
    """Static environment geometry, constant across all frames of a video."""

    image_width: int
    image_height: int
    border_widths: tuple[int, int, int, int]  # top, bottom, left, right
    split: tuple[int, int] | None = None  # (center_x, width)

    @property
    def top(self) -> int:
        return self.border_widths[0]

    @property
    def bottom(self) -> int:
        return self.border_widths[1]

    @property
    def left(self) -> int:
        return self.border_widths[2]

    @property
    def right(self) -> int:
        return self.border_widths[3]


@dataclass(frozen=True)
class Wall:
    """One axis-aligned face, pre-inflated by the ball radius.

    A ball with center coordinate c on ``axis`` is on the wall's valid side
    when (c - pos) * side >= 0 and approaches the face when moving against
    ``side``.  Split faces only apply to balls on their side of the bar.
    """

    axis: int  # 0 = x, 1 = y
    pos: float
    side: float


@dataclass
class BallState:
    center: np.ndarray
    velocity: np.ndarray


@dataclass
class SceneState:
    context: EnvContext
    positions: np.ndarray  # (n_balls, 2) float64
    velocities: np.ndarray  # (n_balls, 2) float64
    radius: float

    def copy(self) -> "SceneState":
        return SceneState(self.context, self.positions.copy(), self.velocities.copy(), self.radius)

    @property
    def n_balls(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class Trajectory:
    context: EnvContext
    frames: np.ndarray  # (n_frames, n_balls, 4): x, y, vx, vy
    seed: int
    radius: float

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_balls(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True)
class SimConfig:
    """Scene sampler bounds; the defaults are the reference 192x96 geometry."""

    image_width: int = REFERENCE_WIDTH
    image_height: int = REFERENCE_HEIGHT
    context_kind: str = "border"  # "border" | "split"
    n_balls: int = 3
    radius: float = 4.0
    border_max: int = 15
    split_width: int = 5
    split_center_range: tuple[int, int] = (64, 128)
    speeds: tuple[float, ...] = (2.0, 3.0, 4.0, 5.0, 6.0)
    max_place_attempts: int = MAX_PLACE_ATTEMPTS

    @classmethod
    def at_scale(cls, context_kind: str, image_width: int, image_height: int, n_balls: int = 3) -> "SimConfig":
        """Proportionally rescale the reference geometry to another resolution."""
        s = image_width / REFERENCE_WIDTH
        if abs(image_height / REFERENCE_HEIGHT - s) > 1e-9:
            raise ValueError(f"aspect ratio must stay 2:1, got {image_width}x{image_height}")
        return cls(
            image_width=image_width,
            image_height=image_height,
            context_kind=context_kind,
            n_balls=n_balls,
            radius=4.0 * s,
            border_max=int(round(15 * s)),
            split_width=max(1, int(round(5 * s))),
            split_center_range=(int(round(64 * s)), int(round(128 * s))),
            speeds=tuple(v * s for v in (2.0, 3.0, 4.0, 5.0, 6.0)),
        )


DIRECTIONS = tuple(i * math.pi / 6.0 for i in range(12))


def walls_for(context: EnvContext, radius: float) -> list[Wall]:
    w, h = context.image_width, context.image_height
    walls = [
        Wall(axis=0, pos=context.left + radius, side=1.0),
        Wall(axis=0, pos=w - context.right - radius, side=-1.0),
        Wall(axis=1, pos=context.top + radius, side=1.0),
        Wall(axis=1, pos=h - context.bottom - radius, side=-1.0),
    ]
    if context.split is not None:
        cx, sw = context.split
        walls.append(Wall(axis=0, pos=cx - sw / 2.0 - radius, side=-1.0))
        walls.append(Wall(axis=0, pos=cx + sw / 2.0 + radius, side=1.0))
    return walls


def sample_context(config: SimConfig, rng: np.random.Generator) -> EnvContext:
    widths = tuple(int(v) for v in rng.integers(0, config.border_max + 1, size=4))
    split = None
    if config.context_kind == "split":
        lo, hi = config.split_center_range
        split = (int(rng.integers(lo, hi + 1)), config.split_width)
    elif config.context_kind != "border":
        raise ValueError(f"unknown context kind: {config.context_kind}")
    return EnvContext(config.image_width, config.image_height, widths, split)


def init_scene(config: SimConfig, seed: int) -> SceneState:
    """Sample a valid scene: rejection-sampled placements, one moving ball.

    Identical (config, seed) yields a bitwise-identical scene.
    """
    rng = np.random.default_rng(seed)
    context = sample_context(config, rng)
    r = config.radius
    x_lo, x_hi = context.left + r, context.image_width - context.right - r
    y_lo, y_hi = context.top + r, context.image_height - context.bottom - r
    if x_hi <= x_lo or y_hi <= y_lo:
        raise GenerationError(f"playable region empty for seed {seed}: context {context}")

    positions = np.empty((config.n_balls, 2))
    attempts = 0
    for i in range(config.n_balls):
        while True:
            attempts += 1
            if attempts > config.max_place_attempts:
                raise GenerationError(
                    f"ball placement failed after {config.max_place_attempts} attempts for seed {seed}"
                )
            x = rng.uniform(x_lo, x_hi)
            y = rng.uniform(y_lo, y_hi)
            if context.split is not None:
                cx, sw = context.split
                if abs(x - cx) < sw / 2.0 + r:
                    continue
            if any(np.hypot(x - positions[j, 0], y - positions[j, 1]) < 2.0 * r for j in range(i)):
                continue
            positions[i] = (x, y)
            break

    velocities = np.zeros((config.n_balls, 2))
    mover = int(rng.integers(0, config.n_balls))
    speed = float(config.speeds[int(rng.integers(0, len(config.speeds)))])
    angle = DIRECTIONS[int(rng.integers(0, len(DIRECTIONS)))]
    velocities[mover] = (speed * math.cos(angle), speed * math.sin(angle))
    return SceneState(context, positions, velocities, r)


def time_of_impact_ball_wall(ball: BallState, wall: Wall) -> float | None:
    """Earliest t >= 0 at which the ball center reaches the inflated face."""
    x = float(ball.center[wall.axis])
    v = float(ball.velocity[wall.axis])
    if (x - wall.pos) * wall.side < 0:
        return None  # on the far side of a split face
    if v * wall.side >= 0:
        return None  # receding or parallel
    t = (wall.pos - x) / v
    return max(t, 0.0)


def time_of_impact_ball_ball(a: BallState, b: BallState, radius: float) -> float | None:
    """Earliest t >= 0 with |Δc + t·Δv| = 2r, absent when receding or missing."""
    dc = a.center - b.center
    dv = a.velocity - b.velocity
    va = float(dv @ dv)
    if va == 0.0:
        return None
    vb = 2.0 * float(dc @ dv)
    if vb >= 0.0:
        return None  # centers not approaching
    vc = float(dc @ dc) - (2.0 * radius) ** 2
    disc = vb * vb - 4.0 * va * vc
    if disc < 0.0:
        return None
    t = (-vb - math.sqrt(disc)) / (2.0 * va)
    # tolerate ulp-level penetration left over from event resolution
    if t < -1e-9:
        return None
    return max(t, 0.0)


def _next_event(scene: SceneState, walls: list[Wall], horizon: float):
    """Earliest event within ``horizon``; ties: lowest ball index, wall first."""
    best = None  # (t, ball_index, kind, payload); kind 0 = wall, 1 = ball
    n = scene.n_balls
    for i in range(n):
        ball = BallState(scene.positions[i], scene.velocities[i])
        for wall in walls:
            t = time_of_impact_ball_wall(ball, wall)
            if t is not None and t <= horizon:
                key = (t, i, 0)
                if best is None or key < best[0]:
                    best = (key, wall)
    for i in range(n):
        for j in range(i + 1, n):
            t = time_of_impact_ball_ball(
                BallState(scene.positions[i], scene.velocities[i]),
                BallState(scene.positions[j], scene.velocities[j]),
                scene.radius,
            )
            if t is not None and t <= horizon:
                key = (t, i, 1)
                if best is None or key < best[0]:
                    best = (key, j)
    return best


def step(scene: SceneState, max_events: int = MAX_EVENTS_PER_FRAME) -> SceneState:
    """Advance one frame, resolving all impact events inside it."""
    out = scene.copy()
    walls = walls_for(out.context, out.radius)
    remaining = 1.0
    events = 0
    while remaining > 0.0:
        found = _next_event(out, walls, remaining)
        if found is None:
            out.positions += out.velocities * remaining
            break
        (t, i, kind), payload = found
        events += 1
        if events > max_events:
            raise SimulationError(f"more than {max_events} impact events in one frame")
        out.positions += out.velocities * t
        remaining -= t
        if kind == 0:
            wall: Wall = payload
            # snap onto the face: rounding must not leave the center beyond it
            out.positions[i, wall.axis] = wall.pos
            out.velocities[i, wall.axis] = -out.velocities[i, wall.axis]
        else:
            j: int = payload
            normal = out.positions[i] - out.positions[j]
            normal /= math.hypot(normal[0], normal[1])
            rel = float((out.velocities[i] - out.velocities[j]) @ normal)
            out.velocities[i] -= rel * normal
            out.velocities[j] += rel * normal
    return out


def rollout(config: SimConfig, seed: int, n_frames: int = 100) -> Trajectory:
    """Initial scene plus n_frames - 1 event-driven steps."""
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    scene = init_scene(config, seed)
    frames = np.empty((n_frames, scene.n_balls, 4))
    frames[0, :, :2] = scene.positions
    frames[0, :, 2:] = scene.velocities
    for f in range(1, n_frames):
        scene = step(scene)
        frames[f, :, :2] = scene.positions
        frames[f, :, 2:] = scene.velocities
    return Trajectory(scene.context, frames, seed, config.radius)


def kinetic_energy(velocities: np.ndarray) -> float:
    """Sum of 1/2 |v|^2 over balls (unit mass)."""
    return 0.5 * float((velocities ** 2).sum())


def scene_at_frame(traj: Trajectory, frame: int) -> SceneState:
    return SceneState(
        traj.context,
        traj.frames[frame, :, :2].copy(),
        traj.frames[frame, :, 2:].copy(),
        traj.radius,
    )
