"""Brute-force reference integrators, independent of the event-driven solver.

These exist purely to cross-check the simulator: a fixed-step scan advances
the system in tiny increments, mirrors positions across wall faces, and
bisects the geometric contact predicate for ball pairs.  No closed-form
time-of-impact expressions are used anywhere here.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .physics import BallState, SceneState, Wall, walls_for


@njit(cache=True)
def _substep_kernel(positions, velocities, radius, walls, n_frames, dt):
    n = positions.shape[0]
    out = np.empty((n_frames, n, 4))
    for i in range(n):
        out[0, i, 0] = positions[i, 0]
        out[0, i, 1] = positions[i, 1]
        out[0, i, 2] = velocities[i, 0]
        out[0, i, 3] = velocities[i, 1]
    contact_sq = (2.0 * radius) ** 2
    for frame in range(1, n_frames):
        t = 0.0
        while t < 1.0 - 1e-12:
            h = min(dt, 1.0 - t)
            prev = positions.copy()
            prev_v = velocities.copy()
            positions += velocities * h
            # ball-ball: bracket the contact inside this substep and bisect
            for _pass in range(6):
                hit = False
                for i in range(n):
                    for j in range(i + 1, n):
                        dx = positions[i, 0] - positions[j, 0]
                        dy = positions[i, 1] - positions[j, 1]
                        if dx * dx + dy * dy >= contact_sq:
                            continue
                        lo, hi = 0.0, h
                        for _ in range(60):
                            mid = 0.5 * (lo + hi)
                            mx = (prev[i, 0] + prev_v[i, 0] * mid) - (prev[j, 0] + prev_v[j, 0] * mid)
                            my = (prev[i, 1] + prev_v[i, 1] * mid) - (prev[j, 1] + prev_v[j, 1] * mid)
                            if mx * mx + my * my >= contact_sq:
                                lo = mid
                            else:
                                hi = mid
                        tau = lo
                        for b in (i, j):
                            positions[b, 0] = prev[b, 0] + prev_v[b, 0] * tau
                            positions[b, 1] = prev[b, 1] + prev_v[b, 1] * tau
                        nx = positions[i, 0] - positions[j, 0]
                        ny = positions[i, 1] - positions[j, 1]
                        norm = (nx * nx + ny * ny) ** 0.5
                        nx /= norm
                        ny /= norm
                        rel = (velocities[i, 0] - velocities[j, 0]) * nx + (velocities[i, 1] - velocities[j, 1]) * ny
                        velocities[i, 0] -= rel * nx
                        velocities[i, 1] -= rel * ny
                        velocities[j, 0] += rel * nx
                        velocities[j, 1] += rel * ny
                        for b in (i, j):
                            positions[b, 0] += velocities[b, 0] * (h - tau)
                            positions[b, 1] += velocities[b, 1] * (h - tau)
                        hit = True
                if not hit:
                    break
            # walls: mirror across any crossed face (exact for specular bounce)
            for i in range(n):
                for _bounce in range(8):
                    moved = False
                    for w in range(walls.shape[0]):
                        axis = int(walls[w, 0])
                        pos = walls[w, 1]
                        side = walls[w, 2]
                        if (prev[i, axis] - pos) * side < 0.0:
                            continue  # far side of a split face
                        if (positions[i, axis] - pos) * side < 0.0:
                            positions[i, axis] = 2.0 * pos - positions[i, axis]
                            velocities[i, axis] = -velocities[i, axis]
                            moved = True
                    if not moved:
                        break
            t += h
        for i in range(n):
            out[frame, i, 0] = positions[i, 0]
            out[frame, i, 1] = positions[i, 1]
            out[frame, i, 2] = velocities[i, 0]
            out[frame, i, 3] = velocities[i, 1]
    return out


def substep_rollout(scene: SceneState, n_frames: int, dt: float = 1e-4) -> np.ndarray:
    """Reference trajectory (n_frames, n, 4) by fixed-step integration."""
    walls = np.array([(w.axis, w.pos, w.side) for w in walls_for(scene.context, scene.radius)])
    return _substep_kernel(scene.positions.copy(), scene.velocities.copy(), scene.radius, walls, n_frames, dt)


def scan_wall_contact(ball: BallState, wall: Wall, t_max: float = 200.0, dt: float = 1e-4) -> float | None:
    """First contact time with a wall face by dense scan plus bisection."""
    x0 = float(ball.center[wall.axis])
    v = float(ball.velocity[wall.axis])
    if (x0 - wall.pos) * wall.side < 0:
        return None
    ts = np.arange(0.0, t_max, dt)
    gap = (x0 + v * ts - wall.pos) * wall.side
    hit = np.nonzero(gap <= 0.0)[0]
    if hit.size == 0:
        return None
    k = int(hit[0])
    if k == 0:
        return 0.0
    lo, hi = ts[k - 1], ts[k]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if (x0 + v * mid - wall.pos) * wall.side > 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def scan_pair_contact(a: BallState, b: BallState, radius: float, t_max: float = 200.0, dt: float = 1e-4) -> float | None:
    """First time two discs touch, by dense scan of the gap plus bisection."""
    dc = np.asarray(a.center, dtype=float) - np.asarray(b.center, dtype=float)
    dv = np.asarray(a.velocity, dtype=float) - np.asarray(b.velocity, dtype=float)
    contact_sq = (2.0 * radius) ** 2
    ts = np.arange(0.0, t_max, dt)
    dx = dc[0] + dv[0] * ts
    dy = dc[1] + dv[1] * ts
    gap = dx * dx + dy * dy - contact_sq
    hit = np.nonzero(gap <= 0.0)[0]
    if hit.size == 0:
        return None
    k = int(hit[0])
    if k == 0:
        return 0.0
    lo, hi = ts[k - 1], ts[k]

    def g(t):
        return (dc[0] + dv[0] * t) ** 2 + (dc[1] + dv[1] * t) ** 2 - contact_sq

    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi
