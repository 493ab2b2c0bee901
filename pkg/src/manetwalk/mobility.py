"""Node kinematics: uniform deployment, random direction with reflection, random waypoint."""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import SimConfig, WorldGeometry

_TWO_PI = 2.0 * math.pi
_EPOCH_EPS = 1e-9  # absorbs float dust when epoch timers cross zero


@dataclass
class NodeKinematics:
    """Kinematic state of one node; only the fields of the active model are meaningful."""

    position: Tuple[float, float]
    heading: float = 0.0
    speed: float = 0.0
    epoch_remaining: float = 0.0
    waypoint: Optional[Tuple[float, float]] = None
    pause_remaining: float = 0.0


class MobilityState:
    """Kinematics of the whole deployment, stored as arrays for vectorized stepping."""

    def __init__(self, model: str, side: float, positions: np.ndarray,
                 rng: Optional[np.random.Generator] = None):
        n = len(positions)
        self.model = model
        self.side = side
        self.positions = positions
        self.headings = np.zeros(n)
        self.speeds = np.zeros(n)
        self.epoch_remaining = np.zeros(n)
        self.waypoints = np.zeros((n, 2))
        self.has_waypoint = np.zeros(n, dtype=bool)
        self.pause_remaining = np.zeros(n)
        self.rng = rng

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    def node(self, i: int) -> NodeKinematics:
        """Per-node snapshot, mainly for inspection and tests."""
        wp = tuple(self.waypoints[i]) if self.has_waypoint[i] else None
        return NodeKinematics(
            position=(float(self.positions[i, 0]), float(self.positions[i, 1])),
            heading=float(self.headings[i]),
            speed=float(self.speeds[i]),
            epoch_remaining=float(self.epoch_remaining[i]),
            waypoint=wp,
            pause_remaining=float(self.pause_remaining[i]),
        )


def init_deployment(config: SimConfig, geometry: WorldGeometry,
                    rng: np.random.Generator,
                    motion_rng: Optional[np.random.Generator] = None) -> MobilityState:
    """Deploy N nodes i.i.d. uniform on the square and sample their initial motion state.

    `rng` drives the deployment draws; `motion_rng` (default: same generator)
    drives all later kinematic resampling.
    """
    n = config.n_nodes
    side = geometry.side
    positions = rng.uniform(0.0, side, size=(n, 2))
    state = MobilityState(config.mobility_model, side, positions,
                          rng if motion_rng is None else motion_rng)
    if config.mobility_model == "random_direction":
        state.headings = rng.uniform(0.0, _TWO_PI, size=n)
        state.speeds = rng.uniform(config.speed_min, config.speed_max, size=n)
        # Stagger initial epochs so per-node resampling is independent.
        state.epoch_remaining = rng.uniform(0.0, config.direction_epoch, size=n)
    elif config.mobility_model == "random_waypoint":
        state.waypoints = rng.uniform(0.0, side, size=(n, 2))
        state.speeds = rng.uniform(config.speed_min, config.speed_max, size=n)
        state.has_waypoint = np.ones(n, dtype=bool)
    return state


def step_all(state: MobilityState, config: SimConfig) -> None:
    """Advance every node by one tick, in place."""
    if state.model == "static":
        return
    if state.model == "random_direction":
        _step_direction_all(state, config)
    elif state.model == "random_waypoint":
        _step_waypoint_all(state, config)
    else:
        raise ValueError(f"unknown mobility model {state.model!r}")


def _step_direction_all(state: MobilityState, config: SimConfig) -> None:
    dt = config.tick
    pos = state.positions
    step = state.speeds * dt
    pos[:, 0] += step * np.cos(state.headings)
    pos[:, 1] += step * np.sin(state.headings)

    for axis in (0, 1):
        comp = pos[:, axis]
        # Specular reflection; loop covers displacements past both walls.
        while True:
            low = comp < 0.0
            high = comp > state.side
            if not (low.any() or high.any()):
                break
            comp[low] = -comp[low]
            comp[high] = 2.0 * state.side - comp[high]
            bounced = low | high
            if axis == 0:
                state.headings[bounced] = math.pi - state.headings[bounced]
            else:
                state.headings[bounced] = -state.headings[bounced]
    np.mod(state.headings, _TWO_PI, out=state.headings)

    state.epoch_remaining -= dt
    expired = state.epoch_remaining <= _EPOCH_EPS
    k = int(expired.sum())
    if k:
        rng = state.rng
        state.headings[expired] = rng.uniform(0.0, _TWO_PI, size=k)
        state.speeds[expired] = rng.uniform(config.speed_min, config.speed_max, size=k)
        state.epoch_remaining[expired] = config.direction_epoch


def _step_waypoint_all(state: MobilityState, config: SimConfig) -> None:
    dt = config.tick
    paused = state.pause_remaining > 0.0
    if paused.any():
        state.pause_remaining[paused] -= dt

    active = np.nonzero(~paused)[0]
    if active.size == 0:
        return

    need = active[~state.has_waypoint[active]]
    if need.size:
        rng = state.rng
        state.waypoints[need] = rng.uniform(0.0, state.side, size=(need.size, 2))
        state.speeds[need] = rng.uniform(config.speed_min, config.speed_max, size=need.size)
        state.has_waypoint[need] = True

    delta = state.waypoints[active] - state.positions[active]
    dist = np.hypot(delta[:, 0], delta[:, 1])
    step = state.speeds[active] * dt

    arrived = dist <= step
    arr = active[arrived]
    if arr.size:
        state.positions[arr] = state.waypoints[arr]
        state.has_waypoint[arr] = False
        state.pause_remaining[arr] = config.pause_time

    go = active[~arrived]
    if go.size:
        d = dist[~arrived]
        state.positions[go] += delta[~arrived] * (step[~arrived] / d)[:, None]


# --- single-node transition functions ---------------------------------------
#
# These mirror the vectorized kernels one node at a time; tests cross-check
# the two on draw-free trajectories.

def _reflect(coord: float, heading: float, side: float, axis: int) -> Tuple[float, float]:
    while coord < 0.0 or coord > side:
        if coord < 0.0:
            coord = -coord
        else:
            coord = 2.0 * side - coord
        heading = math.pi - heading if axis == 0 else -heading
    return coord, heading


def step_random_direction(node: NodeKinematics, dt: float, side: float,
                          speed_range: Tuple[float, float], direction_epoch: float,
                          rng: np.random.Generator) -> NodeKinematics:
    """One tick of random-direction motion with specular boundary reflection."""
    x, y = node.position
    x += node.speed * dt * math.cos(node.heading)
    y += node.speed * dt * math.sin(node.heading)
    heading = node.heading
    x, heading = _reflect(x, heading, side, axis=0)
    y, heading = _reflect(y, heading, side, axis=1)
    node.position = (x, y)
    node.heading = heading % _TWO_PI

    node.epoch_remaining -= dt
    if node.epoch_remaining <= _EPOCH_EPS:
        node.heading = float(rng.uniform(0.0, _TWO_PI))
        node.speed = float(rng.uniform(*speed_range))
        node.epoch_remaining = direction_epoch
    return node


def step_random_waypoint(node: NodeKinematics, dt: float, side: float,
                         speed_range: Tuple[float, float], pause_time: float,
                         rng: np.random.Generator) -> NodeKinematics:
    """One tick of random-waypoint motion: pause, resume, travel, snap on arrival."""
    if node.pause_remaining > 0.0:
        node.pause_remaining -= dt
        return node
    if node.waypoint is None:
        node.waypoint = (float(rng.uniform(0.0, side)), float(rng.uniform(0.0, side)))
        node.speed = float(rng.uniform(*speed_range))
    dx = node.waypoint[0] - node.position[0]
    dy = node.waypoint[1] - node.position[1]
    dist = math.hypot(dx, dy)
    step = node.speed * dt
    if dist <= step:
        node.position = node.waypoint
        node.waypoint = None
        node.pause_remaining = pause_time
    else:
        node.position = (node.position[0] + dx / dist * step,
                         node.position[1] + dy / dist * step)
    return node
