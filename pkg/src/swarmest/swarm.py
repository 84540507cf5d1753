"""Agent state, point-robot kinematics and noisy range sensing."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

TWO_PI = 2 * math.pi


class Phase(enum.IntEnum):
    DISPERSING = 0
    WAITING_NEIGHBORS = 1
    AVERAGING = 2
    CBPT = 3
    STOPPED = 4


class Motion(enum.Enum):
    FORWARD = "forward"
    TURN_LEFT = "turn_left"
    TURN_RIGHT = "turn_right"
    STOP = "stop"


@dataclass(frozen=True)
class MotionParams:
    speed: float = 1.0  # cm/s
    turn_rate: float = math.pi / 4  # rad/s
    dt: float = 1.0  # s
    heading_noise: float = 0.05  # rad per tick

    def __post_init__(self):
        for name in ("speed", "turn_rate", "dt"):
            if not getattr(self, name) > 0:
                raise ConfigError("must be positive", name)
        if self.heading_noise < 0:
            raise ConfigError("must be non-negative", "heading_noise")

    @property
    def step_length(self) -> float:
        return self.speed * self.dt


@dataclass
class WalkState:
    """Run-and-tumble bookkeeping for the random walks."""

    run_ticks: int = 0
    turn_ticks_left: int = 0
    turn_motion: Motion = Motion.TURN_LEFT


@dataclass
class CbptController:
    best: float | None = None
    prefer_left: bool = True
    patience: int = 0
    burst_left: int = 0


@dataclass
class AgentState:
    id: int
    position: np.ndarray
    heading: float
    rng: np.random.Generator = field(repr=False)
    estimate: float = 0.0
    sample_count: int = 0
    phase: Phase = Phase.DISPERSING
    motion: Motion = Motion.STOP
    cbpt: CbptController = field(default_factory=CbptController)
    walk: WalkState = field(default_factory=WalkState)
    averaging_ticks: int = 0
    stall_ticks: int = 0
    done: bool = False
    last_distances: dict = field(default_factory=dict, repr=False)
    last_nearest: float = math.inf

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).copy()
        self.heading = float(self.heading) % TWO_PI


@dataclass(frozen=True)
class NeighborReading:
    neighbor_id: int
    distance: float
    estimate: float | None = None
    done: bool = False


def step_kinematics(agent: AgentState, params: MotionParams) -> AgentState:
    """Apply ``agent.motion`` for one tick, in place; returns the agent."""
    m = agent.motion
    if m is Motion.FORWARD:
        step = params.step_length
        agent.position = agent.position + step * np.array([math.cos(agent.heading), math.sin(agent.heading)])
        if params.heading_noise > 0:
            agent.heading += agent.rng.normal(0.0, params.heading_noise)
    elif m is Motion.TURN_LEFT:
        agent.heading += params.turn_rate * params.dt
    elif m is Motion.TURN_RIGHT:
        agent.heading -= params.turn_rate * params.dt
    agent.heading %= TWO_PI
    return agent


def sense_neighbors(
    agent: AgentState,
    all_positions,
    r_comm: float,
    range_noise: float,
    estimates=None,
    rng: np.random.Generator | None = None,
    done_flags=None,
    distances=None,
) -> list[NeighborReading]:
    """Readings for every other agent within ``r_comm`` (boundary inclusive).

    Estimated distance is ``d * (1 + eps)`` with ``eps ~ N(0, range_noise)``,
    clamped to stay positive. ``estimates`` (optional, one per agent, ``None``
    for agents that are not sharing) and ``done_flags`` (optional booleans) are
    attached to each reading. ``distances`` may carry this agent's precomputed
    row of true distances.
    """
    if not r_comm > 0:
        raise ConfigError("must be positive", "r_comm")
    if range_noise < 0:
        raise ConfigError("must be non-negative", "range_noise")
    rng = agent.rng if rng is None else rng
    if distances is None:
        pos = np.asarray(all_positions, dtype=float)
        distances = np.hypot(pos[:, 0] - agent.position[0], pos[:, 1] - agent.position[1])
    idx = np.flatnonzero(distances <= r_comm)
    idx = idx[idx != agent.id]
    d = distances[idx]
    if range_noise > 0 and len(idx):
        d = d * (1.0 + rng.normal(0.0, range_noise, len(idx)))
    d = np.maximum(d, 1e-9)
    return [
        NeighborReading(
            j,
            dist,
            None if estimates is None else estimates[j],
            False if done_flags is None else bool(done_flags[j]),
        )
        for j, dist in zip(idx.tolist(), d.tolist())
    ]
