"""Exploration controllers.

``dispersion_step`` keeps an agent walking while some neighbor is closer than
the distance threshold and parks it once the nearest neighbor is far enough.
Because the threshold sits below the communication range by at least one
forward step, a walking agent never leaves the range of its nearest neighbor
in a single tick. ``diffusion_step`` is the unconstrained baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .swarm import AgentState, Motion, NeighborReading, Phase, WalkState


@dataclass(frozen=True)
class DispersionParams:
    threshold: float = 7.0  # cm
    hysteresis: float = 2.0  # cm
    straight_run: int = 5  # ticks of Forward before a tumble may occur
    tumble_prob: float = 0.1  # per tick, once the straight run has elapsed
    max_turn_ticks: int = 4  # a tumble turns for 1..max_turn_ticks ticks
    stop_below: bool = False  # literal reading: walk while far, stop once close
    tether: float | None = 8.5  # cm; walkers stop receding from done neighbors beyond this
    tether_degree: int = 0  # with this many neighbors or fewer, every neighbor is tethered
    avoid_approach: bool = True  # tumble when the nearest neighbor got closer
    approach_margin: float = 0.7  # cm; closing by less than this is treated as range noise

    def validate(self, r_comm: float, step_length: float) -> None:
        if not 0 < self.threshold < r_comm:
            raise ConfigError(f"need 0 < d_thr < r_comm={r_comm}", "d_thr")
        if self.threshold + step_length > r_comm + 1e-12:
            raise ConfigError(
                f"d_thr + step ({self.threshold} + {step_length}) exceeds r_comm={r_comm}", "d_thr"
            )
        if self.hysteresis < 0:
            raise ConfigError("must be non-negative", "hysteresis")
        if self.straight_run < 0:
            raise ConfigError("must be non-negative", "straight_run")
        if not 0 <= self.tumble_prob <= 1:
            raise ConfigError("must lie in [0, 1]", "tumble_prob")
        if self.max_turn_ticks < 1:
            raise ConfigError("must be at least 1", "max_turn_ticks")
        if self.tether is not None and not 0 < self.tether <= r_comm:
            raise ConfigError(f"need 0 < tether <= r_comm={r_comm}", "tether")


def run_and_tumble(walk: WalkState, rng: np.random.Generator, params: DispersionParams) -> Motion:
    """Next command of a run-and-tumble walk; mutates ``walk``.

    Runs are at least ``straight_run`` ticks long, then end with probability
    ``tumble_prob`` per tick (geometric tail). A tumble turns left or right with
    equal probability for a uniform number of ticks in ``1..max_turn_ticks``.
    """
    if walk.turn_ticks_left > 0:
        walk.turn_ticks_left -= 1
        return walk.turn_motion
    if walk.run_ticks >= params.straight_run and rng.random() < params.tumble_prob:
        return _start_tumble(walk, rng, params)
    walk.run_ticks += 1
    return Motion.FORWARD


def _start_tumble(walk: WalkState, rng: np.random.Generator, params: DispersionParams) -> Motion:
    walk.turn_motion = Motion.TURN_LEFT if rng.random() < 0.5 else Motion.TURN_RIGHT
    walk.turn_ticks_left = int(rng.integers(1, params.max_turn_ticks + 1)) - 1
    walk.run_ticks = 0
    return walk.turn_motion


def nearest_distance(readings: list[NeighborReading]) -> float:
    return min((r.distance for r in readings), default=math.inf)


def dispersion_step(
    agent: AgentState,
    readings: list[NeighborReading],
    params: DispersionParams,
    rng: np.random.Generator | None = None,
) -> tuple[Motion, bool]:
    """Decide (motion, done) for an exploring agent.

    An agent with no neighbors in range stops and is not done. A waiting agent
    resumes only when a neighbor comes closer than ``threshold - hysteresis``.
    """
    rng = agent.rng if rng is None else rng
    if not readings:
        return Motion.STOP, False
    d_min = nearest_distance(readings)
    waiting = agent.phase is Phase.WAITING_NEIGHBORS
    if params.stop_below:
        keep_walking = d_min > params.threshold + params.hysteresis if waiting else d_min >= params.threshold
    else:
        keep_walking = d_min < params.threshold - params.hysteresis if waiting else d_min < params.threshold
    receding = _receding_from_done(agent, readings, params.tether, params.tether_degree)
    approaching = (
        params.avoid_approach
        and math.isfinite(agent.last_nearest)
        and d_min < agent.last_nearest - params.approach_margin
    )
    agent.last_distances = {r.neighbor_id: r.distance for r in readings}
    agent.last_nearest = d_min
    if keep_walking:
        if (receding or approaching) and agent.walk.turn_ticks_left == 0:
            return _start_tumble(agent.walk, rng, params), False
        return run_and_tumble(agent.walk, rng, params), False
    return Motion.STOP, True


def _receding_from_done(agent: AgentState, readings, tether: float | None, degree: int = 0) -> bool:
    """True when a tethered neighbor beyond ``tether`` got farther since last tick."""
    if tether is None:
        return False
    last = agent.last_distances
    fringe = len(readings) <= degree
    return any(
        (fringe or r.done) and r.distance >= tether and r.distance > last.get(r.neighbor_id, np.inf)
        for r in readings
    )


def diffusion_step(agent: AgentState, rng: np.random.Generator | None, params: DispersionParams) -> Motion:
    """Unconditional run-and-tumble; neighbors play no role."""
    rng = agent.rng if rng is None else rng
    return run_and_tumble(agent.walk, rng, params)
