import math

import numpy as np
import pytest

from swarmest.dispersion import DispersionParams, diffusion_step, dispersion_step, run_and_tumble
from swarmest.errors import ConfigError
from swarmest.swarm import AgentState, Motion, MotionParams, NeighborReading, Phase, WalkState, step_kinematics

# bare threshold walk, no tether or approach avoidance
PLAIN = DispersionParams(threshold=8.0, hysteresis=1.0, tether=None, avoid_approach=False)


def agent(seed=0, phase=Phase.DISPERSING):
    a = AgentState(0, np.zeros(2), 0.0, rng=np.random.default_rng(seed))
    a.phase = phase
    return a


def readings(*ds, done=False):
    return [NeighborReading(i + 1, d, done=done) for i, d in enumerate(ds)]


def test_close_neighbor_keeps_walking():
    motion, done = dispersion_step(agent(), readings(3.0), PLAIN)
    assert motion is not Motion.STOP and not done


def test_far_neighbor_stops():
    assert dispersion_step(agent(), readings(9.0), PLAIN) == (Motion.STOP, True)


def test_isolated_agent_stops_not_done():
    assert dispersion_step(agent(), [], PLAIN) == (Motion.STOP, False)


def test_waiting_agent_hysteresis():
    a = agent(phase=Phase.WAITING_NEIGHBORS)
    assert dispersion_step(a, readings(7.5), PLAIN) == (Motion.STOP, True)
    motion, done = dispersion_step(a, readings(6.5), PLAIN)
    assert motion is not Motion.STOP and not done


def test_literal_comparison_switch():
    lit = DispersionParams(threshold=8.0, hysteresis=1.0, stop_below=True, tether=None, avoid_approach=False)
    assert dispersion_step(agent(), readings(3.0), lit) == (Motion.STOP, True)
    assert dispersion_step(agent(), readings(9.0), lit)[1] is False


def test_validation_bounds():
    DispersionParams(threshold=8.0).validate(10.0, 1.0)
    with pytest.raises(ConfigError, match="d_thr"):
        DispersionParams(threshold=9.5).validate(10.0, 1.0)
    with pytest.raises(ConfigError, match="d_thr"):
        DispersionParams(threshold=10.0).validate(10.0, 0.5)
    with pytest.raises(ConfigError, match="hysteresis"):
        DispersionParams(hysteresis=-1).validate(10.0, 1.0)


def test_run_and_tumble_straight_run_then_symmetric_turns():
    p = DispersionParams(straight_run=5, tumble_prob=1.0, max_turn_ticks=1)
    rng = np.random.default_rng(0)
    w = WalkState()
    seq = [run_and_tumble(w, rng, p) for _ in range(6)]
    assert seq[:5] == [Motion.FORWARD] * 5 and seq[5] in (Motion.TURN_LEFT, Motion.TURN_RIGHT)
    left = 0
    for _ in range(4000):
        w = WalkState(run_ticks=5)
        left += run_and_tumble(w, rng, p) is Motion.TURN_LEFT
    assert abs(left / 4000 - 0.5) < 0.03


def test_diffusion_depends_only_on_rng_state():
    # neighbors never reach the baseline walk, so equal streams give equal commands
    p = DispersionParams()
    a, b = agent(seed=9), agent(seed=9)
    b.last_distances = {1: 2.0}
    b.last_nearest = 2.0
    assert [diffusion_step(a, None, p) for _ in range(200)] == [diffusion_step(b, None, p) for _ in range(200)]


def test_tether_turns_walker_receding_from_done_neighbor():
    p = DispersionParams(threshold=8.0, tether=7.0, avoid_approach=False, straight_run=100)
    a = agent()
    first = dispersion_step(a, readings(7.2, 3.0, done=True), p)[0]
    assert first is Motion.FORWARD
    second = dispersion_step(a, readings(7.6, 3.0, done=True), p)[0]
    assert second in (Motion.TURN_LEFT, Motion.TURN_RIGHT)


def test_approach_margin_filters_small_closings():
    p = DispersionParams(threshold=8.0, tether=None, avoid_approach=True, approach_margin=0.5, straight_run=100)
    a = agent()
    dispersion_step(a, readings(5.0), p)
    assert dispersion_step(a, readings(4.8), p)[0] is Motion.FORWARD
    assert dispersion_step(a, readings(4.0), p)[0] in (Motion.TURN_LEFT, Motion.TURN_RIGHT)


def test_single_tick_margin_noise_free():
    # an agent below threshold cannot push its nearest distance past d_thr + v dt in one tick
    rng = np.random.default_rng(4)
    params = MotionParams(heading_noise=0.0)
    for _ in range(300):
        others = rng.uniform(-8, 8, size=(5, 2))
        a = AgentState(0, rng.uniform(-2, 2, 2), rng.uniform(0, 2 * math.pi), rng=np.random.default_rng(rng.integers(1 << 30)))
        d = np.hypot(*(others - a.position).T)
        if d.min() >= PLAIN.threshold:
            continue
        a.motion, _ = dispersion_step(a, readings(*d), PLAIN)
        step_kinematics(a, params)
        assert np.hypot(*(others - a.position).T).min() <= PLAIN.threshold + params.step_length + 1e-12
