import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swarmest.errors import ConfigError
from swarmest.swarm import AgentState, MotionParams, Motion, sense_neighbors, step_kinematics

QUIET = MotionParams(speed=1.0, turn_rate=math.pi / 2, dt=1.0, heading_noise=0.0)


def agent(i=0, pos=(0.0, 0.0), heading=0.0, seed=0):
    return AgentState(i, np.array(pos), heading, rng=np.random.default_rng(seed))


def test_stop_leaves_pose():
    a = agent(pos=(1.0, 2.0), heading=0.3)
    a.motion = Motion.STOP
    step_kinematics(a, QUIET)
    assert np.array_equal(a.position, [1.0, 2.0]) and a.heading == 0.3


def test_forward_unit_step():
    a = agent()
    a.motion = Motion.FORWARD
    step_kinematics(a, QUIET)
    assert np.allclose(a.position, [1.0, 0.0])


def test_turns_wrap():
    a = agent(heading=3 * math.pi / 2)
    a.motion = Motion.TURN_LEFT
    step_kinematics(a, QUIET)
    assert a.heading == pytest.approx(0.0, abs=1e-12)
    a.motion = Motion.TURN_RIGHT
    step_kinematics(a, QUIET)
    assert a.heading == pytest.approx(3 * math.pi / 2)


def test_heading_noise_only_on_forward():
    a = agent(seed=5)
    a.motion = Motion.FORWARD
    step_kinematics(a, MotionParams(heading_noise=0.2))
    assert a.heading != 0.0
    b = agent(seed=5)
    b.motion = Motion.STOP
    step_kinematics(b, MotionParams(heading_noise=0.2))
    assert b.heading == 0.0


def test_motion_params_validated():
    with pytest.raises(ConfigError):
        MotionParams(speed=0.0)
    with pytest.raises(ConfigError):
        MotionParams(heading_noise=-1.0)


def test_sensing_examples():
    pos = np.array([[0.0, 0.0], [5.0, 0.0]])
    r = sense_neighbors(agent(), pos, 10.0, 0.0)
    assert [(x.neighbor_id, x.distance) for x in r] == [(1, 5.0)]
    assert sense_neighbors(agent(), np.array([[0.0, 0.0], [10.1, 0.0]]), 10.0, 0.0) == []
    assert len(sense_neighbors(agent(), np.array([[0.0, 0.0], [6.0, 8.0]]), 10.0, 0.0)) == 1


def test_sensing_noise_is_multiplicative_and_positive():
    pos = np.array([[0.0, 0.0], [4.0, 0.0]])
    a = agent(seed=2)
    d = np.array([sense_neighbors(a, pos, 10.0, 0.1)[0].distance for _ in range(5000)])
    assert np.all(d > 0)
    assert abs(d.mean() - 4.0) < 0.03
    assert abs(d.std() - 0.4) < 0.03


def test_sensing_attaches_estimates_and_flags():
    pos = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    r = sense_neighbors(agent(), pos, 10.0, 0.0, estimates=[None, 3.5, None], done_flags=[0, 1, 0])
    assert [(x.estimate, x.done) for x in r] == [(3.5, True), (None, False)]


@given(st.lists(st.tuples(st.floats(-20, 20), st.floats(-20, 20)), min_size=2, max_size=12))
def test_membership_symmetric_without_noise(points):
    pos = np.array(points)
    seen = [{x.neighbor_id for x in sense_neighbors(agent(i, pos[i]), pos, 10.0, 0.0)} for i in range(len(pos))]
    for i, nb in enumerate(seen):
        for j in nb:
            assert i in seen[j]
