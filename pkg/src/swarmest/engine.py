"""Synchronous tick loop, phase state machine and the phototaxis controller.

Every tick reads one global snapshot (positions, phases, estimates) taken
before any agent acts, so agent order never matters except for which RNG
stream is consumed, and each agent owns its own stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics as M
from .config import ExperimentConfig
from .consensus import degroot_update
from .dispersion import diffusion_step, dispersion_step
from .environment import FieldKind, ground_truth_mean, sample_field
from .network import build_proximity_graph, giant_component_size, mean_degree
from .swarm import AgentState, CbptController, Motion, Phase, sense_neighbors, step_kinematics


@dataclass(frozen=True)
class CbptParams:
    tol: float = 0.0
    patience_limit: int = 5
    stop_band: float = 0.0
    max_burst_ticks: int = 4


def cbpt_step(agent: AgentState, z_hat: float, sample: float, params: CbptParams) -> Motion:
    """Gradient-free descent of ``|sample - z_hat|``; mutates ``agent.cbpt``.

    A Forward probe that improves the objective by more than ``tol`` is
    continued. A failed probe costs one turn tick in the preferred direction,
    then the agent probes again from where it stands. After ``patience_limit``
    failed probes in a row the preference flips and the agent turns for a
    random burst. Inside ``stop_band`` the agent halts.
    """
    ctrl: CbptController = agent.cbpt
    obj = abs(sample - z_hat)
    if ctrl.burst_left > 0:
        ctrl.burst_left -= 1
        return Motion.TURN_LEFT if ctrl.prefer_left else Motion.TURN_RIGHT
    if obj <= params.stop_band:
        ctrl.best = None
        ctrl.patience = 0
        return Motion.STOP
    if ctrl.best is None:  # fresh baseline: probe forward
        ctrl.best = obj
        return Motion.FORWARD
    if obj < ctrl.best - params.tol:
        ctrl.best = obj
        ctrl.patience = 0
        return Motion.FORWARD
    ctrl.best = None
    ctrl.patience += 1
    if ctrl.patience >= params.patience_limit:
        ctrl.prefer_left = not ctrl.prefer_left
        ctrl.patience = 0
        ctrl.burst_left = int(agent.rng.integers(1, params.max_burst_ticks + 1)) - 1
    return Motion.TURN_LEFT if ctrl.prefer_left else Motion.TURN_RIGHT


def running_mean_update(mean: float, count: int, sample: float) -> float:
    """Mean of ``count + 1`` samples given the mean of the first ``count``."""
    return (mean * count + sample) / (count + 1)


@dataclass
class EstimateRecord:
    """Estimate-domain errors plus phase occupancy for one tick."""

    t: float
    E_T: float
    E_P: float
    E_A: float
    phase_counts: tuple[int, int, int, int, int]

    CSV_HEADER = "tick,E_T_est,E_P_est,E_A_est,dispersing,waiting,averaging,cbpt,stopped"

    def csv_row(self) -> str:
        vals = [self.t, self.E_T, self.E_P, self.E_A]
        return ",".join([format(float(v), ".12g") for v in vals] + [str(c) for c in self.phase_counts])


@dataclass
class RunResult:
    mode: str
    seed: int
    records: list[M.MetricsRecord] = field(default_factory=list)
    estimate_records: list[EstimateRecord] = field(default_factory=list)
    trajectory: list[tuple] = field(default_factory=list)
    z_gt: float = math.nan
    coord_gt: float = math.nan
    final_positions: np.ndarray | None = None
    final_estimates: np.ndarray | None = None

    def first_tick_all_past(self, phase: Phase) -> int | None:
        """Index of the first record at which every agent is at ``phase`` or later."""
        for k, rec in enumerate(self.estimate_records):
            if sum(rec.phase_counts[: int(phase)]) == 0:
                return k
        return None

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


TRAJECTORY_HEADER = "tick,agent,x,y,heading,phase,estimate"

MODES = ("full", "disperse", "diffusion", "control")


class World:
    """Simulation state for one seeded run.

    ``mode`` selects the controller set: ``full`` runs the phase machine,
    ``disperse`` and ``diffusion`` run only the exploration walk, ``control``
    runs the no-communication baseline.
    """

    def __init__(self, config: ExperimentConfig, seed: int, mode: str = "full", t_sw: int | None = None):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.cfg = config.validate()
        self.mode = mode
        self.seed = seed
        self.t_sw = config.t_sw if t_sw is None else t_sw
        self.field = config.build_field()
        self.region = config.build_region()
        self.motion = config.motion_params()
        self.disp = config.dispersion_params()
        self.noise_sd = config.sensor_noise_sd()
        self.cbpt_params = CbptParams(
            tol=self.noise_sd if config.cbpt_tol is None else config.cbpt_tol,
            patience_limit=config.patience_limit,
            stop_band=self.noise_sd if config.stop_band is None else config.stop_band,
            max_burst_ticks=config.max_turn_ticks,
        )
        self.z_gt = ground_truth_mean(self.field, self.region, config.gt_resolution)
        self.mapped = self.field.kind is not FieldKind.GRID
        self.coord_gt = self.field.coordinate_of_value(self.z_gt) if self.mapped else math.nan

        streams = np.random.SeedSequence(seed).spawn(config.n + 1)
        init = np.random.default_rng(streams[0])
        radius = config.init_radius * np.sqrt(init.random(config.n))
        theta = init.random(config.n) * 2 * math.pi
        heading = init.random(config.n) * 2 * math.pi
        cx, cy = config.field_center_x, config.field_center_y
        self.agents: list[AgentState] = []
        for i in range(config.n):
            pos = (cx + radius[i] * math.cos(theta[i]), cy + radius[i] * math.sin(theta[i]))
            a = AgentState(i, np.array(pos), heading[i], rng=np.random.default_rng(streams[i + 1]))
            a.estimate = sample_field(self.field, pos, 0.0)
            self.agents.append(a)
        self.frozen_samples: dict[int, float] = {}
        self.tick = 0

    # -- observation ---------------------------------------------------
    def positions(self) -> np.ndarray:
        return np.array([a.position for a in self.agents])

    def estimates(self) -> np.ndarray:
        return np.array([a.estimate for a in self.agents])

    def metrics(self) -> tuple[M.MetricsRecord, EstimateRecord]:
        cfg = self.cfg
        pos = self.positions()
        g = build_proximity_graph(pos, cfg.r_comm)
        if self.mapped:
            e_t, e_p, e_a = M.accuracy_errors(M.positions_to_estimates(pos, self.field), self.coord_gt)
        else:
            e_t, e_p, e_a = M.accuracy_errors(self.field.value(pos[:, 0], pos[:, 1]), self.z_gt)
        t = self.tick * cfg.dt
        rec = M.MetricsRecord(
            t=t,
            A_cover=M.coverage_area(pos, cfg.r_cover, cfg.cell),
            mean_degree=mean_degree(g),
            giant_component=giant_component_size(g),
            E_T=e_t,
            E_P=e_p,
            E_A=e_a,
            robots_in_region=M.robots_in_region(pos, self.region),
        )
        counts = [0] * 5
        for a in self.agents:
            counts[int(a.phase)] += 1
        est = EstimateRecord(t, *M.accuracy_errors(self.estimates(), self.z_gt), tuple(counts))
        return rec, est

    def trajectory_rows(self) -> list[tuple]:
        t = self.tick * self.cfg.dt
        return [
            (t, a.id, float(a.position[0]), float(a.position[1]), a.heading, a.phase.name, a.estimate)
            for a in self.agents
        ]

    # -- dynamics ------------------------------------------------------
    def advance(self) -> tuple[M.MetricsRecord, EstimateRecord]:
        """One synchronous tick followed by the metrics of the new state."""
        cfg = self.cfg
        pos = self.positions()
        phases = [a.phase for a in self.agents]
        sharing = [
            a.estimate if a.phase in (Phase.AVERAGING, Phase.CBPT) else None for a in self.agents
        ]
        done = [a.phase is not Phase.DISPERSING for a in self.agents]
        updates = []
        isolated = self.mode in ("diffusion", "control")
        dist = None if isolated else np.hypot(pos[:, None, 0] - pos[None, :, 0], pos[:, None, 1] - pos[None, :, 1])
        for a in self.agents:
            readings = [] if isolated else sense_neighbors(
                a, pos, cfg.r_comm, cfg.range_noise, sharing, done_flags=done, distances=dist[a.id]
            )
            s = sample_field(self.field, a.position, self.noise_sd, a.rng)
            updates.append(getattr(self, "_decide_" + self.mode)(a, readings, s, phases))
        for a, (motion, phase, estimate) in zip(self.agents, updates):
            a.motion = motion
            a.phase = phase
            a.estimate = estimate
            step_kinematics(a, self.motion)
        self.tick += 1
        return self.metrics()

    def _decide_diffusion(self, a, readings, s, phases):
        return diffusion_step(a, None, self.disp), a.phase, s

    def _decide_disperse(self, a, readings, s, phases):
        motion, done = dispersion_step(a, readings, self.disp)
        return motion, Phase.WAITING_NEIGHBORS if done else Phase.DISPERSING, s

    def _decide_control(self, a, readings, s, phases):
        if a.phase is Phase.CBPT:
            return cbpt_step(a, a.estimate, s, self.cbpt_params), Phase.CBPT, a.estimate
        est = running_mean_update(a.estimate, a.sample_count, s) if a.sample_count else s
        a.sample_count += 1
        phase = Phase.CBPT if a.sample_count >= self.t_sw else Phase.DISPERSING
        return diffusion_step(a, None, self.disp), phase, est

    def _decide_full(self, a, readings, s, phases):
        cfg = self.cfg
        if a.phase in (Phase.DISPERSING, Phase.WAITING_NEIGHBORS):
            motion, done = dispersion_step(a, readings, self.disp)
            settled = all(phases[r.neighbor_id] is not Phase.DISPERSING for r in readings)
            left_behind = any(phases[r.neighbor_id] is Phase.CBPT for r in readings)
            quorum = done and settled
            # waiting on neighbors, neighbors waiting on us, or neighbors already
            # exploiting: each is a deadlock candidate broken by the timeout
            stalled = motion is Motion.STOP or settled or left_behind
            a.stall_ticks = a.stall_ticks + 1 if stalled else 0
            if quorum or a.stall_ticks >= cfg.wait_timeout:
                a.averaging_ticks = 0
                self.frozen_samples[a.id] = s
                return Motion.STOP, Phase.AVERAGING, s
            return motion, Phase.WAITING_NEIGHBORS if done else Phase.DISPERSING, s
        if a.phase is Phase.STOPPED:
            return Motion.STOP, Phase.STOPPED, a.estimate

        if a.phase is Phase.AVERAGING and not cfg.freeze_samples:
            self.frozen_samples[a.id] = s
        if a.phase is Phase.CBPT and cfg.cbpt_fresh_samples:
            meas = s
        else:
            # a moving robot's own samples would drag its estimate along its path
            meas = self.frozen_samples[a.id]
        nb = [r.estimate for r in readings if r.estimate is not None]
        est = degroot_update(a.estimate, meas, nb, cfg.alpha)
        if a.phase is Phase.AVERAGING:
            a.averaging_ticks += 1
            phase = Phase.CBPT if a.averaging_ticks >= cfg.t_comm else Phase.AVERAGING
            return Motion.STOP, phase, est
        return cbpt_step(a, est, s, self.cbpt_params), Phase.CBPT, est


def advance_tick(world: World) -> M.MetricsRecord:
    rec, _ = world.advance()
    return rec


def _run(world: World, ticks: int, trajectory: bool) -> RunResult:
    res = RunResult(world.mode, world.seed, z_gt=world.z_gt, coord_gt=world.coord_gt)
    rec, est = world.metrics()
    res.records.append(rec)
    res.estimate_records.append(est)
    if trajectory:
        res.trajectory.extend(world.trajectory_rows())
    for _ in range(ticks):
        rec, est = world.advance()
        res.records.append(rec)
        res.estimate_records.append(est)
        if trajectory:
            res.trajectory.extend(world.trajectory_rows())
    res.final_positions = world.positions()
    res.final_estimates = world.estimates()
    return res


def run_full_scenario(config: ExperimentConfig, seed: int | None = None) -> RunResult:
    """Dispersion, averaging and phototaxis for ``config.ticks`` ticks."""
    seed = config.seed if seed is None else seed
    return _run(World(config, seed, "full"), config.ticks, config.trajectory)


def run_dispersion(config: ExperimentConfig, seed: int | None = None, algorithm: str | None = None) -> RunResult:
    """Exploration only: ``connected`` threshold walk or ``diffusion`` baseline."""
    seed = config.seed if seed is None else seed
    algorithm = config.algorithm if algorithm is None else algorithm
    mode = {"connected": "disperse", "diffusion": "diffusion"}[algorithm]
    return _run(World(config, seed, mode), config.ticks, config.trajectory)


def run_control_experiment(config: ExperimentConfig, t_sw: int | None = None, seed: int | None = None) -> RunResult:
    """No-communication baseline: diffuse for ``t_sw`` samples, then phototaxis."""
    seed = config.seed if seed is None else seed
    t_sw = config.t_sw if t_sw is None else t_sw
    if t_sw < 1:
        raise ValueError("t_sw must be at least 1")
    return _run(World(config, seed, "control", t_sw=t_sw), config.ticks, config.trajectory)
