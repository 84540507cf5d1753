"""DeGroot averaging with a memory term, its linear-system form, and the
static-network Monte Carlo study.

Update rule for agent ``i`` with ``n_i`` neighbors::

    z_i <- alpha * z_i + (1 - alpha) / (1 + n_i) * (s_i + sum_j z_j)
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .environment import FieldKind, ScalarField
from .errors import ConfigError, DomainError
from .network import (
    ProximityGraph,
    giant_component_size,
    mean_degree,
    random_geometric_graph,
    second_largest_eigenvalue,
)


@dataclass(frozen=True)
class ConsensusParams:
    alpha: float = 0.5
    t_comm: int = 100
    delta: float = 1e-4

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ConfigError("must lie in [0, 1]", "alpha")
        if self.t_comm < 0:
            raise ConfigError("must be non-negative", "t_comm")
        if not self.delta > 0:
            raise ConfigError("must be positive", "delta")


def degroot_update(z_i: float, s_i: float, neighbor_estimates, alpha: float) -> float:
    nb = list(neighbor_estimates)
    w = (1.0 - alpha) / (1.0 + len(nb))
    return alpha * z_i + w * s_i + w * math.fsum(nb)


def transition_system(graph: ProximityGraph, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """State matrix ``A`` and diagonal input matrix ``B``: ``z' = A z + B s``."""
    if graph.n < 1:
        raise DomainError("graph has no nodes")
    adj = graph.adjacency()
    w = (1.0 - alpha) / (1.0 + adj.sum(axis=1))
    a = adj * w[:, None]
    a[np.diag_indices(graph.n)] = alpha
    return a, np.diag(w)


def steady_state_solve(graph: ProximityGraph, s, alpha: float) -> np.ndarray:
    """Fixed point of the update: solve ``(I - A) z = B s``."""
    if alpha >= 1:
        raise DomainError("alpha = 1 decouples the measurements; no unique fixed point")
    s = np.asarray(s, dtype=float)
    a, b = transition_system(graph, alpha)
    try:
        return np.linalg.solve(np.eye(graph.n) - a, b @ s)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - excluded for alpha < 1
        raise RuntimeError("singular consensus system") from exc


def run_consensus_static(graph: ProximityGraph, s, params: ConsensusParams, initial=None) -> np.ndarray:
    """Synchronous updates on a fixed graph with fixed measurements.

    Returns an array of shape ``(t_comm + 1, n)``; row 0 is the initial vector,
    which defaults to ``s``.
    """
    s = np.asarray(s, dtype=float)
    z = s.copy() if initial is None else np.asarray(initial, dtype=float).copy()
    if s.shape != (graph.n,) or z.shape != (graph.n,):
        raise DomainError("measurement/estimate sizes must match the graph")
    a, b = transition_system(graph, params.alpha)
    drive = b @ s
    out = np.empty((params.t_comm + 1, graph.n))
    out[0] = z
    for t in range(1, params.t_comm + 1):
        z = a @ z + drive
        out[t] = z
    return out


def precision_series(history: np.ndarray) -> np.ndarray:
    """Precision error of every row of an estimate history."""
    return np.mean((history - history.mean(axis=1, keepdims=True)) ** 2, axis=1)


def first_passage_time(series, delta: float) -> int | None:
    """First index with ``series[t] < delta``; ``None`` if never."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    arr = np.asarray(series, dtype=float)
    if arr.size == 0:
        raise DomainError("empty series")
    hits = np.flatnonzero(arr < delta)
    return int(hits[0]) if hits.size else None


def precision_passage_time(precision, delta: float, raw: bool = False) -> int | None:
    """Passage of the precision error into its ``delta`` band.

    By default the band is around the final value, ``|E_P(t) - E_P(end)|``;
    with ``raw`` the precision error itself is thresholded.
    """
    p = np.asarray(precision, dtype=float)
    return first_passage_time(p if raw else np.abs(p - p[-1]), delta)


# --- static-network Monte Carlo -------------------------------------------

STATIC_FIELD = ScalarField(FieldKind.RADIAL_CONE, center=(0.5, 0.5), slope=1.0, offset=0.0)


@dataclass(frozen=True)
class StaticTrial:
    n: int
    mean_degree: float
    steady_precision: float
    initial_precision: float
    passage_time: float  # NaN when the band is never entered
    lambda2: float
    giant_component: int


def static_trial(
    n: int,
    range_ratio: float,
    params: ConsensusParams,
    rng: np.random.Generator,
    field: ScalarField = STATIC_FIELD,
    noise_sd: float = 0.0,
    raw_passage: bool = False,
) -> StaticTrial:
    """One repetition: draw a geometric graph in the unit square, measure, average."""
    pos, g = random_geometric_graph(n, range_ratio, rng)
    s = field.value(pos[:, 0], pos[:, 1])
    if noise_sd > 0:
        s = s + rng.normal(0.0, noise_sd, size=n)
    hist = run_consensus_static(g, s, params)
    prec = precision_series(hist)
    fpt = precision_passage_time(prec, params.delta, raw=raw_passage)
    return StaticTrial(
        n=n,
        mean_degree=mean_degree(g),
        steady_precision=float(prec[-1]),
        initial_precision=float(prec[0]),
        passage_time=math.nan if fpt is None else float(fpt),
        lambda2=second_largest_eigenvalue(g, params.alpha) if n >= 2 else 0.0,
        giant_component=giant_component_size(g),
    )


def _sweep_point(args):
    n, ratio, params, seed_seq, reps, noise_sd, raw = args
    trials = []
    for child in seed_seq.spawn(reps):
        trials.append(static_trial(n, ratio, params, np.random.default_rng(child), noise_sd=noise_sd, raw_passage=raw))
    return trials


def static_sweep(
    n: int,
    ratios,
    reps: int,
    params: ConsensusParams,
    seed: int = 0,
    workers: int = 1,
    noise_sd: float = 0.0,
    raw_passage: bool = False,
) -> list[list[StaticTrial]]:
    """Trials for every range ratio; positions are redrawn every repetition.

    Each sweep point owns a child of one root seed sequence, so results do not
    depend on ``workers``.
    """
    if reps < 1:
        raise ConfigError("must be at least 1", "mc")
    ratios = list(ratios)
    roots = np.random.SeedSequence(seed).spawn(len(ratios))
    jobs = [(n, r, params, ss, reps, noise_sd, raw_passage) for r, ss in zip(ratios, roots)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def summarize_static(ratio: float, trials: list[StaticTrial]) -> dict:
    """Averages over repetitions for one sweep point.

    ``passage_time`` averages the repetitions that entered the band.
    """
    fpts = [t.passage_time for t in trials if not math.isnan(t.passage_time)]
    return {
        "range_ratio": ratio,
        "mean_degree": float(np.mean([t.mean_degree for t in trials])),
        "steady_E_P": float(np.mean([t.steady_precision for t in trials])),
        "passage_time": float(np.mean(fpts)) if fpts else math.nan,
        "lambda2": float(np.mean([t.lambda2 for t in trials])),
        "connected_fraction": float(np.mean([t.giant_component == t.n for t in trials])),
    }


__all__ = [
    "ConsensusParams",
    "StaticTrial",
    "degroot_update",
    "first_passage_time",
    "precision_passage_time",
    "precision_series",
    "run_consensus_static",
    "static_sweep",
    "static_trial",
    "steady_state_solve",
    "summarize_static",
    "transition_system",
]
