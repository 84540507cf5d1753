"""Coverage, error decomposition and position-based estimate extraction."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .environment import ReferenceRegion, ScalarField, contour_coordinate
from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class MetricsRecord:
    t: float  # seconds
    A_cover: float
    mean_degree: float
    giant_component: int
    E_T: float
    E_P: float
    E_A: float
    robots_in_region: int

    CSV_HEADER = "tick,A_cover_cm2,mean_degree,giant_component,E_T,E_P,E_A,robots_in_region"

    def csv_row(self) -> str:
        return ",".join(
            [
                _fmt(self.t),
                _fmt(self.A_cover),
                _fmt(self.mean_degree),
                str(self.giant_component),
                _fmt(self.E_T),
                _fmt(self.E_P),
                _fmt(self.E_A),
                str(self.robots_in_region),
            ]
        )

    def as_dict(self) -> dict:
        return asdict(self)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def coverage_area(positions, r_cover: float, cell: float = 0.25) -> float:
    """Area of the union of disks of radius ``r_cover``, by rasterization.

    The grid starts at the bounding-box corner padded by ``r_cover``; a cell
    counts when its center lies inside any disk. Each disk covers one run of
    cells per grid row, so the union is a merge of row intervals and the grid
    itself is never materialized.
    """
    if not r_cover > 0:
        raise ConfigError("must be positive", "r_cover")
    if not 0 < cell <= r_cover / 5 + 1e-12:
        raise ConfigError(f"cell must lie in (0, r_cover/5 = {r_cover / 5}]", "cell")
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(pos) == 0:
        return 0.0
    x0 = pos[:, 0].min() - r_cover
    y0 = pos[:, 1].min() - r_cover
    span = int(math.ceil(r_cover / cell)) + 1
    # candidate rows around each disk, as (disk, offset) pairs
    base = np.floor((pos[:, 1] - y0) / cell).astype(np.int64)
    rows = base[:, None] + np.arange(-span, span + 1)[None, :]
    dy = y0 + (rows + 0.5) * cell - pos[:, 1][:, None]
    w2 = r_cover * r_cover - dy * dy
    ok = (w2 >= 0) & (rows >= 0)
    w = np.sqrt(np.where(ok, w2, 0.0))
    px = (pos[:, 0] - x0)[:, None] / cell - 0.5
    start = np.ceil(px - w / cell)
    stop = np.floor(px + w / cell) + 1  # half-open
    ok &= stop > start
    rows, start, stop = rows[ok], start[ok], stop[ok]
    # shift rows apart so one running maximum serves every row
    shift = rows * (stop.max() - start.min() + 2)
    start, stop = start + shift, stop + shift
    order = np.lexsort((start, rows))
    start, stop = start[order], stop[order]
    reach = np.maximum.accumulate(stop)
    prev = np.concatenate(([-np.inf], reach[:-1]))
    length = np.maximum(stop - np.maximum(start, prev), 0.0)
    return float(length.sum()) * cell * cell


def accuracy_errors(estimates, z_gt: float) -> tuple[float, float, float]:
    """Trueness, precision and accuracy errors ``(E_T, E_P, E_A)``."""
    z = np.asarray(estimates, dtype=float).ravel()
    if z.size == 0:
        raise DomainError("no estimates")
    col = z.mean()
    e_t = float((col - z_gt) ** 2)
    e_p = float(np.mean((z - col) ** 2))
    e_a = float(np.mean((z - z_gt) ** 2))
    return e_t, e_p, e_a


def positions_to_estimates(positions, field: ScalarField) -> np.ndarray:
    """Contour coordinate of each robot, read as its estimate."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    return np.atleast_1d(contour_coordinate(field, (pos[:, 0], pos[:, 1])))


def robots_in_region(positions, region: ReferenceRegion) -> int:
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(pos) == 0:
        return 0
    return int(np.count_nonzero(region.contains(pos)))
