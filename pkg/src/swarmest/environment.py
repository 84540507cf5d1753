"""Scalar intensity fields on the unbounded plane.

Three field kinds are supported:

* ``RADIAL_CONE``: ``z = offset + slope * r`` with ``r`` the distance to the center.
* ``VSHAPE_RAMP``: ``z = offset - slope * d`` with ``d`` the perpendicular distance
  to the diagonal line ``y - yc = x - xc``; the ridge of the tent lies on the diagonal.
* ``GRID``: a sampled matrix, interpolated bilinearly (or nearest-cell) and
  edge-extended so that every finite point has a value.

Field evaluation is pure. Noisy sampling draws from a caller-owned generator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, UnsupportedMappingError

SQRT2 = math.sqrt(2.0)


class FieldKind(str, enum.Enum):
    RADIAL_CONE = "radial_cone"
    VSHAPE_RAMP = "vshape_ramp"
    GRID = "grid"


class RegionShape(str, enum.Enum):
    DISK = "disk"
    SQUARE = "square"


@dataclass(frozen=True)
class ScalarField:
    kind: FieldKind = FieldKind.RADIAL_CONE
    center: tuple[float, float] = (0.0, 0.0)
    slope: float = 1.0
    offset: float = 0.0
    # grid-only attributes
    values: np.ndarray | None = field(default=None, compare=False, repr=False)
    cell_cm: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)
    bilinear: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", FieldKind(self.kind))
        if self.kind is FieldKind.GRID:
            if self.values is None:
                raise ConfigError("grid field needs a value matrix", "values")
            vals = np.asarray(self.values, dtype=float)
            if vals.ndim != 2 or min(vals.shape) < 1:
                raise ConfigError("grid values must be a non-empty 2-D matrix", "values")
            if not self.cell_cm > 0:
                raise ConfigError("cell size must be positive", "cell_cm")
            object.__setattr__(self, "values", vals)

    def value(self, x, y):
        """Noiseless field value; accepts scalars or broadcastable arrays."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind is FieldKind.GRID:
            out = self._grid_value(x, y)
        else:
            out = self.offset + self._signed_slope() * contour_coordinate(self, (x, y))
        return float(out) if np.ndim(out) == 0 else out

    def _signed_slope(self) -> float:
        return self.slope if self.kind is FieldKind.RADIAL_CONE else -self.slope

    def _grid_value(self, x, y):
        vals = self.values
        rows, cols = vals.shape
        # fractional index of cell centers: values[r, c] sits at origin + (c, r) * cell
        fc = (x - self.origin[0]) / self.cell_cm
        fr = (y - self.origin[1]) / self.cell_cm
        fc = np.clip(fc, 0.0, cols - 1)
        fr = np.clip(fr, 0.0, rows - 1)
        if not self.bilinear:
            return vals[np.rint(fr).astype(int), np.rint(fc).astype(int)]
        c0 = np.minimum(np.floor(fc).astype(int), max(cols - 2, 0))
        r0 = np.minimum(np.floor(fr).astype(int), max(rows - 2, 0))
        c1 = np.minimum(c0 + 1, cols - 1)
        r1 = np.minimum(r0 + 1, rows - 1)
        tc = fc - c0
        tr = fr - r0
        top = vals[r0, c0] * (1 - tc) + vals[r0, c1] * tc
        bot = vals[r1, c0] * (1 - tc) + vals[r1, c1] * tc
        return top * (1 - tr) + bot * tr

    def coordinate_of_value(self, z: float) -> float:
        """Contour coordinate of the level set ``field == z`` (inverse mapping)."""
        if self.kind is FieldKind.GRID:
            raise UnsupportedMappingError("grid fields have no closed-form contour mapping")
        if self.slope == 0:
            raise DomainError("zero-slope field has no invertible contour mapping")
        return (z - self.offset) / self._signed_slope()


@dataclass(frozen=True)
class ReferenceRegion:
    """Finite region over which the ground-truth mean is taken.

    ``size`` is the radius for a disk and the side length for a square.
    """

    shape: RegionShape = RegionShape.SQUARE
    size: float = 90.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "shape", RegionShape(self.shape))
        if not (math.isfinite(self.size) and self.size > 0):
            raise ConfigError("region size must be positive", "region_size")

    @property
    def extent(self) -> float:
        """Smallest dimension of the region (diameter or side)."""
        return 2 * self.size if self.shape is RegionShape.DISK else self.size

    @property
    def characteristic_radius(self) -> float:
        """Disk radius, or half the side for a square."""
        return self.size if self.shape is RegionShape.DISK else self.size / 2

    def contains(self, points) -> np.ndarray:
        """Boundary-inclusive membership test for an ``(n, 2)`` array."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dx = pts[:, 0] - self.center[0]
        dy = pts[:, 1] - self.center[1]
        if self.shape is RegionShape.DISK:
            return np.hypot(dx, dy) <= self.size
        half = self.size / 2
        return (np.abs(dx) <= half) & (np.abs(dy) <= half)


def _check_point(pos) -> tuple[float, float]:
    x, y = (float(v) for v in pos)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError(f"non-finite position {pos!r}")
    return x, y


def sample_field(field: ScalarField, pos, noise_sd: float, rng: np.random.Generator | None = None) -> float:
    """Field value at ``pos`` plus zero-mean Gaussian noise of std ``noise_sd``."""
    if noise_sd < 0:
        raise DomainError("noise_sd must be non-negative")
    x, y = _check_point(pos)
    z = field.value(x, y)
    if noise_sd > 0:
        if rng is None:
            raise DomainError("noisy sampling needs an RNG stream")
        z += rng.normal(0.0, noise_sd)
    return float(z)


def contour_coordinate(field: ScalarField, pos):
    """Distance to the field center (cone) or to the ridge diagonal (ramp).

    ``pos`` may be a single point or a pair of coordinate arrays ``(xs, ys)``.
    """
    if field.kind is FieldKind.GRID:
        raise UnsupportedMappingError("grid fields have no closed-form contour mapping")
    x = np.asarray(pos[0], dtype=float) - field.center[0]
    y = np.asarray(pos[1], dtype=float) - field.center[1]
    if field.kind is FieldKind.RADIAL_CONE:
        out = np.hypot(x, y)
    else:
        out = np.abs(x - y) / SQRT2
    return float(out) if np.ndim(out) == 0 else out


def signed_diagonal_distance(field: ScalarField, points) -> np.ndarray:
    """Signed distance of points to the ramp diagonal (positive below it)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return ((pts[:, 0] - field.center[0]) - (pts[:, 1] - field.center[1])) / SQRT2


def ground_truth_mean(field: ScalarField, region: ReferenceRegion, resolution: float) -> float:
    """Area-average of the noiseless field over ``region`` by midpoint quadrature."""
    if not resolution > 0:
        raise ConfigError("resolution must be positive", "resolution")
    if resolution >= region.extent:
        raise ConfigError(
            f"resolution {resolution} is not smaller than region dimension {region.extent}",
            "resolution",
        )
    span = region.extent
    n = int(math.ceil(span / resolution))
    # midpoints of an n x n grid exactly tiling the bounding square
    step = span / n
    offs = -span / 2 + step * (np.arange(n) + 0.5)
    xs, ys = np.meshgrid(region.center[0] + offs, region.center[1] + offs)
    xs = xs.ravel()
    ys = ys.ravel()
    if region.shape is RegionShape.DISK:
        inside = np.hypot(xs - region.center[0], ys - region.center[1]) <= region.size
        xs, ys = xs[inside], ys[inside]
    return float(np.mean(field.value(xs, ys)))


def load_grid_field(path, bilinear: bool = True) -> ScalarField:
    """Read a grid field from a plain-text matrix file.

    First line: ``rows cols cell_cm origin_x origin_y``; then ``rows`` lines of
    ``cols`` space-separated intensities. Row ``r``, column ``c`` is located at
    ``(origin_x + c * cell_cm, origin_y + r * cell_cm)``.
    """
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"empty grid file {path}", "grid_file")
    head = lines[0].split()
    if len(head) != 5:
        raise ConfigError("header must be 'rows cols cell_cm origin_x origin_y'", "grid_file")
    rows, cols = int(head[0]), int(head[1])
    cell, ox, oy = (float(v) for v in head[2:])
    body = lines[1:]
    if len(body) != rows:
        raise ConfigError(f"expected {rows} rows, found {len(body)}", "grid_file")
    vals = np.array([[float(v) for v in ln.split()] for ln in body])
    if vals.shape != (rows, cols):
        raise ConfigError(f"expected {rows}x{cols} values", "grid_file")
    return ScalarField(FieldKind.GRID, values=vals, cell_cm=cell, origin=(ox, oy), bilinear=bilinear)


def save_grid_field(field: ScalarField, path) -> None:
    if field.kind is not FieldKind.GRID:
        raise UnsupportedMappingError("only grid fields can be saved as a matrix")
    rows, cols = field.values.shape
    out = [f"{rows} {cols} {field.cell_cm!r} {field.origin[0]!r} {field.origin[1]!r}"]
    out += [" ".join(repr(float(v)) for v in row) for row in field.values]
    Path(path).write_text("\n".join(out) + "\n")
