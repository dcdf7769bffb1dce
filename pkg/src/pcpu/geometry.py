"""Patch layout, cell-hashed point bucketing and constraint point placement."""

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, IngestionError

__all__ = [
    "Domain",
    "PatchGrid",
    "UNIT_SQUARE",
    "build_patches",
    "grid_from_count",
    "assign_to_patches",
    "check_in_domain",
    "sunflower_points",
    "anchored_points",
    "support_radius",
]

GOLDEN_TURN = 4.0 * math.pi / (1.0 + math.sqrt(5.0))
TIE_GAP = 1e-9


@dataclass(frozen=True)
class Domain:
    """Axis-aligned rectangle ``[xmin, xmax] x [ymin, ymax]``."""

    xmin: float = 0.0
    xmax: float = 1.0
    ymin: float = 0.0
    ymax: float = 1.0

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ConfigurationError(f"degenerate domain {self!r}")

    @classmethod
    def coerce(cls, value):
        if value is None:
            return UNIT_SQUARE
        if isinstance(value, Domain):
            return value
        return cls(*map(float, value))

    @property
    def width(self):
        return self.xmax - self.xmin

    @property
    def height(self):
        return self.ymax - self.ymin

    @property
    def side(self):
        return max(self.width, self.height)

    @property
    def midpoint(self):
        return np.array([(self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2])

    def contains(self, points):
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        return (
            (p[:, 0] >= self.xmin) & (p[:, 0] <= self.xmax)
            & (p[:, 1] >= self.ymin) & (p[:, 1] <= self.ymax)
        )


UNIT_SQUARE = Domain()


@dataclass(frozen=True)
class PatchGrid:
    """Circular patches of radius ``delta`` centred on an ``m x m`` grid."""

    domain: Domain
    m: int
    delta: float
    centers: np.ndarray

    @property
    def d(self):
        return len(self.centers)

    def covering(self, point):
        """Indices of patches whose closed disk contains ``point``."""
        r = np.hypot(*(self.centers - np.asarray(point, dtype=float)).T)
        return np.flatnonzero(r <= self.delta)


def grid_from_count(m, domain=None):
    """Patch grid with ``m`` patches per side."""
    domain = Domain.coerce(domain)
    if m < 1:
        raise ConfigurationError(f"need at least one patch per side, got m={m}")
    ticks = (np.arange(m) + 0.5) / m
    cx = domain.xmin + ticks * domain.width
    cy = domain.ymin + ticks * domain.height
    # row-major: patch j = iy * m + ix
    centers = np.column_stack([np.tile(cx, m), np.repeat(cy, m)])
    return PatchGrid(domain=domain, m=m, delta=domain.side / m, centers=centers)


def build_patches(n_points, domain=None, d=None):
    """Patch covering for ``n_points`` data sites.

    Uses ``m = floor(sqrt(N) / 2)`` patches per side, so that ``N/d`` is about
    4, unless ``d`` (a perfect square) is given explicitly.
    """
    if d is not None:
        m = math.isqrt(int(d)) if int(d) > 0 else 0
        if m * m != d or m < 1:
            raise ConfigurationError(f"patch count must be a positive perfect square, got {d}")
    else:
        if n_points < 4:
            raise ConfigurationError(f"need at least 4 data points to build patches, got {n_points}")
        m = math.isqrt(int(n_points)) // 2
        # isqrt floors sqrt(N); floor(floor(sqrt N)/2) == floor(sqrt(N)/2)
    return grid_from_count(m, domain)


def check_in_domain(points, domain):
    """Raise :class:`IngestionError` naming the first row outside ``domain``."""
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    bad = np.flatnonzero(~domain.contains(p))
    if bad.size:
        i = int(bad[0])
        raise IngestionError(f"point {i} at ({p[i, 0]!r}, {p[i, 1]!r}) lies outside the domain", row=i)
    return p


def _cell_index(points, origin, cell):
    return np.floor((points - origin) / cell).astype(np.int64)


def assign_to_patches(points, grid, check=True):
    """Bucket ``points`` into patches.

    Points are hashed into square cells of side ``delta``; each patch probes
    the 3x3 block of cells around its centre and keeps points with
    ``distance <= delta``.

    Returns
    -------
    list of numpy.ndarray
        Sorted point indices for every patch, in patch order.
    """
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    if check:
        check_in_domain(p, grid.domain)
    origin = np.array([grid.domain.xmin, grid.domain.ymin])
    cells = defaultdict(list)
    for i, key in enumerate(map(tuple, _cell_index(p, origin, grid.delta))):
        cells[key].append(i)
    center_cells = _cell_index(grid.centers, origin, grid.delta)
    out = []
    for (cx, cy), center in zip(center_cells, grid.centers):
        cand = [i for dx in (-1, 0, 1) for dy in (-1, 0, 1) for i in cells.get((cx + dx, cy + dy), ())]
        cand = np.array(sorted(cand), dtype=np.int64)
        if cand.size:
            r = np.hypot(p[cand, 0] - center[0], p[cand, 1] - center[1])
            cand = cand[r <= grid.delta]
        out.append(cand)
    return out


def sunflower_points(center, delta, n_add):
    """``n_add`` points on a Vogel spiral filling the disk of radius ``delta``.

    Point ``k`` (1-based) sits at radius ``delta*sqrt(k-1/2)/sqrt(n_add-1/2)``
    and angle ``4*k*pi/(1+sqrt(5))``; the last point lies on the circle.
    """
    if n_add <= 0:
        return np.empty((0, 2))
    k = np.arange(1, n_add + 1, dtype=float)
    u = delta * np.sqrt(k - 0.5) / math.sqrt(n_add - 0.5)
    eta = k * GOLDEN_TURN
    c = np.asarray(center, dtype=float)
    return np.column_stack([c[0] + u * np.cos(eta), c[1] + u * np.sin(eta)])


def anchored_points(center, local_data, scale=1.0):
    """One constraint point next to each data site.

    Each point is moved from its site towards ``center`` by a quarter of the
    distance to the nearest other site (a site sitting on the centre is moved
    along +x instead). The site is then the point's unique nearest neighbour,
    and the points never coincide with data rows.
    """
    data = np.asarray(local_data, dtype=float).reshape(-1, 2)
    if len(data) == 1:
        gap = np.array([float(scale)])
    else:
        r = np.hypot(data[:, None, 0] - data[None, :, 0], data[:, None, 1] - data[None, :, 1])
        np.fill_diagonal(r, np.inf)
        gap = r.min(axis=1)
    towards = np.asarray(center, dtype=float) - data
    norm = np.hypot(towards[:, 0], towards[:, 1])
    unit = np.where(norm[:, None] > 0, towards / np.where(norm > 0, norm, 1.0)[:, None], [1.0, 0.0])
    return data + 0.25 * gap[:, None] * unit


def support_radius(constraint_point, local_data, scale=1.0):
    """Support radius for a constraint basis placed at ``constraint_point``.

    Chosen halfway between the nearest and second-nearest data sites, so the
    nearest one is the only site strictly inside the support.
    """
    data = np.asarray(local_data, dtype=float).reshape(-1, 2)
    if len(data) == 0:
        raise ValueError("local_data must be nonempty")
    r = np.sort(np.hypot(*(data - np.asarray(constraint_point, dtype=float)).T))
    d1 = float(r[0])
    d2 = float(r[1]) if len(r) > 1 else math.inf
    if d1 == 0.0:
        return min(1e-6 * scale, d2 / 2)
    if math.isinf(d2):
        return 2.0 * d1
    if d2 - d1 > TIE_GAP:
        return (d1 + d2) / 2
    return d1 + TIE_GAP
