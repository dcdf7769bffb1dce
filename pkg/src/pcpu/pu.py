"""Partition-of-unity blending of local fits."""

import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import CoverageError, IngestionError, PatchInfeasible
from .geometry import Domain, assign_to_patches, build_patches, check_in_domain
from .kernels import Family, KernelSpec
from .local_solver import (
    CHECK_GRID,
    NONNEG_TOL,
    LocalModel,
    LocalProblem,
    fit_local_positive,
    patch_check_points,
    solve_unconstrained,
)

logger = logging.getLogger(__name__)

__all__ = ["Mode", "PUConfig", "PUModel", "pu_weights", "fit", "evaluate"]


class Mode(str, Enum):
    PU = "pu"
    PCPU = "pcpu"


@dataclass(frozen=True)
class PUConfig:
    kernel: KernelSpec
    mode: Mode = Mode.PCPU
    domain: Domain = None
    d_override: int = None
    check_grid: int = CHECK_GRID
    tol: float = NONNEG_TOL

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "domain", Domain.coerce(self.domain))


@dataclass
class PUModel:
    grid: object
    locals: list
    config: PUConfig
    n_data: list = field(default_factory=list)

    @property
    def n_added(self):
        """Number of constraint bases added on each patch."""
        return np.array([loc.n_added for loc in self.locals], dtype=int)

    def __call__(self, points):
        return evaluate(self, points)


def _bump(r, delta):
    t = np.clip(1.0 - r / delta, 0.0, None)
    return t**4 * (4.0 * r / delta + 1.0)


def pu_weights(point, grid):
    """Shepard-normalized Wendland weights of the patches covering ``point``.

    Returns
    -------
    dict
        Patch index to weight, for patches with a nonzero weight.
    """
    p = np.asarray(point, dtype=float).reshape(2)
    if grid.d == 1 and grid.covering(p).size:
        return {0: 1.0}
    idx = grid.covering(p)
    w = _bump(np.hypot(*(grid.centers[idx] - p).T), grid.delta)
    keep = w > 0
    idx, w = idx[keep], w[keep]
    if idx.size == 0:
        raise CoverageError(f"point {tuple(p)} is not covered by any patch")
    w = w / w.sum()
    return {int(j): float(wj) for j, wj in zip(idx, w)}


def _check_data(points, values, domain):
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float).reshape(-1)
    if points.ndim != 2 or points.shape[1] != 2:
        raise IngestionError(f"points must have shape (n, 2), got {points.shape}")
    if len(points) != len(values):
        raise IngestionError(f"{len(points)} points but {len(values)} values")
    bad = np.flatnonzero(~np.isfinite(values) | ~np.all(np.isfinite(points), axis=1))
    if bad.size:
        raise IngestionError(f"non-finite entry in row {bad[0]}", row=int(bad[0]))
    check_in_domain(points, domain)
    return points, values


def fit(points, values, config, eval_points=None, candidates=None):
    """Fit the PU (or positivity-constrained PU) interpolant.

    Parameters
    ----------
    points : array_like, shape (n, 2)
    values : array_like, shape (n,)
    config : PUConfig
    eval_points : array_like, shape (s, 2), optional
        Points where the constrained fit is later evaluated. The ones that
        fall inside a patch join that patch's nonnegativity check set.
    candidates : iterable of int, optional
        Constraint counts to sweep on every constrained patch (default: all).

    Returns
    -------
    PUModel
    """
    points, values = _check_data(points, values, config.domain)
    if config.mode is Mode.PCPU and np.any(values < 0):
        warnings.warn("negative data values: positivity of the fit is not guaranteed", stacklevel=2)
    grid = build_patches(len(points), config.domain, config.d_override)
    members = assign_to_patches(points, grid, check=False)
    if eval_points is not None:
        eval_points = check_in_domain(eval_points, config.domain)
        eval_members = assign_to_patches(eval_points, grid, check=False)
    locals_ = []
    for j, idx in enumerate(members):
        if idx.size == 0:
            if eval_points is not None and eval_members[j].size:
                logger.warning("patch %d holds evaluation points but no data; using the zero model", j)
            locals_.append(LocalModel.zero(config.kernel))
            continue
        problem = LocalProblem(points[idx], values[idx], config.kernel, grid.centers[j], grid.delta, index=j)
        if config.mode is Mode.PU:
            locals_.append(LocalModel(problem.points, config.kernel, solve_unconstrained(problem)))
            continue
        check = patch_check_points(grid.centers[j], grid.delta, config.domain, config.check_grid)
        if eval_points is not None and eval_members[j].size:
            check = np.vstack([eval_points[eval_members[j]], check])
        try:
            locals_.append(fit_local_positive(problem, check, candidates=candidates, tol=config.tol))
        except PatchInfeasible as exc:
            raise PatchInfeasible(f"fit failed on patch {j}: {exc}", patch=j, status=exc.status) from exc
    return PUModel(grid, locals_, config, [int(m.size) for m in members])


def evaluate(model, points):
    """Blend the local fits at ``points``.

    Contributions are accumulated in ascending patch order, so results do not
    depend on anything but the inputs.
    """
    grid = model.grid
    points = check_in_domain(points, grid.domain)
    if grid.d == 1:
        # single weight, identically one
        return model.locals[0](points)
    members = assign_to_patches(points, grid, check=False)
    num = np.zeros(len(points))
    den = np.zeros(len(points))
    for j, idx in enumerate(members):
        if idx.size == 0:
            continue
        p = points[idx]
        w = _bump(np.hypot(p[:, 0] - grid.centers[j, 0], p[:, 1] - grid.centers[j, 1]), grid.delta)
        num[idx] += w * model.locals[j](p)
        den[idx] += w
    uncovered = np.flatnonzero(den <= 0)
    if uncovered.size:
        i = int(uncovered[0])
        raise CoverageError(f"evaluation point {i} at {tuple(points[i])} is not covered by any patch")
    return num / den


def default_kernel(name, shape=None):
    """Kernel from a short name, with the shape parameters used in the
    benchmark tables as defaults (0.1 for Wendland, 1 for IMQ)."""
    family = Family(name)
    if shape is None:
        shape = 0.1 if family is Family.WENDLAND_C2 else 1.0
    return KernelSpec(family, shape)
