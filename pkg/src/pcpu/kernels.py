"""Radial basis functions and collocation matrices."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Family",
    "KernelSpec",
    "eval_rbf",
    "distance_matrix",
    "kernel_matrix",
    "collocation_matrix",
]


class Family(str, Enum):
    WENDLAND_C2 = "wendland"
    IMQ = "imq"

    @classmethod
    def _missing_(cls, value):
        aliases = {"wendlandc2": cls.WENDLAND_C2, "wendland_c2": cls.WENDLAND_C2, "wen": cls.WENDLAND_C2}
        if isinstance(value, str):
            key = value.lower()
            for member in cls:
                if member.value == key:
                    return member
            return aliases.get(key)
        return None


@dataclass(frozen=True)
class KernelSpec:
    """A radial basis function with its shape parameter.

    Parameters
    ----------
    family : Family or str
        ``"wendland"`` for Wendland's C2 function (support radius ``1/shape``)
        or ``"imq"`` for the inverse multiquadric.
    shape : float
        Positive shape parameter.
    """

    family: Family
    shape: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        shape = float(self.shape)
        if not np.isfinite(shape) or shape <= 0:
            raise ValueError(f"shape parameter must be positive and finite, got {self.shape!r}")
        object.__setattr__(self, "shape", shape)

    @property
    def support_radius(self):
        if self.family is Family.WENDLAND_C2:
            return 1.0 / self.shape
        return np.inf

    def __call__(self, r):
        return eval_rbf(self, r)


def _wendland_c2(r, shape):
    t = np.clip(1.0 - shape * r, 0.0, None)
    return t**4 * (4.0 * shape * r + 1.0)


def _imq(r, shape):
    return 1.0 / np.sqrt(1.0 + (shape * r) ** 2)


_FORMULAS = {Family.WENDLAND_C2: _wendland_c2, Family.IMQ: _imq}


def eval_rbf(spec, r):
    """Evaluate ``spec`` at distance(s) ``r``.

    Scalars in give a float out; arrays are evaluated elementwise.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise ValueError("distances must be nonnegative")
    out = _FORMULAS[spec.family](r_arr, spec.shape)
    return float(out) if out.ndim == 0 else out


def distance_matrix(points, centers):
    """Euclidean distances, shape ``(len(points), len(centers))``."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    dx = points[:, None, 0] - centers[None, :, 0]
    dy = points[:, None, 1] - centers[None, :, 1]
    return np.hypot(dx, dy)


def kernel_matrix(points, centers, spec, shapes=None):
    """Matrix of one kernel family centred at ``centers``.

    ``shapes`` optionally gives a per-column shape parameter (used for the
    constraint bases, whose supports differ column by column).
    """
    r = distance_matrix(points, centers)
    shape = spec.shape if shapes is None else np.asarray(shapes, dtype=float)[None, :]
    return _FORMULAS[spec.family](r, shape)


def collocation_matrix(points, basis):
    """Collocation matrix ``B[i, k] = phi_k(points[i])``.

    Parameters
    ----------
    points : array_like, shape (n, 2)
    basis : sequence of (center, KernelSpec)
        One entry per column. Specs may differ between columns, in which case
        the result is not symmetric even for ``points == centers``.

    Returns
    -------
    numpy.ndarray, shape (n, len(basis))
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) == 0 or len(basis) == 0:
        raise ValueError("points and basis must both be nonempty")
    centers = np.array([c for c, _ in basis], dtype=float).reshape(-1, 2)
    r = distance_matrix(points, centers)
    out = np.empty_like(r)
    for k, (_, spec) in enumerate(basis):
        out[:, k] = _FORMULAS[spec.family](r[:, k], spec.shape)
    return out
