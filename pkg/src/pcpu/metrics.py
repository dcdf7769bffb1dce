"""Test functions, error metrics and node sets for the benchmark harness."""

import random
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .geometry import Domain

__all__ = ["TestFunction", "test_function", "ErrorReport", "error_report", "random_nodes", "eval_grid"]

NEGATIVE_TOL = 1e-10


class TestFunction(str, Enum):
    F1 = "f1"
    F2 = "f2"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            return {"f1": cls.F1, "f2": cls.F2}.get(value.lower())
        return None


def _f1(x, y):
    return (x - 0.5) ** 2 + (y - 0.4) ** 2


def _f2(x, y):
    return (3.0 * (y - 0.4) * np.sin(x - 0.5)) ** 2 * np.cbrt(y + 0.5)


def test_function(fid, x, y):
    """Evaluate benchmark function ``f1`` or ``f2``; broadcasts over arrays."""
    fn = _f1 if TestFunction(fid) is TestFunction.F1 else _f2
    out = fn(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


test_function.__test__ = False  # not a pytest test when imported into test modules


@dataclass(frozen=True)
class ErrorReport:
    mae: float
    rmse: float
    n_eval: int
    min_value: float
    n_negative: int

    def as_dict(self):
        return asdict(self)


def error_report(true_values, approx_values):
    """MAE, RMSE and sign statistics of ``approx_values``."""
    t = np.asarray(true_values, dtype=float).reshape(-1)
    a = np.asarray(approx_values, dtype=float).reshape(-1)
    if t.shape != a.shape:
        raise ValueError(f"length mismatch: {t.size} true values, {a.size} approximations")
    if t.size == 0:
        raise ValueError("need at least one value")
    diff = np.abs(t - a)
    return ErrorReport(
        mae=float(diff.max()),
        rmse=float(np.sqrt(np.mean(diff**2))),
        n_eval=int(t.size),
        min_value=float(a.min()),
        n_negative=int(np.count_nonzero(a < -NEGATIVE_TOL)),
    )


def random_nodes(n, seed):
    """``n`` uniform points in ``[0, 1)^2``.

    Drawn with :class:`random.Random` (Mersenne Twister), whose ``random()``
    stream is guaranteed stable across Python versions and platforms for a
    given integer seed. Coordinates are drawn x then y, point by point.
    """
    rng = random.Random(int(seed))
    return np.array([(rng.random(), rng.random()) for _ in range(int(n))], dtype=float).reshape(-1, 2)


def eval_grid(s_side, domain=None):
    """``s_side x s_side`` grid over the closed domain, row-major (x fastest)."""
    if s_side < 2:
        raise ValueError("need at least 2 points per side")
    domain = Domain.coerce(domain)
    x = np.linspace(domain.xmin, domain.xmax, s_side)
    y = np.linspace(domain.ymin, domain.ymax, s_side)
    gx, gy = np.meshgrid(x, y)
    return np.column_stack([gx.ravel(), gy.ravel()])
