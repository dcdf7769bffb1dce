"""Independent reference computations shared by the test modules."""

import itertools
import math

import mpmath
import numpy as np

from pcpu.kernels import KernelSpec, kernel_matrix
from pcpu.local_solver import REGULARIZATION

IMQ = KernelSpec("imq", 1.0)


def brute_force_assignment(points, grid):
    r = np.hypot(points[:, None, 0] - grid.centers[None, :, 0], points[:, None, 1] - grid.centers[None, :, 1])
    return [np.flatnonzero(r[:, j] <= grid.delta) for j in range(grid.d)]


def random_patch(rng, n, kernel=IMQ, delta=0.3):
    center = np.array([0.5, 0.5])
    ang = rng.random(n) * 2 * np.pi
    rad = delta * np.sqrt(rng.random(n))
    pts = center + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return pts, center, delta


def enumerate_qp(B, f, n_base, reg=REGULARIZATION):
    """Exhaustive active-set oracle: for every support set S take the
    weighted minimum-norm solution on S (pseudo-inverse in the variables
    sqrt(w) c); keep the best nonnegative feasible one."""
    m, n = B.shape
    w = np.ones(n)
    w[:n_base] = reg
    best, best_obj = None, math.inf
    for size in range(0, n + 1):
        for S in itertools.combinations(range(n), size):
            S = list(S)
            c = np.zeros(n)
            if S:
                root = np.sqrt(w[S])
                c[S] = (np.linalg.pinv(B[:, S] / root) @ f) / root
            scale = 1 + np.max(np.abs(f))
            if np.max(np.abs(B @ c - f)) > 1e-9 * scale or c.min() < -1e-12 * scale:
                continue
            obj = float(np.sum(w * c**2))
            if obj < best_obj:
                best, best_obj = c, obj
    return best, best_obj


def explicit_loo(pts, f, kernel):
    """Leave-one-out residuals by refitting without each point, in 40-digit
    arithmetic."""
    with mpmath.workdps(40):
        A = mpmath.matrix(kernel_matrix(pts, pts, kernel).tolist())
        out = []
        n = len(pts)
        for i in range(n):
            keep = [k for k in range(n) if k != i]
            sub = mpmath.matrix([[A[a, b] for b in keep] for a in keep])
            c = mpmath.lu_solve(sub, mpmath.matrix([f[k] for k in keep]))
            out.append(float(f[i] - sum(A[i, keep[k]] * c[k] for k in range(n - 1))))
    return np.array(out)
