"""Per-patch interpolation with optional nonnegativity constraints.

A patch is first fitted by plain RBF interpolation. When that fit dips below
zero, the expansion is augmented with compactly supported Wendland bases
placed on a sunflower spiral, and the coefficients are found by a small
quadratic program: minimum norm of the added coefficients subject to the
interpolation conditions and ``c >= 0``. The number of added bases is chosen
by a leave-one-out style error estimate computed on the augmented matrix.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg
import scipy.optimize

from .exceptions import NumericalFailure, PatchInfeasible
from .geometry import anchored_points, sunflower_points, support_radius
from .kernels import Family, KernelSpec, kernel_matrix

logger = logging.getLogger(__name__)

__all__ = [
    "LocalProblem",
    "LocalModel",
    "QPStatus",
    "QPResult",
    "solve_unconstrained",
    "check_nonnegativity",
    "patch_check_points",
    "solve_positive_qp",
    "loocv_errors",
    "augmented_system",
    "fit_local_positive",
]

REGULARIZATION = 1e-12
NONNEG_TOL = 1e-10
EQ_TOL = 1e-8
KKT_TOL = 1e-6
CHECK_GRID = 20
EXTENDED_INVERSE_MAX = 256

# constraint bases are always Wendland C2; the shape is set per column
_CONSTRAINT_KERNEL = KernelSpec(Family.WENDLAND_C2, 1.0)


@dataclass
class LocalProblem:
    """Data for one patch."""

    points: np.ndarray
    values: np.ndarray
    kernel: KernelSpec
    center: np.ndarray
    delta: float
    index: int = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        self.center = np.asarray(self.center, dtype=float).reshape(2)
        if len(self.points) != len(self.values):
            raise ValueError("points and values differ in length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    @property
    def n(self):
        return len(self.points)


@dataclass
class LocalModel:
    """A fitted local expansion: base kernels at the data sites plus
    Wendland constraint bases at ``added_points`` with radii ``added_radii``.
    """

    centers: np.ndarray
    kernel: KernelSpec
    coeffs: np.ndarray
    added_points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    added_radii: np.ndarray = field(default_factory=lambda: np.empty(0))
    loocv: float = None

    @property
    def n_base(self):
        return len(self.centers)

    @property
    def n_added(self):
        return len(self.added_points)

    @classmethod
    def zero(cls, kernel):
        return cls(np.empty((0, 2)), kernel, np.empty(0))

    def design_matrix(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        blocks = [kernel_matrix(points, self.centers, self.kernel)]
        if self.n_added:
            blocks.append(
                kernel_matrix(points, self.added_points, _CONSTRAINT_KERNEL, shapes=1.0 / self.added_radii)
            )
        return np.hstack(blocks)

    def __call__(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        if self.n_base + self.n_added == 0:
            return np.zeros(len(points))
        if self.coeffs.dtype == np.longdouble:
            return (self.design_matrix(points).astype(np.longdouble) @ self.coeffs).astype(float)
        return self.design_matrix(points) @ self.coeffs


class QPStatus(str, Enum):
    SOLVED = "solved"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class QPResult:
    coeffs: np.ndarray
    status: QPStatus
    kkt_residual: float = np.inf
    iterations: int = 0

    @property
    def solved(self):
        return self.status is QPStatus.SOLVED


def _lu_solve_extended(A, b, refine=2):
    """Solve ``A x = b`` by partial-pivoting LU carried out in extended
    precision, followed by iterative refinement.

    The flat kernels give local matrices with condition numbers far beyond
    ``1/eps`` in double precision; extended precision keeps the residual of
    the (exactly represented) double matrix small.
    """
    n = len(A)
    LU = np.array(A, dtype=np.longdouble)
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(LU[k:, k])))
        if LU[p, k] == 0:
            raise np.linalg.LinAlgError("singular matrix")
        if p != k:
            LU[[k, p]] = LU[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        LU[k + 1:, k] /= LU[k, k]
        LU[k + 1:, k + 1:] -= np.outer(LU[k + 1:, k], LU[k, k + 1:])

    def solve(rhs):
        y = rhs[perm].astype(np.longdouble)
        for i in range(1, n):
            y[i] -= LU[i, :i] @ y[:i]
        for i in range(n - 1, -1, -1):
            y[i] = (y[i] - LU[i, i + 1:] @ y[i + 1:]) / LU[i, i]
        return y

    A_ext = np.asarray(A, dtype=np.longdouble)
    b_ext = np.asarray(b, dtype=np.longdouble)
    x = solve(b_ext)
    for _ in range(refine):
        x += solve(b_ext - A_ext @ x)
    return x


def solve_unconstrained(problem):
    """Coefficients of the plain interpolant on one patch.

    Returned in extended precision (``numpy.longdouble``); the coefficients
    of flat kernels are large and alternate in sign, so they are also
    evaluated in extended precision.

    Raises
    ------
    NumericalFailure
        If the interpolation matrix cannot be factorized to the required
        residual.
    """
    if problem.n == 0:
        return np.empty(0, dtype=np.longdouble)
    A = kernel_matrix(problem.points, problem.points, problem.kernel)
    f = problem.values
    try:
        c = _lu_solve_extended(A, f)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"interpolation matrix is singular: {exc}", condition=np.inf) from exc
    residual = float(np.max(np.abs(A.astype(np.longdouble) @ c - f)))
    if not np.all(np.isfinite(c)) or residual > EQ_TOL * (1 + np.max(np.abs(f))):
        cond = np.linalg.cond(A)
        raise NumericalFailure(
            f"interpolation residual {residual:.3g} too large (condition ~{cond:.3g})", condition=cond
        )
    return c


def patch_check_points(center, delta, domain=None, n_side=CHECK_GRID):
    """``n_side x n_side`` grid over the patch's bounding square, restricted
    to the closed disk (and to ``domain`` when given)."""
    t = np.linspace(-delta, delta, n_side)
    gx, gy = np.meshgrid(center[0] + t, center[1] + t)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    keep = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1]) <= delta
    if domain is not None:
        keep &= domain.contains(pts)
    return pts[keep]


def check_nonnegativity(model, check_points, tol=NONNEG_TOL):
    """True iff ``model >= -tol`` at every check point."""
    check_points = np.asarray(check_points, dtype=float).reshape(-1, 2)
    if len(check_points) == 0:
        return True
    return bool(np.min(model(check_points)) >= -tol)


def _min_norm(M, rhs):
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return sol


def solve_positive_qp(B, f, n_base, reg=REGULARIZATION, max_iter=None):
    """Minimum-norm nonnegative solution of ``B @ c = f``.

    Minimizes ``sum(c[n_base:]**2) + reg * sum(c[:n_base]**2)`` subject to
    ``B @ c = f`` and ``c >= 0``.

    A feasible start comes from nonnegative least squares on ``B c = f``
    (a nonzero residual there certifies infeasibility). A primal active-set
    iteration on the bound constraints then drives the point to optimality.
    The problem is solved in scaled variables ``z = sqrt(h) * c`` so that
    each subproblem is a minimum-norm least-squares solve.

    Parameters
    ----------
    B : array_like, shape (m, n)
    f : array_like, shape (m,)
    n_base : int
        Number of leading, lightly regularized columns.
    reg : float
        Weight of the leading coefficients in the objective.
    max_iter : int, optional
        Iteration cap, ``200 * n`` by default.

    Returns
    -------
    QPResult
    """
    B = np.asarray(B, dtype=float)
    f = np.asarray(f, dtype=float).reshape(-1)
    m, n = B.shape
    if n_base > n or len(f) != m:
        raise ValueError("inconsistent QP dimensions")
    if max_iter is None:
        max_iter = 200 * n

    scale = np.max(np.abs(f), initial=0.0)
    if scale == 0.0:
        return QPResult(np.zeros(n), QPStatus.SOLVED, 0.0)
    g = f / scale
    weights = np.ones(n)
    weights[:n_base] = reg
    s = 1.0 / np.sqrt(weights)
    M = B * s

    eq_tol = 1e-2 * EQ_TOL
    # phase 1: feasibility, on the unscaled columns (feasibility does not
    # depend on column scaling, and the scaled system is far worse conditioned)
    try:
        c0, _ = scipy.optimize.nnls(B, g, maxiter=50 * n)
    except RuntimeError:
        return QPResult(np.zeros(n), QPStatus.NUMERICAL_FAILURE)
    z = c0 / s
    free = z > 0
    if free.any():
        zf = np.zeros(n)
        zf[free] = _min_norm(M[:, free], g)
        if np.all(zf >= 0) and np.max(np.abs(M @ zf - g)) <= np.max(np.abs(M @ z - g)):
            z = zf
    if np.max(np.abs(M @ z - g)) > eq_tol:
        return QPResult(np.zeros(n), QPStatus.INFEASIBLE)
    free = z > 0

    # phase 2: primal active set on the bounds
    it = 0
    while True:
        it += 1
        if it > max_iter:
            return QPResult(z * s * scale, QPStatus.NUMERICAL_FAILURE, iterations=it)
        target = np.zeros(n)
        if free.any():
            target[free] = _min_norm(M[:, free], g)
        step = target - z
        if np.max(np.abs(step)) <= 1e-13 * (1 + np.max(np.abs(z))):
            mu = _bound_multipliers(M, z, free)
            j = int(np.argmin(mu))
            if mu[j] >= -1e-12:
                break
            free[j] = True
            continue
        shrinking = free & (step < 0)
        alpha = 1.0
        blocking = -1
        if shrinking.any():
            idx = np.flatnonzero(shrinking)
            ratios = -z[idx] / step[idx]
            k = int(np.argmin(ratios))
            if ratios[k] < 1.0:
                alpha = max(ratios[k], 0.0)
                blocking = idx[k]
        z = z + alpha * step
        if blocking >= 0:
            z[blocking] = 0.0
            free[blocking] = False
        z[~free] = 0.0
        z[free] = np.maximum(z[free], 0.0)

    c = z * s
    # refine the equality residual on the final free set, which the scaled
    # subproblem solves only meet to ~cond * eps
    for _ in range(2):
        r = g - B @ c
        if not free.any() or np.max(np.abs(r)) <= 1e-2 * eq_tol:
            break
        trial = c.copy()
        trial[free] += s[free] * _min_norm(M[:, free], r)
        if np.min(trial) < 0 or np.max(np.abs(g - B @ trial)) >= np.max(np.abs(r)):
            break
        c = trial
    kkt = _kkt_residual(B, g, c, weights)
    eq = np.max(np.abs(B @ c - g))
    c *= scale
    if kkt > KKT_TOL or eq > EQ_TOL:
        return QPResult(c, QPStatus.NUMERICAL_FAILURE, kkt, it)
    return QPResult(c, QPStatus.SOLVED, kkt, it)


def _bound_multipliers(M, grad, free):
    """Bound multipliers ``mu = grad - M^T nu`` (zero on ``free``).

    When the free columns do not determine ``nu`` (a degenerate vertex), the
    minimum-norm ``nu`` can show spurious negative multipliers; the null
    space of ``M_free^T`` is then searched, by a small LP, for the ``nu``
    that minimizes the worst negative multiplier.
    """
    nu = _min_norm(M[:, free].T, grad[free]) if free.any() else np.zeros(M.shape[0])
    mu = grad - M.T @ nu
    mu[free] = 0.0
    act = ~free
    if np.min(mu[act], initial=0.0) >= -1e-12:
        return mu
    N = scipy.linalg.null_space(M[:, free].T) if free.any() else np.eye(M.shape[0])
    if N.shape[1] == 0:
        return mu
    K = M[:, act].T @ N  # mu_act(y) = mu0_act - K y
    k = N.shape[1]
    res = scipy.optimize.linprog(
        np.r_[np.zeros(k), 1.0],
        A_ub=np.hstack([K, -np.ones((K.shape[0], 1))]),
        b_ub=mu[act],
        bounds=[(None, None)] * k + [(0, None)],
        method="highs",
    )
    if res.status == 0:
        trial = mu[act] - K @ res.x[:k]
        if trial.min() > mu[act].min():
            mu[act] = trial
    return mu


def _kkt_residual(B, g, c, weights):
    """Worst violation among stationarity, sign, dual feasibility and
    complementarity conditions, on the problem with ``g`` normalized.

    Multiplier terms are relative to ``max(1, |grad|)``: added coefficients
    of 1e4 or more occur, and their gradients carry proportional rounding.
    """
    primal = max(0.0, -np.min(c, initial=0.0))
    free = c > 0
    grad = weights * c  # gradient of 0.5 * c^T H c
    nu = _min_norm(B[:, free].T, grad[free]) if free.any() else np.zeros(B.shape[0])
    # stationarity and dual terms relative to the gradient scale
    gscale = max(1.0, np.max(np.abs(grad), initial=0.0))
    stationarity = np.max(np.abs(grad[free] - B[:, free].T @ nu), initial=0.0) / gscale
    mu = _bound_multipliers(B, grad, free)
    dual = max(0.0, -np.min(mu[~free], initial=0.0)) / gscale
    comp = np.max(np.abs(c * mu), initial=0.0) / (gscale * max(1.0, np.max(np.abs(c), initial=0.0)))
    return max(primal, stationarity, dual, comp)


def loocv_errors(coeffs, A_hat):
    """Leave-one-out style errors ``c_i / inv(A_hat)_ii`` and their max norm.

    The inverse is formed in extended precision for matrices up to
    ``EXTENDED_INVERSE_MAX`` rows (every patch-sized system); larger ones use
    a double-precision inverse.

    Raises
    ------
    NumericalFailure
        If ``A_hat`` is singular or a diagonal entry of its inverse vanishes.
    """
    A_hat = np.asarray(A_hat, dtype=float)
    coeffs = np.asarray(coeffs)
    n = len(A_hat)
    try:
        if n <= EXTENDED_INVERSE_MAX:
            inv_diag = np.diag(_lu_solve_extended(A_hat, np.eye(n)))
        else:
            inv_diag = np.diag(np.linalg.inv(A_hat)).astype(np.longdouble)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("augmented matrix is singular", condition=np.inf) from exc
    if not np.all(np.isfinite(inv_diag)) or np.min(np.abs(inv_diag)) < 1e-14:
        raise NumericalFailure("vanishing diagonal in the inverse of the augmented matrix")
    e = (coeffs.astype(np.longdouble) / inv_diag).astype(float)
    return e, float(np.max(np.abs(e)))


def augmented_system(problem, n_add, A=None, anchored=False):
    """Constraint points, their support radii and the square augmented matrix.

    Rows are the data sites followed by the added points; columns are the
    base kernels followed by the constraint bases. The first ``problem.n``
    rows form the equality matrix of the QP.

    With ``anchored=True`` the ``problem.n`` constraint points sit next to the
    data sites (see :func:`~pcpu.geometry.anchored_points`) instead of on the
    sunflower spiral, and ``n_add`` is ignored.
    """
    if anchored:
        added = anchored_points(problem.center, problem.points, scale=problem.delta)
    else:
        added = sunflower_points(problem.center, problem.delta, n_add)
    radii = np.array([support_radius(p, problem.points, scale=problem.delta) for p in added])
    rows = np.vstack([problem.points, added])
    base = kernel_matrix(rows, problem.points, problem.kernel)
    if A is not None:
        base[: problem.n] = A
    extra = kernel_matrix(rows, added, _CONSTRAINT_KERNEL, shapes=1.0 / radii)
    return added, radii, np.hstack([base, extra])


def fit_local_positive(problem, check_points, candidates=None, tol=NONNEG_TOL):
    """Fit one patch, adding positivity constraints only when needed.

    Parameters
    ----------
    problem : LocalProblem
    check_points : array_like, shape (k, 2)
        Where the unconstrained fit must be nonnegative to be accepted as is.
    candidates : iterable of int, optional
        Numbers of sunflower-placed bases to try; ``1 .. problem.n`` by
        default. One more candidate, with a constraint basis anchored next
        to every data site, always competes as well.

    Returns
    -------
    LocalModel

    Raises
    ------
    PatchInfeasible
        If no candidate constraint count yields a solved QP.
    """
    if problem.n == 0:
        return LocalModel.zero(problem.kernel)
    A = kernel_matrix(problem.points, problem.points, problem.kernel)
    try:
        c = solve_unconstrained(problem)
    except NumericalFailure as exc:
        logger.debug("patch %s: unconstrained solve failed (%s), constraining", problem.index, exc)
    else:
        model = LocalModel(problem.points, problem.kernel, c)
        if check_nonnegativity(model, check_points, tol):
            return model

    if candidates is None:
        candidates = range(1, problem.n + 1)
    best = None
    last = None
    # sunflower candidates, then the anchored set (one constraint basis per
    # data site, always feasible for nonnegative data); all compete on LOOCV
    for n_add, anchored in [(k, False) for k in candidates] + [(problem.n, True)]:
        added, radii, A_hat = augmented_system(problem, n_add, A, anchored=anchored)
        qp = solve_positive_qp(A_hat[: problem.n], problem.values, problem.n)
        last = (n_add, qp)
        if not qp.solved:
            continue
        try:
            _, score = loocv_errors(qp.coeffs, A_hat)
        except NumericalFailure:
            continue
        model = LocalModel(problem.points, problem.kernel, qp.coeffs, added, radii, loocv=score)
        if not check_nonnegativity(model, check_points, tol):
            continue
        if best is None or score < best.loocv:
            best = model
    if best is None:
        n_add, qp = last
        raise PatchInfeasible(
            f"patch {problem.index}: no constrained candidate solved "
            f"(last tried {n_add} added bases, status {qp.status.value})",
            patch=problem.index,
            status=qp.status,
        )
    return best
