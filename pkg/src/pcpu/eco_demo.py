"""Herbivore equilibrium surface from a predator / two-prey model.

A herbivore ``H`` feeds on grass ``G`` and trees ``T`` with Beddington-De
Angelis functional responses; both prey grow logistically. Integrating the
system to a long horizon for every ``(alpha, mu)`` on a grid gives a
nonnegative scattered dataset for :func:`pcpu.pu.fit`.
"""

import logging
import warnings
from dataclasses import dataclass, fields, replace

import numpy as np

from .exceptions import ConfigurationError, DivergenceError

logger = logging.getLogger(__name__)

__all__ = [
    "EcoParams",
    "EcoState",
    "INITIAL_STATE",
    "eco_rhs",
    "integrate",
    "equilibrium_surface",
    "STATIONARITY_TOL",
]

STATIONARITY_TOL = 1e-8


@dataclass(frozen=True)
class EcoParams:
    """Model parameters.

    The feeding rates ``a`` and ``b`` have no published values and must be
    given. The other defaults are the fixed parameter values of the
    application; ``alpha = 20`` is the evaluated form of ``0.05**-1``.
    Any field may be an array, in which case all quantities broadcast.
    """

    a: float
    b: float
    mu: float = 0.03
    r1: float = 0.01
    r2: float = 0.0006
    K1: float = 3469640.64
    K2: float = 15695993.39
    alpha: float = 20.0
    beta: float = 8.0
    e: float = 0.605
    f: float = 0.001
    c: float = 101862.16
    g: float = 1001229580.18

    def __post_init__(self):
        for fld in fields(self):
            v = np.asarray(getattr(self, fld.name), dtype=float)
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise ConfigurationError(f"parameter {fld.name} must be finite and nonnegative")
        if np.any(np.asarray(self.e) > 1) or np.any(np.asarray(self.f) > 1):
            raise ConfigurationError("conversion factors e and f must not exceed 1")
        if np.any(np.asarray(self.K1) == 0) or np.any(np.asarray(self.K2) == 0):
            raise ConfigurationError("carrying capacities must be positive")

    def extinction_threshold(self):
        """Mortality above which the herbivore cannot grow even on
        saturating prey: ``a e / alpha + b f / beta``."""
        with np.errstate(divide="ignore"):
            return self.a * self.e / self.alpha + self.b * self.f / self.beta


@dataclass(frozen=True)
class EcoState:
    H: float
    G: float
    T: float

    def __post_init__(self):
        for name in ("H", "G", "T"):
            v = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise ConfigurationError(f"state {name} must be finite and nonnegative")

    def as_array(self):
        return np.array([self.H, self.G, self.T], dtype=float)


INITIAL_STATE = EcoState(H=268.750, G=2313093.76, T=1046399.56)


def _rhs(p, H, G, T):
    d1 = p.c + H + p.alpha * G
    d2 = p.g + H + p.beta * T + p.alpha * G
    # RK stages may leave the nonnegative orthant, so only an exact zero is
    # treated as an error
    if np.any(d1 == 0) or np.any(d2 == 0):
        raise ZeroDivisionError("functional response denominator vanished (c = g = 0 at the zero state?)")
    grass = H * G / d1
    trees = H * T / d2
    dH = -p.mu * H + p.a * p.e * grass + p.b * p.f * trees
    dG = p.r1 * G * (1.0 - G / p.K1) - p.a * grass
    dT = p.r2 * T * (1.0 - T / p.K2) - p.b * trees
    return dH, dG, dT


def eco_rhs(p, s):
    """Time derivatives ``(dH, dG, dT)`` at state ``s``.

    Raises
    ------
    ZeroDivisionError
        If a response denominator vanishes, which for a nonnegative state
        happens only when ``c = g = 0`` at the zero state.
    """
    out = _rhs(p, *(np.asarray(v, dtype=float) for v in (s.H, s.G, s.T)))
    return tuple(float(v) if np.ndim(v) == 0 else v for v in out)


def _rk4(p, y, t_end, dt, trajectory=False):
    """Fixed-step RK4 on ``y`` of shape (3, ...), clamped at zero."""
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if not t_end >= dt:
        raise ConfigurationError(f"t_end must be at least dt, got t_end={t_end}, dt={dt}")
    n_steps = int(round(t_end / dt))
    h = t_end / n_steps

    def f(u):
        return np.stack(np.broadcast_arrays(*_rhs(p, u[0], u[1], u[2])))

    traj = [y.copy()] if trajectory else None
    for step in range(1, n_steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
            y = np.maximum(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), 0.0)
        if not np.all(np.isfinite(y)):
            bad = np.argwhere(~np.all(np.isfinite(y), axis=0).reshape(np.shape(y[0]) or (1,)))
            raise DivergenceError(
                f"non-finite state at step {step} (t={step * h:g})", step=step, cell=tuple(bad[0]) if bad.size else None
            )
        if trajectory:
            traj.append(y.copy())
    return y, (np.array(traj) if trajectory else None)


def integrate(p, s0, t_end, dt, trajectory=False):
    """Classical fixed-step RK4 from ``s0`` to ``t_end``.

    The step is adjusted to ``t_end / round(t_end / dt)`` so the horizon is
    hit exactly. States are clamped at zero after every step.

    Parameters
    ----------
    p : EcoParams
    s0 : EcoState
    t_end, dt : float
        Horizon and step, in days.
    trajectory : bool
        Also return the states at every step, shape ``(n_steps + 1, 3)``.

    Returns
    -------
    EcoState or (EcoState, numpy.ndarray)

    Raises
    ------
    DivergenceError
        If the state becomes non-finite; the message names the step.
    """
    y0 = np.asarray([s0.H, s0.G, s0.T], dtype=float)
    y, traj = _rk4(p, y0, float(t_end), float(dt), trajectory)
    final = EcoState(*(float(v) for v in y))
    return (final, traj) if trajectory else final


def equilibrium_surface(p_base, alpha_range, mu_range, n_side, t_end=20000.0, dt=1.0, s0=INITIAL_STATE):
    """Long-time herbivore biomass over an ``(alpha, mu)`` grid.

    All grid cells are integrated together as one vectorized system; cells
    do not interact, so each row equals a separate :func:`integrate` run.

    Parameters
    ----------
    p_base : EcoParams
        Supplies every parameter except ``alpha`` and ``mu``.
    alpha_range, mu_range : (float, float)
    n_side : int
        Grid points per axis (at least 2).

    Returns
    -------
    points : numpy.ndarray, shape (n_side**2, 2)
        ``(alpha, mu)`` mapped affinely onto the unit square, alpha fastest.
    values : numpy.ndarray, shape (n_side**2,)
        ``H(t_end)``, nonnegative.
    raw : numpy.ndarray, shape (n_side**2, 2)
        The unscaled ``(alpha, mu)`` pairs.
    """
    n_side = int(n_side)
    if n_side < 2:
        raise ConfigurationError(f"n_side must be at least 2, got {n_side}")
    (a0, a1), (m0, m1) = map(lambda r: tuple(map(float, r)), (alpha_range, mu_range))
    if not (a1 > a0 >= 0 and m1 > m0 >= 0):
        raise ConfigurationError(f"invalid ranges alpha={alpha_range}, mu={mu_range}")
    t = np.linspace(0.0, 1.0, n_side)
    gu, gv = np.meshgrid(t, t)
    u, v = gu.ravel(), gv.ravel()
    alpha = a0 + u * (a1 - a0)
    mu = m0 + v * (m1 - m0)
    p = replace(p_base, alpha=alpha, mu=mu)
    y0 = np.repeat(s0.as_array()[:, None], len(u), axis=1)
    try:
        y, _ = _rk4(p, y0, float(t_end), float(dt))
    except DivergenceError as exc:
        i = exc.cell[0] if exc.cell else None
        where = f"cell {i} (alpha={alpha[i]!r}, mu={mu[i]!r})" if i is not None else "unknown cell"
        raise DivergenceError(f"{where}: {exc}", step=exc.step, cell=exc.cell) from exc
    rates = np.stack(_rhs(p, y[0], y[1], y[2]))
    rel = np.linalg.norm(rates, axis=0) / np.maximum(np.linalg.norm(y, axis=0), np.finfo(float).tiny)
    slow = np.count_nonzero(rel >= STATIONARITY_TOL)
    if slow:
        msg = f"{slow} of {len(u)} cells not stationary at t_end={t_end:g} (max relative rate {rel.max():.3g})"
        logger.warning(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return np.column_stack([u, v]), y[0].copy(), np.column_stack([alpha, mu])
