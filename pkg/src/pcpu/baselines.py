"""Comparison methods: Shepard's inverse distance weighting and the
single-domain constrained CSRBF fit."""

import numpy as np

from .exceptions import ConfigurationError
from .geometry import Domain
from .pu import Mode, PUConfig, fit

__all__ = ["shepard_eval", "global_constrained_fit", "global_candidates", "GLOBAL_MAX_POINTS"]

GLOBAL_MAX_POINTS = 4000


def shepard_eval(points, values, query, power=2.0, chunk=2048):
    """Shepard's inverse distance weighted approximant.

    ``S(x) = sum_i f_i r_i(x)^-p / sum_i r_i(x)^-p``, and exactly ``f_i``
    at a data site.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    values = np.asarray(values, dtype=float).reshape(-1)
    query = np.asarray(query, dtype=float).reshape(-1, 2)
    if len(points) == 0:
        raise ValueError("need at least one data point")
    if power <= 0:
        raise ValueError("power must be positive")
    out = np.empty(len(query))
    for start in range(0, len(query), chunk):
        q = query[start:start + chunk]
        r = np.hypot(q[:, None, 0] - points[None, :, 0], q[:, None, 1] - points[None, :, 1])
        hit = r == 0
        with np.errstate(divide="ignore"):
            w = r ** -power
        w[hit] = 0.0
        res = (w @ values) / w.sum(axis=1)
        rows = np.flatnonzero(hit.any(axis=1))
        res[rows] = values[np.argmax(hit[rows], axis=1)]
        out[start:start + chunk] = res
    return out


def global_candidates(n):
    """Default constraint counts swept by :func:`global_constrained_fit`."""
    return sorted({max(1, n // 8), max(1, n // 4), max(1, n // 2), max(1, n)})


def global_constrained_fit(points, values, kernel, domain=None, eval_points=None, candidates=None):
    """Constrained fit on the whole data set at once.

    Runs the same local machinery on a single patch (``d = 1``) centred at
    the domain midpoint, whose radius equals the domain side and therefore
    covers the whole domain.

    Parameters
    ----------
    candidates : iterable of int, optional
        Sunflower constraint counts to sweep. Defaults to
        ``N/8, N/4, N/2, N``; a full ``1 .. N`` sweep of dense QPs is out of
        reach at benchmark sizes.

    Returns
    -------
    PUModel
    """
    n = len(np.asarray(points).reshape(-1, 2))
    if n > GLOBAL_MAX_POINTS:
        raise ConfigurationError(f"global fit is dense; {n} points exceeds the limit of {GLOBAL_MAX_POINTS}")
    if candidates is None:
        candidates = global_candidates(n)
    config = PUConfig(kernel, Mode.PCPU, Domain.coerce(domain), d_override=1)
    return fit(points, values, config, eval_points=eval_points, candidates=candidates)
