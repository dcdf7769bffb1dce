import warnings

import numpy as np
import pytest

from pcpu.eco_demo import INITIAL_STATE, EcoParams, EcoState, eco_rhs, equilibrium_surface, integrate
from pcpu.exceptions import ConfigurationError, DivergenceError

P = EcoParams(a=1.0, b=1.0)


def test_published_parameter_values():
    assert (P.mu, P.r1, P.r2, P.alpha, P.beta, P.e, P.f) == (0.03, 0.01, 0.0006, 20.0, 8.0, 0.605, 0.001)
    assert (P.K1, P.K2, P.c, P.g) == (3469640.64, 15695993.39, 101862.16, 1001229580.18)
    assert (INITIAL_STATE.H, INITIAL_STATE.G, INITIAL_STATE.T) == (268.750, 2313093.76, 1046399.56)


def test_feeding_rates_required():
    with pytest.raises(TypeError):
        EcoParams()


@pytest.mark.parametrize("kw", [{"mu": -1.0}, {"e": 1.5}, {"f": 2.0}, {"K1": 0.0}, {"alpha": float("nan")}])
def test_invalid_params(kw):
    with pytest.raises(ConfigurationError):
        EcoParams(a=1.0, b=1.0, **kw)


def test_invalid_state():
    with pytest.raises(ConfigurationError):
        EcoState(-1.0, 0.0, 0.0)


class TestRhs:
    def test_h_axis(self):
        assert eco_rhs(P, EcoState(0.0, 1e6, 2e6))[0] == 0.0

    def test_logistic_equilibrium(self):
        dH, dG, dT = eco_rhs(P, EcoState(0.0, P.K1, P.K2))
        assert (dH, dG, dT) == (0.0, 0.0, 0.0)

    def test_zero_state(self):
        assert eco_rhs(P, EcoState(0.0, 0.0, 0.0)) == (0.0, 0.0, 0.0)

    def test_explicit(self):
        s = EcoState(100.0, 2e6, 3e6)
        d1 = P.c + s.H + P.alpha * s.G
        d2 = P.g + s.H + P.beta * s.T + P.alpha * s.G
        dH = -P.mu * s.H + P.a * P.e * s.H * s.G / d1 + P.b * P.f * s.H * s.T / d2
        dG = P.r1 * s.G * (1 - s.G / P.K1) - P.a * s.H * s.G / d1
        dT = P.r2 * s.T * (1 - s.T / P.K2) - P.b * s.H * s.T / d2
        np.testing.assert_allclose(eco_rhs(P, s), (dH, dG, dT), rtol=1e-14)

    def test_division_guard(self):
        p = EcoParams(a=1.0, b=1.0, c=0.0, g=0.0)
        with pytest.raises(ZeroDivisionError):
            eco_rhs(p, EcoState(0.0, 0.0, 0.0))


class TestIntegrate:
    def test_stationary(self):
        s0 = EcoState(0.0, P.K1, P.K2)
        s = integrate(P, s0, 5000, 1.0)
        np.testing.assert_allclose(s.as_array(), s0.as_array(), rtol=1e-9)

    def test_axis_invariance(self):
        s, traj = integrate(P, EcoState(0.0, 1e5, 1e5), 2000, 2.0, trajectory=True)
        assert np.all(traj[:, 0] == 0.0)

    def test_rk4_order(self):
        ref = integrate(P, INITIAL_STATE, 400, 0.25).as_array()
        err = [np.max(np.abs(integrate(P, INITIAL_STATE, 400, h).as_array() - ref)) for h in (8.0, 4.0, 2.0)]
        orders = np.log2(np.array(err[:-1]) / np.array(err[1:]))
        assert np.all((orders >= 3.5) & (orders <= 4.5))

    def test_published_initial_state(self):
        s, traj = integrate(P, INITIAL_STATE, 20000, 1.0, trajectory=True)
        assert np.all(np.isfinite(s.as_array())) and np.all(traj >= 0)
        # boundedness of the prey
        assert traj[:, 1].max() <= max(INITIAL_STATE.G, P.K1) * (1 + 1e-6)
        assert traj[:, 2].max() <= max(INITIAL_STATE.T, P.K2) * (1 + 1e-6)

    def test_bad_steps(self):
        with pytest.raises(ConfigurationError):
            integrate(P, INITIAL_STATE, 10, 0.0)
        with pytest.raises(ConfigurationError):
            integrate(P, INITIAL_STATE, 0.5, 1.0)

    def test_divergence(self):
        p = EcoParams(a=1.0, b=1.0, r1=1e300)
        with pytest.raises(DivergenceError) as info:
            integrate(p, INITIAL_STATE, 10, 1.0)
        assert info.value.step == 1

    def test_clamped_nonnegative(self):
        # a huge step overshoots; clamping keeps the state nonnegative
        p = EcoParams(a=1.0, b=1.0, mu=0.9)
        _, traj = integrate(p, INITIAL_STATE, 200, 5.0, trajectory=True)
        assert traj.min() >= 0


class TestSurface:
    def test_shape_and_sign(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            pts, vals, raw = equilibrium_surface(P, (5, 40), (0.01, 0.1), 2, t_end=100, dt=1)
        assert pts.shape == (4, 2) and vals.shape == (4,)
        assert np.all(vals >= 0)
        np.testing.assert_array_equal(pts, [[0, 0], [1, 0], [0, 1], [1, 1]])
        np.testing.assert_allclose(raw[-1], [40, 0.1])

    def test_matches_cellwise_integration(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            _, vals, raw = equilibrium_surface(P, (10, 30), (0.02, 0.04), 3, t_end=300, dt=1)
        for (alpha, mu), v in zip(raw, vals):
            s = integrate(EcoParams(a=1.0, b=1.0, alpha=alpha, mu=mu), INITIAL_STATE, 300, 1)
            assert v == pytest.approx(s.H, rel=1e-12, abs=1e-300)

    def test_extinction_plateau(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            _, vals, raw = equilibrium_surface(P, (5, 40), (0.01, 0.05), 8, t_end=20000, dt=2)
        # beyond the threshold mu > a e / alpha + b f / beta the herbivore dies out
        doomed = raw[:, 1] > 1.2 * (P.a * P.e / raw[:, 0] + P.b * P.f / P.beta)
        assert doomed.any() and (~doomed).any()
        assert np.all(vals[doomed] < 1e-6 * vals.max())
        assert np.all(vals >= 0)

    def test_warns_when_not_stationary(self):
        with pytest.warns(RuntimeWarning, match="not stationary"):
            equilibrium_surface(P, (5, 40), (0.01, 0.1), 2, t_end=10, dt=1)

    def test_bad_args(self):
        with pytest.raises(ConfigurationError):
            equilibrium_surface(P, (5, 40), (0.01, 0.1), 1)
        with pytest.raises(ConfigurationError):
            equilibrium_surface(P, (40, 5), (0.01, 0.1), 3)
