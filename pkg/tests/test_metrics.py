import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcpu.geometry import Domain
from pcpu.metrics import ErrorReport, error_report, eval_grid, random_nodes, test_function

# frozen regression anchor: first point of random_nodes(300, seed=1)
GOLDEN_FIRST_POINT = (0.13436424411240122, 0.8474337369372327)


class TestFunctions:
    def test_f1_values(self):
        assert test_function("f1", 0.5, 0.4) == 0.0
        assert test_function("f1", 0.0, 0.0) == pytest.approx(0.41, abs=1e-15)

    def test_f2_zero_lines(self):
        x = np.linspace(0, 1, 11)
        assert np.all(test_function("f2", x, np.full(11, 0.4)) == 0)
        assert np.all(test_function("f2", np.full(11, 0.5), x) == 0)

    def test_f2_value(self):
        expected = (3 * (1 - 0.4) * math.sin(1 - 0.5)) ** 2 * (1 + 0.5) ** (1 / 3)
        assert test_function("F2", 1.0, 1.0) == pytest.approx(expected, rel=1e-14)

    def test_unknown(self):
        with pytest.raises(ValueError):
            test_function("f3", 0, 0)

    def test_nonnegative(self, rng):
        x = rng.random((10_000, 2))
        assert test_function("f1", *x.T).min() >= 0
        assert test_function("f2", *x.T).min() >= 0


class TestErrorReport:
    def test_identical(self):
        r = error_report([1.0, 2.0], [1.0, 2.0])
        assert (r.mae, r.rmse) == (0.0, 0.0)

    def test_diffs_0_1(self):
        r = error_report([0.0, 0.0], [0.0, 1.0])
        assert r.mae == 1.0
        assert r.rmse == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_single(self):
        r = error_report([1.0], [1.5])
        assert r.mae == r.rmse == 0.5
        assert isinstance(r, ErrorReport)

    def test_negatives(self):
        r = error_report([0, 0, 0], [-1e-11, -1e-9, 0.5])
        assert r.n_negative == 1
        assert r.min_value == -1e-9
        assert r.as_dict()["n_eval"] == 3

    def test_mismatch(self):
        with pytest.raises(ValueError):
            error_report([1, 2], [1])
        with pytest.raises(ValueError):
            error_report([], [])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50), st.integers(0, 2**31 - 1))
    def test_rmse_le_mae(self, t, seed):
        t = np.array(t)
        a = t + np.random.default_rng(seed).normal(size=len(t))
        r = error_report(t, a)
        assert r.rmse <= r.mae * (1 + 1e-12)
        assert error_report(a, a).mae == 0.0


class TestNodes:
    def test_golden(self):
        assert tuple(random_nodes(300, 1)[0]) == GOLDEN_FIRST_POINT

    def test_deterministic(self):
        assert random_nodes(100, 9).tobytes() == random_nodes(100, 9).tobytes()
        assert random_nodes(100, 9).tobytes() != random_nodes(100, 10).tobytes()

    def test_prefix_stable(self):
        np.testing.assert_array_equal(random_nodes(10, 3), random_nodes(50, 3)[:10])

    def test_range(self):
        x = random_nodes(5000, 2)
        assert x.shape == (5000, 2)
        assert x.min() >= 0 and x.max() < 1


class TestGrid:
    def test_corners(self):
        np.testing.assert_array_equal(eval_grid(2), [[0, 0], [1, 0], [0, 1], [1, 1]])

    def test_size_80(self):
        assert eval_grid(80).shape == (6400, 2)

    def test_row_major(self):
        g = eval_grid(5)
        assert np.all(np.diff(g[:5, 0]) > 0) and np.all(g[:5, 1] == 0)

    def test_domain(self):
        g = eval_grid(3, Domain(1, 3, -1, 0))
        assert g[0].tolist() == [1, -1] and g[-1].tolist() == [3, 0]

    def test_too_small(self):
        with pytest.raises(ValueError):
            eval_grid(1)
