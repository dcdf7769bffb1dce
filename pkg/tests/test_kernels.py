import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcpu.kernels import Family, KernelSpec, collocation_matrix, eval_rbf, kernel_matrix

WEN = KernelSpec("wendland", 0.1)
IMQ = KernelSpec("imq", 1.0)


class TestEvalRbf:
    def test_wendland_at_zero(self):
        assert eval_rbf(WEN, 0.0) == 1.0

    def test_wendland_half(self):
        assert eval_rbf(KernelSpec("wendland", 1.0), 0.5) == pytest.approx(0.1875, abs=1e-15)

    def test_imq_sqrt3(self):
        assert eval_rbf(IMQ, math.sqrt(3)) == pytest.approx(0.5, abs=1e-15)

    def test_wendland_support_edge(self):
        assert eval_rbf(WEN, 10.0) == 0.0
        assert eval_rbf(WEN, 25.0) == 0.0
        assert eval_rbf(WEN, 10.0 - 1e-6) > 0.0

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            eval_rbf(IMQ, -1e-3)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            eval_rbf(WEN, float("nan"))

    def test_bad_shape(self):
        for shape in (0.0, -1.0, float("inf")):
            with pytest.raises(ValueError):
                KernelSpec("imq", shape)

    def test_family_aliases(self):
        assert Family("WendlandC2") is Family.WENDLAND_C2
        assert Family("IMQ") is Family.IMQ
        with pytest.raises(ValueError):
            Family("gaussian")

    def test_support_radius(self):
        assert WEN.support_radius == pytest.approx(10.0)
        assert IMQ.support_radius == np.inf

    @pytest.mark.parametrize("spec", [WEN, IMQ, KernelSpec("wendland", 3.0), KernelSpec("imq", 0.2)])
    def test_monotone_nonincreasing(self, spec):
        r = np.linspace(0, 20, 4001)
        v = eval_rbf(spec, r)
        assert np.all(np.diff(v) <= 0)

    @given(
        st.sampled_from(["wendland", "imq"]),
        st.floats(1e-3, 1e3),
        st.floats(0, 1e4, allow_nan=False),
    )
    def test_range_unit_interval(self, fam, shape, r):
        v = eval_rbf(KernelSpec(fam, shape), r)
        assert 0.0 <= v <= 1.0

    @given(st.floats(1e-2, 1e2), st.floats(0, 1e3))
    def test_wendland_zero_iff_outside_support(self, shape, r):
        spec = KernelSpec("wendland", shape)
        v = eval_rbf(spec, r)
        if shape * r >= 1.0:
            assert v == 0.0
        elif shape * r < 1.0 - 1e-4:
            assert v > 0.0


class TestCollocation:
    def test_single_point(self):
        p = np.array([[0.3, 0.7]])
        assert collocation_matrix(p, [(p[0], WEN)]).tolist() == [[1.0]]

    def test_two_points_imq(self):
        p = np.array([[0.0, 0.0], [math.sqrt(3), 0.0]])
        B = collocation_matrix(p, [(p[0], IMQ), (p[1], IMQ)])
        np.testing.assert_allclose(B, [[1.0, 0.5], [0.5, 1.0]], atol=1e-15)

    def test_mixed_basis_elementwise(self):
        p = np.array([[0.1, 0.2], [0.4, 0.9]])
        wen = KernelSpec("wendland", 1.5)
        B = collocation_matrix(p, [(p[0], IMQ), (p[1], wen)])
        for i in range(2):
            assert B[i, 0] == eval_rbf(IMQ, math.dist(p[i], p[0]))
            assert B[i, 1] == eval_rbf(wen, math.dist(p[i], p[1]))
        # mixed families: not symmetric
        assert B[0, 1] != B[1, 0]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            collocation_matrix(np.empty((0, 2)), [((0, 0), IMQ)])
        with pytest.raises(ValueError):
            collocation_matrix(np.zeros((1, 2)), [])

    def test_kernel_matrix_matches_collocation(self, rng):
        p = rng.random((6, 2))
        np.testing.assert_array_equal(kernel_matrix(p, p, IMQ), collocation_matrix(p, [(c, IMQ) for c in p]))

    @pytest.mark.parametrize("spec", [KernelSpec("wendland", 1.0), KernelSpec("imq", 1.0), KernelSpec("wendland", 3.0)])
    def test_symmetric_positive_definite(self, spec, rng):
        for _ in range(50):
            n = rng.integers(1, 9)
            p = rng.random((n, 2))
            A = kernel_matrix(p, p, spec)
            np.testing.assert_array_equal(A, A.T)
            assert np.linalg.eigvalsh(A).min() > 0
