import math

import numpy as np
import pytest

from slod.metrics import ari, boundary_prf, jsd, kendall_tau, vi


class TestJsd:
    def test_identical(self):
        assert jsd([0.2, 0.3, 0.5], [0.2, 0.3, 0.5]) == 0.0

    def test_disjoint_masses(self):
        assert jsd([1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_hand_value(self):
        # 0.5 KL(p||m) + 0.5 KL(q||m) with m = (0.75, 0.25)
        expected = 0.5 * (0.5 * math.log(0.5 / 0.75) + 0.5 * math.log(0.5 / 0.25)) \
            + 0.5 * math.log(1.0 / 0.75)
        got = jsd([0.5, 0.5], [1.0, 0.0])
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.215761, abs=1e-6)

    def test_symmetry(self):
        rng = np.random.default_rng(14)
        for _ in range(50):
            p = rng.dirichlet(np.ones(6))
            q = rng.dirichlet(np.ones(6))
            assert abs(jsd(p, q) - jsd(q, p)) < 1e-12

    def test_sqrt_triangle_inequality(self):
        rng = np.random.default_rng(15)
        for _ in range(200):
            p, q, r = (rng.dirichlet(np.ones(5)) for _ in range(3))
            assert math.sqrt(jsd(p, r)) <= math.sqrt(jsd(p, q)) + math.sqrt(jsd(q, r)) + 1e-9

    def test_errors(self):
        with pytest.raises(ValueError):
            jsd([0.5, 0.5], [1.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            jsd([-0.1, 1.1], [0.5, 0.5])


class TestAri:
    def test_identical_up_to_relabeling(self):
        assert ari([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0

    def test_hand_case(self):
        assert ari([0, 0, 1, 1], [0, 0, 0, 1]) == pytest.approx(0.0, abs=1e-12)

    def test_singletons_vs_one_block(self):
        assert ari([0, 1, 2, 3], [0, 0, 0, 0]) == pytest.approx(0.0, abs=1e-12)

    def test_label_permutation_invariance(self):
        rng = np.random.default_rng(16)
        a = rng.integers(0, 4, size=60)
        b = rng.integers(0, 4, size=60)
        perm = rng.permutation(4)
        assert ari(a, b) == pytest.approx(ari(perm[a], b), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ari([0, 1], [0, 1, 1])


class TestVi:
    def test_identical(self):
        assert vi([0, 0, 1, 1], [1, 1, 0, 0]) == 0.0

    def test_independent_halves(self):
        assert vi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(2 * math.log(2.0), abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(17)
        a = rng.integers(0, 3, size=40)
        b = rng.integers(0, 5, size=40)
        assert vi(a, b) == pytest.approx(vi(b, a), abs=1e-12)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(18)
        for _ in range(100):
            a = rng.integers(0, 3, size=30)
            b = rng.integers(0, 3, size=30)
            c = rng.integers(0, 3, size=30)
            assert vi(a, c) <= vi(a, b) + vi(b, c) + 1e-9


class TestKendallTau:
    def test_identical_ordering(self):
        assert kendall_tau([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_reversed(self):
        assert kendall_tau([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)

    def test_one_swap(self):
        assert kendall_tau([1, 2, 3], [1, 3, 2]) == pytest.approx(1.0 / 3.0)

    def test_sign_flip_under_reversal(self):
        rng = np.random.default_rng(19)
        x = rng.normal(size=20)
        y = rng.normal(size=20)
        assert kendall_tau(x, y) == pytest.approx(-kendall_tau(x, -y), abs=1e-12)

    def test_too_short(self):
        with pytest.raises(ValueError):
            kendall_tau([1.0], [2.0])


class TestBoundaryPrf:
    def test_exact_match(self):
        res = boundary_prf([1.0, 10.0], [1.0, 10.0], tol=0.05)
        assert res.precision == 1.0 and res.recall == 1.0

    def test_no_detections(self):
        res = boundary_prf([], [1.0, 2.0], tol=0.1)
        assert res.precision == 1.0 and res.recall == 0.0

    def test_no_planted(self):
        res = boundary_prf([1.0], [], tol=0.1)
        assert res.precision == 0.0 and res.recall == 1.0

    def test_partial_match_in_log_space(self):
        res = boundary_prf([1.0, 10.0], [1.05], tol=0.1)
        assert res.precision == pytest.approx(0.5)
        assert res.recall == pytest.approx(1.0)
        assert res.matched == [(1.0, 1.05)]

    def test_one_to_one_matching(self):
        # two detections near one planted scale: only one may match
        res = boundary_prf([1.0, 1.01], [1.0], tol=0.1)
        assert res.precision == pytest.approx(0.5)
        assert res.recall == pytest.approx(1.0)

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            boundary_prf([1.0], [1.0], tol=0.0)
