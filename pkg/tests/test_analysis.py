import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, random_state
from mcite import analysis, compiler, engines, models
from mcite.models import InitialStateSpec

PLUS = InitialStateSpec("plus_all")
SZ = models.sigma_z()


class TestSigmaK2:
    def test_sigma_z_plus(self):
        # K on |+>|+> has eigenvalues 0, 0, +-2 with weights 1/4: <K^2> = 2, <K^4> = 8
        assert analysis.sigma_K2(SZ, np.ones(2) / np.sqrt(2)) == pytest.approx(2.0)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 4))
    def test_matches_dense(self, seed, d):
        rng = np.random.default_rng(seed)
        h = models.explicit(random_hermitian(rng, d))
        phi = random_state(rng, d)
        assert analysis.sigma_K2(h, phi) == pytest.approx(analysis.sigma_K2_dense(h, phi), abs=1e-9)

    def test_eigenstate_zero(self):
        assert analysis.sigma_K2(SZ, np.array([0, 1])) == 0

    def test_b_k(self):
        assert analysis.b_K(SZ) == pytest.approx(8.0)


class TestTreeBound:
    def test_eigenstate(self):
        rep = analysis.tree_bound(SZ, np.array([0, 1]), 0.5, 10)
        assert rep.measured == pytest.approx(0, abs=1e-14)
        assert rep.bound >= 0

    def test_sigma_z_holds(self):
        rep = analysis.tree_bound(SZ, PLUS, 0.5, 20)
        assert rep.asserted and rep.holds
        assert rep.measured <= rep.bound

    @pytest.mark.parametrize("n", [10, 20])
    def test_inverse_n_scaling(self, n):
        a = analysis.tree_bound(SZ, PLUS, 0.5, n)
        b = analysis.tree_bound(SZ, PLUS, 0.5, 2 * n)
        assert b.bound / a.bound == pytest.approx(0.5, rel=0.05)

    @given(st.floats(0.05, 1.0), st.integers(0, 2**32 - 1))
    def test_holds_in_small_step_regime(self, beta, seed):
        rng = np.random.default_rng(seed)
        h = models.explicit(random_hermitian(rng, 2))
        n = int(np.ceil(10 * beta / 0.1))
        assert analysis.tree_bound(h, random_state(rng, 2), beta, n).holds

    def test_not_asserted_for_large_step(self):
        assert not analysis.tree_bound(SZ, PLUS, 1.0, 5).asserted


class TestOptimizer:
    def test_quadratic(self):
        opt = analysis.optimize_eps(lambda e: (e - 0.2) ** 2, 0.01, 1.0, tol=1e-3)
        assert opt.eps == pytest.approx(0.2, rel=1e-3)
        assert not opt.at_boundary

    def test_constant_returns_lower_end(self):
        fn = lambda e: engines.run_tree_recurrence(SZ, np.array([0, 1]), e, 3).energy
        opt = analysis.optimize_eps(fn, 0.01, 1.0)
        assert opt.eps == 0.01 and opt.at_boundary

    def test_hedge_four_interior(self):
        s = compiler.build_hedge(4)
        opt = analysis.optimize_eps(lambda e: engines.run_statevector(s, SZ, PLUS, e).energy, 0.01, 1.0)
        assert not opt.at_boundary
        assert opt.value < opt.grid[0][1] and opt.value < opt.grid[-1][1]

    @given(st.floats(0.02, 0.9), st.floats(0.5, 5.0), st.floats(-0.2, 0.2))
    def test_never_worse_than_grid(self, centre, width, wiggle):
        fn = lambda e: np.cos(width * np.log(e / centre)) * wiggle + (np.log(e / centre)) ** 2
        opt = analysis.optimize_eps(fn, 0.01, 1.0)
        assert opt.value <= min(y for _, y in opt.grid)
        assert opt.value == pytest.approx(fn(opt.eps))

    def test_bad_range(self):
        with pytest.raises(ValueError):
            analysis.optimize_eps(lambda e: e, 1.0, 0.5)


class TestScaling:
    def test_u(self):
        rep = analysis.gate_scaling_report(SZ, PLUS, "U")
        assert rep.slope == pytest.approx(2.0, abs=0.05)
        assert 0.98 <= rep.coefficient / rep.sigma <= 1.02

    def test_w(self):
        assert analysis.gate_scaling_report(SZ, PLUS, "W").slope == pytest.approx(1.5, abs=0.1)

    @pytest.mark.parametrize("kind", ["U", "V", "W"])
    def test_eigenstate_zero(self, kind):
        rep = analysis.gate_scaling_report(SZ, np.array([1, 0]), kind)
        assert max(rep.distance) <= 1e-12 and max(rep.first_copy) <= 1e-12

    def test_rows(self):
        rows = analysis.gate_scaling_report(SZ, PLUS, "U").rows()
        assert len(rows) == 9 and rows[0]["kind"] == "U"

    def test_fit_decay_rate(self):
        ns = np.arange(1, 20)
        assert analysis.fit_decay_rate(ns, 3 * np.exp(-0.4 * ns)) == pytest.approx(0.4)

    def test_richardson_linear(self):
        eps = np.array([0.1, 0.2, 0.4])
        assert analysis.richardson(eps, 2 + 3 * eps) == pytest.approx(2)
