import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, random_state
from mcite import models, qcore
from mcite.models import InitialStateSpec
from mcite.numerics import ContractError, SizeError


def ising_by_enumeration(N: int, periodic: bool = True) -> np.ndarray:
    """Matrix elements from bit strings; site 0 is the most significant bit."""
    dim = 2**N
    h = np.zeros((dim, dim))
    bonds = [(i, (i + 1) % N) for i in range(N if periodic else N - 1) if i != (i + 1) % N]
    for s in range(dim):
        spins = [1 - 2 * ((s >> (N - 1 - i)) & 1) for i in range(N)]
        h[s, s] -= sum(spins[i] * spins[j] for i, j in bonds) + sum(spins)
        for i in range(N):
            h[s ^ (1 << (N - 1 - i)), s] -= 1
    return h


class TestIsing:
    def test_single_site(self):
        h = models.build_ising(1)
        np.testing.assert_allclose(h.matrix, -qcore.SIGMA_Z - qcore.SIGMA_X)
        np.testing.assert_allclose(h.evals, [-np.sqrt(2), np.sqrt(2)], atol=1e-14)

    def test_two_sites_hermitian(self):
        h = models.build_ising(2)
        assert h.matrix.shape == (4, 4)
        assert np.max(np.abs(h.matrix - h.matrix.conj().T)) < 1e-14

    @pytest.mark.parametrize("N", [2, 3, 4])
    @pytest.mark.parametrize("periodic", [True, False])
    def test_matches_enumeration(self, N, periodic):
        h = models.build_ising(N, periodic)
        np.testing.assert_allclose(h.matrix, ising_by_enumeration(N, periodic), atol=1e-14)

    def test_ground_energy_n3(self):
        oracle = scipy.linalg.eigvalsh(ising_by_enumeration(3), driver="ev")[0]
        assert models.spectral_summary(models.build_ising(3)).e_gs == pytest.approx(oracle, abs=1e-10)

    def test_cap(self):
        with pytest.raises(SizeError):
            models.build_ising(11)

    def test_norm_is_op_norm(self):
        h = models.build_ising(3)
        assert h.norm == pytest.approx(qcore.op_norm(h.matrix), abs=1e-10)
        assert np.all(np.diff(h.evals) >= 0)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ContractError):
            models.explicit(np.array([[0, 1], [2, 0]]))


class TestSpectrum:
    def test_sigma_z(self):
        s = models.spectral_summary(models.sigma_z())
        assert (s.e_gs, s.gap, s.degeneracy, s.dim) == (-1, 2, 1, 2)

    def test_fully_degenerate(self):
        s = models.spectral_summary(models.explicit(np.eye(4)))
        assert s.gap == 0 and s.degeneracy == 4

    def test_ising_gap(self):
        s = models.spectral_summary(models.build_ising(4))
        oracle = scipy.linalg.eigvalsh(ising_by_enumeration(4), driver="evr")
        assert s.gap > 0
        assert s.delta_N == pytest.approx(oracle[1] - oracle[0], abs=1e-10)

    def test_degeneracy_count(self):
        s = models.spectral_summary(models.explicit(np.diag([-1.0, -1.0, 0.5, 2.0])))
        assert s.degeneracy == 2 and s.gap == pytest.approx(1.5)


class TestInitialState:
    h = models.build_ising(3)

    def test_p_one_is_ground_state(self):
        phi = models.initial_state(InitialStateSpec("overlap_mix", p=1.0), self.h)
        assert abs(np.vdot(models.ground_state(self.h), phi)) == pytest.approx(1, abs=1e-12)

    def test_p_zero_is_orthogonal(self):
        phi = models.initial_state(InitialStateSpec("overlap_mix", p=0.0), self.h)
        assert abs(np.vdot(models.ground_state(self.h), phi)) < 1e-10

    def test_random_overlap(self):
        phi = models.initial_state(InitialStateSpec("overlap_mix", p=1 / 8), self.h)
        assert abs(np.vdot(models.ground_state(self.h), phi)) ** 2 == pytest.approx(1 / 8, abs=1e-10)

    def test_equal_weight_remainder(self):
        phi = models.initial_state(InitialStateSpec("overlap_mix", p=0.3), self.h)
        q = np.abs(self.h.evecs.conj().T @ phi) ** 2
        np.testing.assert_allclose(q[1:], 0.7 / 7, atol=1e-12)

    @pytest.mark.parametrize(
        "spec", [InitialStateSpec("plus_all"), InitialStateSpec("basis_zero"), InitialStateSpec("overlap_mix", p=0.4)]
    )
    def test_normalized(self, spec):
        assert np.linalg.norm(models.initial_state(spec, self.h)) == pytest.approx(1, abs=1e-10)

    def test_max_entangled(self):
        psi = models.initial_state(InitialStateSpec("max_entangled", D=3))
        red = qcore.reduced_state(psi, [3, 3], [0])
        np.testing.assert_allclose(red, np.eye(3) / 3, atol=1e-15)

    def test_bad_overlap(self):
        with pytest.raises(ContractError):
            models.initial_state(InitialStateSpec("overlap_mix", p=1.5), self.h)

    def test_degenerate_ground_state_rejected(self):
        with pytest.raises(ContractError):
            models.initial_state(InitialStateSpec("overlap_mix", p=0.5), models.explicit(np.diag([0.0, 0.0, 1.0])))

    def test_explicit_dim_mismatch(self):
        with pytest.raises(ContractError):
            models.initial_state(InitialStateSpec("explicit", vector=np.ones(3)), self.h)


class TestImaginaryEvolved:
    def test_zero_beta(self, rng):
        h = models.explicit(random_hermitian(rng, 4))
        phi = random_state(rng, 4)
        np.testing.assert_allclose(models.imaginary_evolved(h, phi, 0.0), phi, atol=1e-14)

    def test_long_time(self):
        h = models.build_ising(3)
        phi = models.initial_state(InitialStateSpec("overlap_mix", p=0.01), h)
        out = models.imaginary_evolved(h, phi, 40 / h.norm)
        assert abs(np.vdot(models.ground_state(h), out)) ** 2 >= 1 - 1e-8

    def test_two_level_closed_form(self):
        plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
        out = models.imaginary_evolved(models.sigma_z(), plus, 1.0)
        expected = np.array([np.exp(-1), np.exp(1)])
        np.testing.assert_allclose(out, expected / np.linalg.norm(expected), atol=1e-14)

    def test_matches_expm(self, rng):
        h = random_hermitian(rng, 3)
        phi = random_state(rng, 3)
        ref = scipy.linalg.expm(-0.7 * h) @ phi
        out = models.imaginary_evolved(models.explicit(h), phi, 0.7)
        np.testing.assert_allclose(out, ref / np.linalg.norm(ref), atol=1e-12)

    def test_double_bracket_flow(self):
        # first-order step of d rho / d beta = [[rho, H], rho]; local error is O(dbeta^2)
        h = models.build_ising(2)
        phi0 = models.initial_state(InitialStateSpec("plus_all"), h)
        beta = 0.3
        rho = qcore.pure_density(models.imaginary_evolved(h, phi0, beta))
        comm = rho @ h.matrix - h.matrix @ rho
        flow = comm @ rho - rho @ comm

        def err(db):
            exact = qcore.pure_density(models.imaginary_evolved(h, phi0, beta + db))
            return qcore.trace_distance(exact, rho + db * flow)

        ratio = err(2e-3) / err(1e-3)
        assert ratio == pytest.approx(4, rel=0.2)

    @given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
    def test_eigenstate_fixed_point(self, seed, beta):
        # round-off in the other eigencomponents grows like exp(|beta| * spread), so keep ||H|| = 1
        rng = np.random.default_rng(seed)
        m = random_hermitian(rng, 3)
        h = models.explicit(m / qcore.op_norm(m))
        e = np.array(h.evecs[:, rng.integers(3)])
        assert qcore.pure_trace_distance(e, models.imaginary_evolved(h, e, beta)) <= 1e-12

    @given(st.integers(0, 2**32 - 1))
    def test_energy_non_increasing(self, seed):
        rng = np.random.default_rng(seed)
        h = models.explicit(random_hermitian(rng, 4))
        phi = random_state(rng, 4)
        energies = [models.energy_of_state(h, models.imaginary_evolved(h, phi, b)) for b in np.linspace(0, 3, 16)]
        assert np.all(np.diff(energies) <= 1e-12)
