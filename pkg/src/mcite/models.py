"""Hamiltonians, initial states and exact imaginary-time evolution."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

from . import qcore
from .numerics import ContractError, NumericalRangeError, SizeError, get_config


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """A Hermitian Hamiltonian with a lazily cached eigendecomposition.

    ``kind`` is one of ``"single_qubit_z"``, ``"mixed_field_ising"`` or
    ``"explicit"``; ``params`` records the construction arguments.
    """

    kind: str
    matrix: np.ndarray = field(repr=False)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        qcore.require_hermitian(m, "Hamiltonian")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        evals, evecs = np.linalg.eigh(self.matrix)
        evals.setflags(write=False)
        evecs.setflags(write=False)
        return evals, evecs

    @property
    def evals(self) -> np.ndarray:
        return self.eig[0]

    @property
    def evecs(self) -> np.ndarray:
        return self.eig[1]

    @cached_property
    def norm(self) -> float:
        return float(np.max(np.abs(self.evals)))

    def expm(self, scale: complex) -> np.ndarray:
        """``exp(scale * H)`` from the cached eigendecomposition."""
        return qcore.exp_from_eig(self.evals, self.evecs, scale)

    def real_time(self, t: float) -> np.ndarray:
        """``exp(-i t H)``."""
        return self.expm(-1j * t)

    def energy(self, rho: np.ndarray) -> float:
        return float(np.real(np.einsum("ij,ji->", self.matrix, rho)))

    def describe(self) -> str:
        if self.kind == "mixed_field_ising":
            return f"ising(N={self.params['N']}, periodic={self.params['periodic']})"
        return self.kind


def sigma_z() -> HamiltonianSpec:
    return HamiltonianSpec("single_qubit_z", qcore.SIGMA_Z)


def explicit(matrix: np.ndarray) -> HamiltonianSpec:
    return HamiltonianSpec("explicit", np.asarray(matrix))


def _site_op(op: np.ndarray, site: int, n: int) -> np.ndarray:
    # site 0 is the most significant tensor factor
    return np.kron(np.kron(np.eye(2**site), op), np.eye(2 ** (n - site - 1)))


def build_ising(N: int, periodic: bool = True) -> HamiltonianSpec:
    """``H = -sum_i (Z_i Z_{i+1} + Z_i + X_i)`` on ``N`` spins."""
    cap = get_config().max_ising_sites
    if N < 1:
        raise ContractError("N must be at least 1")
    if N > cap:
        raise SizeError(f"N={N} exceeds Ising cap {cap}")
    z = [_site_op(qcore.SIGMA_Z, i, N) for i in range(N)]
    x = [_site_op(qcore.SIGMA_X, i, N) for i in range(N)]
    h = np.zeros((2**N, 2**N), dtype=complex)
    # on a ring of two sites the wraparound bond repeats (0, 1); N=1 has no bond
    bonds = [(i, (i + 1) % N) for i in range(N if periodic else N - 1)]
    for i, j in bonds:
        if i == j:
            continue
        h -= z[i] @ z[j]
    for i in range(N):
        h -= z[i] + x[i]
    return HamiltonianSpec("mixed_field_ising", h, {"N": N, "periodic": periodic})


@dataclass(frozen=True)
class SpectralSummary:
    e_gs: float
    gap: float
    degeneracy: int
    dim: int

    @property
    def delta_N(self) -> float:
        return self.gap


def spectral_summary(h: HamiltonianSpec, degeneracy_tol: float | None = None) -> SpectralSummary:
    evals = h.evals
    if degeneracy_tol is None:
        degeneracy_tol = get_config().degeneracy_rtol * max(h.norm, 1e-300)
    e0 = float(evals[0])
    close = np.abs(evals - e0) <= degeneracy_tol
    x = int(np.count_nonzero(close))
    gap = float(evals[x] - e0) if x < len(evals) else 0.0
    return SpectralSummary(e_gs=e0, gap=gap, degeneracy=x, dim=h.dim)


def ground_state(h: HamiltonianSpec) -> np.ndarray:
    if spectral_summary(h).degeneracy != 1:
        raise ContractError("ground state is degenerate")
    return np.array(h.evecs[:, 0])


@dataclass(frozen=True)
class InitialStateSpec:
    """Declarative single-copy initial state.

    kinds: ``overlap_mix`` (uses ``p``), ``plus_all``, ``basis_zero``,
    ``max_entangled`` (uses ``D``), ``explicit`` (uses ``vector``).
    """

    kind: Literal["overlap_mix", "plus_all", "basis_zero", "max_entangled", "explicit"]
    p: float | None = None
    D: int | None = None
    vector: tuple | None = None

    def describe(self) -> str:
        if self.kind == "overlap_mix":
            return f"overlap_mix(p={self.p!r})"
        if self.kind == "max_entangled":
            return f"max_entangled(D={self.D})"
        return self.kind


def initial_state(spec: InitialStateSpec, h: HamiltonianSpec | None = None) -> np.ndarray:
    if spec.kind == "overlap_mix":
        if h is None:
            raise ContractError("overlap_mix needs a Hamiltonian")
        p = float(spec.p)
        if not 0.0 <= p <= 1.0:
            raise ContractError(f"overlap p={p} outside [0, 1]")
        if spectral_summary(h).degeneracy != 1:
            raise ContractError("overlap_mix needs a non-degenerate ground state")
        D = h.dim
        coeffs = np.empty(D)
        coeffs[0] = np.sqrt(p)
        coeffs[1:] = np.sqrt((1.0 - p) / (D - 1)) if D > 1 else 0.0
        return h.evecs @ coeffs.astype(complex)
    if spec.kind == "plus_all":
        if h is None:
            raise ContractError("plus_all needs a Hamiltonian for the dimension")
        return np.full(h.dim, 1 / np.sqrt(h.dim), dtype=complex)
    if spec.kind == "basis_zero":
        if h is None:
            raise ContractError("basis_zero needs a Hamiltonian for the dimension")
        psi = np.zeros(h.dim, dtype=complex)
        psi[0] = 1
        return psi
    if spec.kind == "max_entangled":
        D = int(spec.D if spec.D is not None else h.dim)
        return np.eye(D, dtype=complex).reshape(-1) / np.sqrt(D)
    if spec.kind == "explicit":
        psi = qcore.normalize(np.asarray(spec.vector, dtype=complex))
        if h is not None and psi.size != h.dim:
            raise ContractError(f"vector dim {psi.size} does not match H dim {h.dim}")
        return psi
    raise ContractError(f"unknown initial state kind {spec.kind!r}")


def imaginary_evolved(h: HamiltonianSpec, phi0: np.ndarray, beta: float) -> np.ndarray:
    """``exp(-beta H)|phi0>`` normalized.

    Positive ``beta`` cools. Evaluated in the eigenbasis with the largest
    exponent shifted to zero so that large ``beta`` does not overflow.
    """
    coeffs = h.evecs.conj().T @ np.asarray(phi0, dtype=complex)
    support = np.abs(coeffs) > 0
    if not np.any(support):
        raise NumericalRangeError("initial state is the zero vector")
    expo = -beta * h.evals
    shift = np.max(expo[support])
    weights = np.zeros_like(expo)
    weights[support] = np.exp(expo[support] - shift)
    out = coeffs * weights
    nrm = np.linalg.norm(out)
    if nrm == 0 or not np.isfinite(nrm):
        raise NumericalRangeError("imaginary-time weights underflowed")
    return h.evecs @ (out / nrm)


def energy_of_state(h: HamiltonianSpec, psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, h.matrix @ psi)))
