"""Simulation engines: multi-copy statevector, two-copy tree recurrence,
mid-circuit post-selection and the analytic virtual-cooling pipeline."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import compiler, gates, models, qcore
from .compiler import Gate, Pad, Schedule
from .models import HamiltonianSpec, InitialStateSpec
from .numerics import ContractError, McIteError, ShapeError, SizeError, get_config


@dataclass(frozen=True)
class LayerRecord:
    layer: int
    first_copy_energy: float
    total_energy: float
    purity: float


@dataclass(frozen=True)
class RunResult:
    rho1: np.ndarray = field(repr=False)
    energy: float
    beta: float
    fidelity_beta: float
    fidelity_gs: float
    success_prob: float = 1.0
    layers: tuple[LayerRecord, ...] = ()

    @property
    def infidelity_gs(self) -> float:
        return 1.0 - self.fidelity_gs

    @property
    def purity(self) -> float:
        return qcore.purity(self.rho1)


def _init_vector(init: InitialStateSpec | np.ndarray, h: HamiltonianSpec) -> np.ndarray:
    if isinstance(init, InitialStateSpec):
        return models.initial_state(init, h)
    psi = qcore.normalize(np.asarray(init, dtype=complex).reshape(-1))
    if psi.size != h.dim:
        raise ShapeError(f"initial state dim {psi.size} does not match H dim {h.dim}")
    return psi


def _metrics(h: HamiltonianSpec, phi0: np.ndarray, rho1: np.ndarray, label: complex, eps: float, sign: int):
    """Energy, evolved imaginary time and fidelities of a first-copy state with bookkeeping label ``label``."""
    beta = sign * label.real * eps
    target = models.imaginary_evolved(h, phi0, beta)
    if label.imag:
        target = h.real_time(label.imag * eps) @ target
    f_beta = qcore.fidelity_pure(target, rho1)
    summary = models.spectral_summary(h)
    if summary.degeneracy == 1:
        f_gs = qcore.fidelity_pure(h.evecs[:, 0], rho1)
    else:
        f_gs = float(np.real(np.trace(h.evecs[:, : summary.degeneracy].conj().T @ rho1 @ h.evecs[:, : summary.degeneracy])))
    return h.energy(rho1), beta, f_beta, f_gs


def product_register(phi0: np.ndarray, m: int) -> np.ndarray:
    d = phi0.size
    if d**m > get_config().max_state_dim:
        raise SizeError(f"{m} copies of dimension {d} exceed the statevector cap")
    psi = phi0
    for _ in range(m - 1):
        psi = np.multiply.outer(psi, phi0)
    return np.ascontiguousarray(psi).reshape((d,) * m)


class _GateCache:
    def __init__(self, h: HamiltonianSpec, eps: float, sign: int):
        self.h, self.eps, self.sign = h, eps, sign
        self._ops: dict = {}

    def gate(self, kind: str) -> np.ndarray:
        if kind not in self._ops:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                self._ops[kind] = gates.two_copy_gate(kind, self.h, self.eps, self.sign)
        return self._ops[kind]

    def real_mode(self, s: Schedule, phi0: np.ndarray) -> bool:
        """True when every amplitude stays real: real start, U gates only, real U.

        U = exp(-eps K S) is real whenever H is; the kernel then runs in
        float64 at half the memory traffic.
        """
        if np.any(phi0.imag != 0) or any(not isinstance(st, Gate) or st.kind != "U" for st in s.steps):
            return False
        u = self.gate("U")
        if np.max(np.abs(u.imag)) > 1e-14:
            return False
        self._ops["U"] = np.ascontiguousarray(u.real)
        return True

    def pad(self, steps: int) -> np.ndarray:
        key = ("pad", steps)
        if key not in self._ops:
            self._ops[key] = self.h.real_time(steps * self.eps)
        return self._ops[key]


def _apply(psi: np.ndarray, step, cache: _GateCache) -> np.ndarray:
    if isinstance(step, Pad):
        return gates.apply_single(psi, cache.pad(step.steps), step.copy)
    return gates.apply_pair(psi, cache.gate(step.kind), step.i, step.j)


def _layer_record(psi: np.ndarray, h: HamiltonianSpec, layer: int) -> LayerRecord:
    m = psi.ndim
    d = h.dim
    total = 0.0
    rho1 = None
    for k in range(m):
        rk = qcore.reduced_state(psi, [d] * m, [k])
        total += h.energy(rk)
        if k == 0:
            rho1 = rk
    return LayerRecord(layer, h.energy(rho1), total, qcore.purity(rho1))


def run_statevector(
    s: Schedule,
    h: HamiltonianSpec,
    init: InitialStateSpec | np.ndarray,
    eps: float,
    *,
    prune: bool = True,
    record_layers: bool = False,
) -> RunResult:
    """Simulate all ``s.m`` copies exactly and report the first copy.

    With ``prune`` only the causal cone of copy 0 is simulated (the reduced
    state is unchanged). ``record_layers`` disables pruning and records the
    first-copy and total energies after each layer.
    """
    if eps < 0:
        raise ContractError("eps must be non-negative")
    phi0 = _init_vector(init, h)
    d = h.dim
    if d**s.m > get_config().max_state_dim:
        raise SizeError(f"{s.m} copies of dimension {d} exceed the statevector cap")
    label = s.labels()[0]
    cache = _GateCache(h, eps, s.sign)
    psi = product_register(phi0.real if cache.real_mode(s, phi0) else phi0, s.m)
    records = []
    if record_layers:
        records.append(_layer_record(psi, h, 0))
        for li, layer in enumerate(s.layers(), start=1):
            for step in layer:
                psi = _apply(psi, step, cache)
            records.append(_layer_record(psi, h, li))
    else:
        run = compiler.causal_cone(s) if prune else s
        for step in run.steps:
            psi = _apply(psi, step, cache)
    rho1 = qcore.reduced_state(psi, [d] * s.m, [0]).astype(complex)
    energy, beta, f_beta, f_gs = _metrics(h, phi0, rho1, label, eps, s.sign)
    return RunResult(rho1, energy, beta, f_beta, f_gs, 1.0, tuple(records))


def run_postselected(
    s: Schedule,
    h: HamiltonianSpec,
    init: InitialStateSpec | np.ndarray,
    eps: float,
    *,
    min_prob: float = 1e-14,
) -> RunResult:
    """Statevector run that projects every copy whose label returns to zero
    back onto the (real-time evolved) initial state.

    A projection with norm^2 below ``min_prob`` aborts the run; the result then
    carries ``success_prob = 0`` and NaN metrics.
    """
    phi0 = _init_vector(init, h)
    d = h.dim
    m = s.m
    cache = _GateCache(h, eps, s.sign)
    if cache.real_mode(s, phi0):
        phi0 = phi0.real
    psi = product_register(phi0, m)
    c = [0j] * m
    prob = 1.0
    for step in s.steps:
        psi = _apply(psi, step, cache)
        compiler.apply_step(c, step)
        if not isinstance(step, Gate):
            continue
        for k in (step.i, step.j):
            if c[k].real != 0:
                continue
            target = phi0 if c[k].imag == 0 else cache.pad(int(c[k].imag)) @ phi0
            amp = np.tensordot(target.conj(), psi, axes=([0], [k]))
            p = float(np.real(np.vdot(amp, amp)))
            if p < min_prob:
                nan = float("nan")
                return RunResult(np.full((d, d), np.nan, dtype=complex), nan, nan, nan, nan, 0.0)
            prob *= p
            psi = np.moveaxis(np.multiply.outer(amp / np.sqrt(p), target), -1, k)
            psi = np.ascontiguousarray(psi)
    rho1 = qcore.reduced_state(psi, [d] * m, [0]).astype(complex)
    energy, beta, f_beta, f_gs = _metrics(h, phi0.astype(complex), rho1, c[0], eps, s.sign)
    return RunResult(rho1, energy, beta, f_beta, f_gs, prob)


def swap_mix(phi: np.ndarray, psi: np.ndarray, a: float = np.pi / 4) -> np.ndarray:
    """``Tr_2(exp(i a S) phi (x) psi exp(-i a S))`` for unit-trace ``phi``, ``psi``."""
    ca, sa = np.cos(a), np.sin(a)
    return ca**2 * phi + sa**2 * psi + 1j * ca * sa * (psi @ phi - phi @ psi)


def tree_step(rho: np.ndarray, h: HamiltonianSpec, eps: float, sign: int = 1, method: str = "swap") -> np.ndarray:
    """One layer of the tree recurrence ``Tr_2(U rho (x) rho U^dagger)``.

    ``method="dense"`` builds the two-copy operator explicitly;
    ``method="swap"`` uses that the inner SWAP rotation leaves ``rho (x) rho``
    invariant, so the layer is a real-time twist followed by :func:`swap_mix`.
    Both act in the computational basis.
    """
    if method == "dense":
        d = h.dim
        if d * d > get_config().max_density_dim:
            raise SizeError(f"two-copy dimension {d * d} exceeds the dense cap")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            u = gates.gate_U(h, eps, sign)
        big = u @ np.kron(rho, rho) @ u.conj().T
        return qcore.partial_trace(big, [d, d], [0])
    if method == "swap":
        fwd = h.real_time(sign * eps)
        bwd = fwd.conj().T
        cooled = fwd @ rho @ bwd
        heated = bwd @ rho @ fwd
        return swap_mix(cooled, heated)
    raise ContractError(f"unknown recurrence method {method!r}")


def run_tree_recurrence(
    h: HamiltonianSpec,
    init: InitialStateSpec | np.ndarray,
    eps: float,
    n: int,
    *,
    sign: int = 1,
    method: str = "swap",
    record_layers: bool = False,
) -> RunResult:
    """Iterate the two-copy recurrence ``n`` times from the pure initial state."""
    if n < 0:
        raise ContractError("n must be non-negative")
    if h.dim > get_config().max_recurrence_dim:
        raise SizeError(f"single-copy dimension {h.dim} exceeds the recurrence cap")
    phi0 = _init_vector(init, h)
    rho = qcore.pure_density(phi0)
    records = [LayerRecord(0, h.energy(rho), 2 * h.energy(rho), 1.0)] if record_layers else []
    for l in range(1, n + 1):
        rho = tree_step(rho, h, eps, sign, method)
        rho = 0.5 * (rho + rho.conj().T)
        if record_layers:
            e = h.energy(rho)
            records.append(LayerRecord(l, e, 2 * e, qcore.purity(rho)))
    energy, beta, f_beta, f_gs = _metrics(h, phi0, rho, complex(n, 0), eps, sign)
    return RunResult(rho, energy, beta, f_beta, f_gs, 1.0, tuple(records))


@dataclass(frozen=True)
class VirtualCoolResult:
    """Output of the single-layer swap-trick pipeline.

    ``estimates[name][n-1]`` is ``Tr(x rho^n) / Tr(rho^n)``; ``log_trace[n-1]``
    is ``log Tr(rho^n)``; ``top_prob[n-1]`` the weight of one most-probable
    eigenstate and ``lower_bound[n-1]`` its guaranteed minimum.
    """

    rho: np.ndarray = field(repr=False)
    probs: np.ndarray
    energies: np.ndarray
    n_values: np.ndarray
    estimates: dict
    log_trace: np.ndarray
    top_prob: np.ndarray
    lower_bound: np.ndarray
    p_star: float
    p_second: float
    degeneracy: int
    rate: float

    @property
    def energy(self) -> np.ndarray:
        return self.estimates["energy"]

    @property
    def trace_power(self) -> np.ndarray:
        return np.exp(self.log_trace)


def virtual_cool_probs(h_int: HamiltonianSpec, eps: float) -> np.ndarray:
    """Eigenvalues of the single-internal-copy state in the energy eigenbasis.

    ``p_i = 1/D + (1/D^2) sum_j sin(2 eps (E_j - E_i))``.
    """
    e = h_int.evals
    D = e.size
    return 1.0 / D + np.sin(2 * eps * (e[None, :] - e[:, None])).sum(axis=1) / D**2


def virtual_cool_state(h_int: HamiltonianSpec, eps: float) -> np.ndarray:
    """Closed form ``1/D + i/(2D^2) (Tr(e^{-2i eps H}) e^{2i eps H} - Tr(e^{2i eps H}) e^{-2i eps H})``."""
    D = h_int.dim
    plus = h_int.expm(2j * eps)
    minus = h_int.expm(-2j * eps)
    return np.eye(D) / D + 1j / (2 * D**2) * (np.trace(minus) * plus - np.trace(plus) * minus)


def virtual_cool(
    h_int: HamiltonianSpec,
    eps: float,
    n_max: int,
    observables: dict | None = None,
    *,
    rel_tol: float = 1e-12,
) -> VirtualCoolResult:
    if n_max < 1:
        raise ContractError("n_max must be at least 1")
    if eps < 0:
        raise ContractError("eps must be non-negative")
    cfg = get_config()
    p = virtual_cool_probs(h_int, eps)
    if np.any(p < -cfg.psd_tol):
        raise McIteError(f"negative virtual-cooling probability {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    e = h_int.evals
    D = e.size
    obs = {"energy": np.diag(e).astype(complex)}
    for name, x in (observables or {}).items():
        obs[name] = h_int.evecs.conj().T @ np.asarray(x) @ h_int.evecs
    diag = {name: np.real(np.diag(x)) for name, x in obs.items()}

    p_star = float(p.max())
    top = p >= p_star * (1 - rel_tol)
    x_deg = int(np.count_nonzero(top))
    rest = p[~top]
    p_second = float(rest.max()) if rest.size else 0.0
    ratio = p_second / p_star if p_star > 0 else 0.0
    rate = -np.log(ratio) if ratio > 0 else np.inf

    ns = np.arange(1, n_max + 1)
    logp = np.full_like(p, -np.inf)
    logp[p > 0] = np.log(p[p > 0])
    log_trace = np.empty(n_max)
    top_prob = np.empty(n_max)
    estimates = {name: np.empty(n_max) for name in obs}
    for t, n in enumerate(ns):
        lw = n * logp
        shift = lw.max()
        w = np.exp(lw - shift)
        z = w.sum()
        log_trace[t] = shift + np.log(z)
        top_prob[t] = np.exp(n * np.log(p_star) - log_trace[t])
        for name, dx in diag.items():
            estimates[name][t] = float(np.dot(w, dx) / z)
    with np.errstate(over="ignore"):
        lower = (1.0 / x_deg) / (1.0 + ((D - x_deg) / x_deg) * ratio**ns)
    return VirtualCoolResult(
        rho=virtual_cool_state(h_int, eps),
        probs=p,
        energies=e.copy(),
        n_values=ns,
        estimates=estimates,
        log_trace=log_trace,
        top_prob=top_prob,
        lower_bound=lower,
        p_star=p_star,
        p_second=p_second,
        degeneracy=x_deg,
        rate=float(rate),
    )


def brute_force_virtual_cool_oracle(h_int: HamiltonianSpec, eps: float) -> np.ndarray:
    """Simulate one U gate on two copies, each a maximally entangled pair of
    internal systems, with ``H = H_int (x) 1``; return the reduced state of
    the first internal system of the first copy."""
    D = h_int.dim
    if D**4 > get_config().max_density_dim:
        raise SizeError(f"internal dimension {D} too large for the dense oracle")
    h = models.explicit(np.kron(h_int.matrix, np.eye(D)))
    omega = models.initial_state(InitialStateSpec("max_entangled", D=D))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u = gates.gate_U(h, eps)
    psi = u @ np.kron(omega, omega)
    return qcore.reduced_state(psi, [D, D, D, D], [0])
