"""Dense complex linear algebra kernels.

Matrices, state vectors and density operators are plain ``numpy`` arrays.
Every matrix exponential in the package goes through :func:`herm_exp`, i.e.
through a Hermitian eigendecomposition.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .numerics import ContractError, ShapeError, SizeError, get_config

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def is_hermitian(a: np.ndarray, tol: float | None = None) -> bool:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    tol = get_config().hermitian_tol if tol is None else tol
    scale = max(np.max(np.abs(a)), 1.0) if a.size else 1.0
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol * scale)


def require_hermitian(a: np.ndarray, name: str = "matrix") -> None:
    if not is_hermitian(a):
        raise ContractError(f"{name} is not Hermitian")


def kron(a: np.ndarray, b: np.ndarray, cap: int | None = None) -> np.ndarray:
    cap = get_config().max_state_dim if cap is None else cap
    a = np.atleast_2d(a) if np.ndim(a) != 1 else np.asarray(a)
    b = np.atleast_2d(b) if np.ndim(b) != 1 else np.asarray(b)
    size = a.shape[0] * b.shape[0]
    if size > cap:
        raise SizeError(f"Kronecker product dimension {size} exceeds cap {cap}")
    return np.kron(a, b)


def kron_all(factors: Sequence[np.ndarray], cap: int | None = None) -> np.ndarray:
    out = np.asarray(factors[0])
    for f in factors[1:]:
        out = kron(out, f, cap=cap)
    return out


def eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition with the Hermiticity contract enforced."""
    require_hermitian(h, "generator")
    h = 0.5 * (h + h.conj().T)
    return np.linalg.eigh(h)


def exp_from_eig(evals: np.ndarray, evecs: np.ndarray, scale: complex) -> np.ndarray:
    """``Q exp(scale * diag(evals)) Q^dagger``."""
    return (evecs * np.exp(scale * evals)) @ evecs.conj().T


def herm_exp(h: np.ndarray, scale: complex, eig: tuple[np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    """Return ``exp(scale * h)`` for Hermitian ``h``.

    ``eig`` may carry a cached ``(evals, evecs)`` pair of ``h``.
    """
    h = np.asarray(h)
    if eig is None:
        eig = eigh(h)
    out = exp_from_eig(eig[0], eig[1], scale)
    if np.real(scale) == 0:
        tol = get_config().unitary_tol
        resid = np.max(np.abs(out.conj().T @ out - np.eye(out.shape[0])), initial=0.0)
        if resid > tol:
            raise ContractError(f"exponential is not unitary (residual {resid:.2e})")
    return out


def normalize(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ContractError("cannot normalize the zero vector")
    return psi / nrm


def pure_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem whose index is not in ``keep``.

    The kept subsystems appear in increasing index order.
    """
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ShapeError(f"dims {dims} do not match operator shape {rho.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ShapeError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = rho.reshape(dims + dims)
    # row index i, column index i+n; traced systems share an index
    labels = list(range(2 * n))
    for i in range(n):
        if i not in keep:
            labels[n + i] = labels[i]
    out_labels = [labels[i] for i in keep] + [labels[n + i] for i in keep]
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.einsum(t, labels, out_labels).reshape(d_keep, d_keep)


def reduced_state(psi: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density operator of a pure state without forming ``|psi><psi|``."""
    dims = [int(d) for d in dims]
    psi = np.asarray(psi).reshape(dims)
    keep = sorted(set(int(k) for k in keep))
    rest = [i for i in range(len(dims)) if i not in keep]
    m = np.transpose(psi, keep + rest).reshape(int(np.prod([dims[i] for i in keep])), -1)
    return m @ m.conj().T


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of ``a - b``."""
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = a - b
    require_hermitian(diff, "difference")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def trace_norm(a: np.ndarray) -> float:
    return 2.0 * trace_distance(a, np.zeros_like(a))


def pure_trace_distance(psi: np.ndarray, phi: np.ndarray) -> float:
    """Trace distance between two normalized pure states, ``sqrt(1 - |<psi|phi>|^2)``.

    Computed from the orthogonal residual, so it stays accurate when the
    distance is far below ``sqrt(machine eps)``.
    """
    psi = np.asarray(psi).reshape(-1)
    phi = np.asarray(phi).reshape(-1)
    resid = phi - np.vdot(psi, phi) * psi
    return float(np.linalg.norm(resid))


def fidelity_pure(target: np.ndarray, rho: np.ndarray) -> float:
    target = np.asarray(target).reshape(-1)
    if rho.shape != (target.size, target.size):
        raise ShapeError(f"target dim {target.size} vs operator shape {rho.shape}")
    if abs(np.linalg.norm(target) - 1) > get_config().norm_tol:
        raise ContractError("target state is not normalized")
    f = float(np.real(np.vdot(target, rho @ target)))
    return min(max(f, 0.0), 1.0)


def op_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if is_hermitian(a):
        return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (a + a.conj().T)))))
    return float(np.linalg.norm(a, 2))


def check_density(rho: np.ndarray, trace: float = 1.0) -> None:
    """Raise ContractError unless ``rho`` is Hermitian, PSD and of the given trace."""
    cfg = get_config()
    require_hermitian(rho, "density operator")
    tr = float(np.real(np.trace(rho)))
    if abs(tr - trace) > cfg.trace_tol:
        raise ContractError(f"trace {tr} differs from {trace}")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if lam[0] < -cfg.psd_tol:
        raise ContractError(f"negative eigenvalue {lam[0]:.3e}")


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.einsum("ij,ji->", rho, rho)))
