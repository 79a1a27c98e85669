"""SWAP operator, the two-copy gates U, V, W and their multi-copy embedding.

All gates act on ``copy_i (x) copy_j`` with ``copy_i`` the most significant
factor. With ``sign=+1`` the gates U and V cool ``copy_i`` (approximate
``exp(-eps H)``) and heat ``copy_j``.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import qcore
from .models import HamiltonianSpec
from .numerics import ContractError, ShapeError, SizeError, get_config


def swap_op(d: int) -> np.ndarray:
    if d < 1:
        raise ContractError("copy dimension must be positive")
    s = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            s[b * d + a, a * d + b] = 1
    return s


def swap_rotation(d: int, sign: int = 1) -> np.ndarray:
    """``exp(i sign pi/4 S) = (1 + i sign S)/sqrt(2)``, exact because ``S^2 = 1``."""
    return (np.eye(d * d) + 1j * sign * swap_op(d)) / np.sqrt(2)


def relative_hamiltonian(h: HamiltonianSpec) -> np.ndarray:
    """``K = H (x) 1 - 1 (x) H``."""
    eye = np.eye(h.dim)
    return np.kron(h.matrix, eye) - np.kron(eye, h.matrix)


def _check_eps(eps: float) -> None:
    cfg = get_config()
    if eps < 0:
        raise ContractError(f"eps={eps} must be non-negative")
    if eps > cfg.eps_max:
        raise ContractError(f"eps={eps} exceeds eps_max={cfg.eps_max}")
    if eps > cfg.eps_warn:
        warnings.warn(f"eps={eps} is outside the perturbative regime (> {cfg.eps_warn})", stacklevel=3)


def _check_sign(sign: int) -> None:
    if sign not in (1, -1):
        raise ContractError(f"sign must be +1 or -1, got {sign}")


def gate_U(h: HamiltonianSpec, eps: float, sign: int = 1) -> np.ndarray:
    """``exp(i pi/4 S) exp(-i sign eps K) exp(-i pi/4 S)``."""
    _check_eps(eps)
    _check_sign(sign)
    d = h.dim
    r = swap_rotation(d)
    # K is diagonal in the product eigenbasis, so exp(-i t K) factorizes
    inner = np.kron(h.real_time(sign * eps), h.real_time(-sign * eps))
    return r @ inner @ r.conj().T


def gate_U_closed(h: HamiltonianSpec, eps: float, sign: int = 1) -> np.ndarray:
    """``exp(-sign eps K S)`` via the Hermitian generator ``i K S``."""
    _check_sign(sign)
    ks = relative_hamiltonian(h) @ swap_op(h.dim)
    return qcore.herm_exp(1j * ks, 1j * sign * eps)


def gate_V(h: HamiltonianSpec, eps: float, sign: int = 1) -> np.ndarray:
    """``exp(i sign pi/4 S) exp(-2 i eps H (x) 1) exp(-i sign pi/4 S)``.

    Equals ``(exp(-i eps H) (x) exp(-i eps H)) U`` exactly: both copies pick up
    ``eps`` of forward real time.
    """
    _check_eps(eps)
    _check_sign(sign)
    d = h.dim
    r = swap_rotation(d, sign)
    inner = np.kron(h.real_time(2 * eps), np.eye(d))
    return r @ inner @ r.conj().T


def gate_W(h: HamiltonianSpec, eps: float) -> np.ndarray:
    """``exp(i sqrt(eps) S) exp(-i sqrt(eps) 1 (x) H)``; heats copy_i, cools copy_j."""
    _check_eps(eps)
    d = h.dim
    t = np.sqrt(eps)
    rot = np.cos(t) * np.eye(d * d) + 1j * np.sin(t) * swap_op(d)
    return rot @ np.kron(np.eye(d), h.real_time(t))


def two_copy_gate(kind: str, h: HamiltonianSpec, eps: float, sign: int = 1) -> np.ndarray:
    kind = kind.upper()
    if kind == "U":
        return gate_U(h, eps, sign)
    if kind == "V":
        return gate_V(h, eps, sign)
    if kind == "W":
        if sign != 1:
            raise ContractError("W has no direction flag")
        return gate_W(h, eps)
    raise ContractError(f"unknown gate kind {kind!r}")


def embed_pair(op: np.ndarray, m: int, i: int, j: int) -> np.ndarray:
    """Dense ``d^m x d^m`` matrix acting as ``op`` on copies ``(i, j)``.

    Intended for small registers and as a test oracle; simulations use
    :func:`apply_pair`.
    """
    d = _pair_dim(op)
    _check_pair(m, i, j)
    total = d**m
    if total > get_config().max_density_dim:
        raise SizeError(f"dense embedding of dimension {total} exceeds cap")
    rest = total // (d * d)
    full = np.kron(op, np.eye(rest)).reshape([d] * (2 * m))
    # axes of `full` are (i, j, others...) for rows then columns; move to natural order
    order = [i, j] + [k for k in range(m) if k not in (i, j)]
    inv = np.argsort(order)
    full = full.transpose(list(inv) + [m + a for a in inv])
    return full.reshape(total, total)


def _pair_dim(op: np.ndarray) -> int:
    d = int(round(np.sqrt(op.shape[0])))
    if op.shape != (d * d, d * d):
        raise ShapeError(f"operator shape {op.shape} is not a two-copy operator")
    return d


def _check_pair(m: int, i: int, j: int) -> None:
    if not (0 <= i < m and 0 <= j < m) or i == j:
        raise ContractError(f"copy pair ({i}, {j}) invalid for {m} copies")


def apply_pair(psi: np.ndarray, op: np.ndarray, i: int, j: int) -> np.ndarray:
    """Apply a two-copy operator to copies ``(i, j)`` of a register tensor.

    ``psi`` has shape ``(d,) * m``. ``i > j`` is allowed and means the
    operator's first factor acts on copy ``i``. Returns a new array of the
    same shape; no ``d^m x d^m`` matrix is ever formed.
    """
    d = _pair_dim(op)
    m = psi.ndim
    _check_pair(m, i, j)
    if i > j:
        s = swap_op(d)
        op = s @ op @ s
        i, j = j, i
    a = d**i
    b = d ** (j - i - 1)
    c = d ** (m - j - 1)
    view = psi.reshape(a, d, b, d, c)
    # contract the operator's input axes with (copy_i, copy_j)
    res = np.tensordot(op.reshape(d, d, d, d), view, axes=([2, 3], [1, 3]))  # (p, q, a, b, c)
    return np.ascontiguousarray(res.transpose(2, 0, 3, 1, 4)).reshape(psi.shape)


def apply_single(psi: np.ndarray, op: np.ndarray, k: int) -> np.ndarray:
    """Apply a single-copy operator to copy ``k`` of a register tensor."""
    m = psi.ndim
    d = op.shape[0]
    view = psi.reshape(d**k, d, d ** (m - k - 1))
    return np.einsum("pr,arc->apc", op, view).reshape(psi.shape)


def cswap_synthesis(d: int, phi: float) -> np.ndarray:
    """``(Had (x) 1) CS (X_phi (x) 1) CS (Had (x) 1)`` on ancilla (x) copy (x) copy."""
    s = swap_op(d)
    eye = np.eye(d * d)
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    cs = np.kron(p0, eye) + np.kron(p1, s)
    x_phi = np.cos(phi) * np.eye(2) + 1j * np.sin(phi) * qcore.SIGMA_X
    had = np.kron(qcore.HADAMARD, eye)
    return had @ cs @ np.kron(x_phi, eye) @ cs @ had


def cswap_induced_map(d: int, phi: float) -> tuple[np.ndarray, float]:
    """Pair map induced for ancilla input/output ``|0>`` and the leaked norm into ``|1>``.

    The leak is the operator norm of the ``<1| . |0>`` block.
    """
    full = cswap_synthesis(d, phi)
    n = d * d
    induced = full[:n, :n]
    leak = qcore.op_norm(full[n:, :n])
    return induced, leak
