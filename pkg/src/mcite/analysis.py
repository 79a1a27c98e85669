"""Error bounds, gate error-law measurements, step-size optimization and fits."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import engines, gates, models, qcore
from .models import HamiltonianSpec, InitialStateSpec
from .numerics import ContractError

DEFAULT_SCALING_EPS = tuple(np.logspace(-3, -1, 9))


def energy_moments(h: HamiltonianSpec, phi: np.ndarray) -> np.ndarray:
    """Probabilities ``|<E_k|phi>|^2`` in the eigenbasis of ``h``."""
    q = np.abs(h.evecs.conj().T @ np.asarray(phi).reshape(-1)) ** 2
    return q / q.sum()


def sigma_K2(h: HamiltonianSpec, phi: np.ndarray) -> float:
    """Standard deviation of ``K^2`` in ``phi (x) phi``, with ``K = H (x) 1 - 1 (x) H``.

    ``K`` is diagonal in the product eigenbasis with entries ``E_a - E_b``,
    so the moments reduce to double sums over the energy distribution.
    """
    q = energy_moments(h, phi)
    e = h.evals
    diff2 = (e[:, None] - e[None, :]) ** 2
    w = np.outer(q, q)
    m2 = float(np.sum(w * diff2))
    m4 = float(np.sum(w * diff2**2))
    return math.sqrt(max(m4 - m2 * m2, 0.0))


def sigma_K2_dense(h: HamiltonianSpec, phi: np.ndarray) -> float:
    """Same quantity evaluated with explicit two-copy matrices."""
    k = gates.relative_hamiltonian(h)
    k2 = k @ k
    pp = np.kron(phi, phi)
    m2 = float(np.real(np.vdot(pp, k2 @ pp)))
    m4 = float(np.real(np.vdot(pp, k2 @ (k2 @ pp))))
    return math.sqrt(max(m4 - m2 * m2, 0.0))


def b_K(h: HamiltonianSpec) -> float:
    """``||K||^2 + ||K^2||``; both norms equal powers of the spectral width."""
    width = float(h.evals[-1] - h.evals[0])
    return 2.0 * width**2


@dataclass(frozen=True)
class BoundReport:
    beta: float
    n: int
    eps: float
    h_norm: float
    sigma_star: float
    b_k: float
    bound: float
    measured: float
    sigmas: tuple[float, ...] = field(repr=False, default=())

    @property
    def slack(self) -> float:
        return self.bound - self.measured

    @property
    def asserted(self) -> bool:
        """The leading-order bound is only claimed for ``eps <= 0.1``."""
        return self.eps <= 0.1

    @property
    def holds(self) -> bool:
        return self.slack >= -1e-8


def tree_bound(
    h: HamiltonianSpec,
    init: InitialStateSpec | np.ndarray,
    beta: float,
    n: int,
    *,
    sign: int = 1,
) -> BoundReport:
    """Compare the tree-circuit trace-norm error with its first-order bound.

    ``bound = beta sigma_* / (2 n ||H||) (exp(4 beta ||H||) - 1)`` where
    ``sigma_*`` is the largest ``sigma(K^2)`` along the exact trajectory
    ``phi_{l eps}``, ``l = 0..n-1``. ``measured`` is the full trace norm
    ``||phi_beta - rho_n||_1``.
    """
    if n < 1 or beta <= 0:
        raise ContractError("tree_bound needs n >= 1 and beta > 0")
    phi0 = engines._init_vector(init, h)
    eps = beta / n
    sigmas = tuple(sigma_K2(h, models.imaginary_evolved(h, phi0, sign * l * eps)) for l in range(n))
    s_star = max(sigmas)
    hn = h.norm
    if hn == 0:
        bound = 0.0
    else:
        bound = beta * s_star / (2 * n * hn) * math.expm1(4 * beta * hn)
    run = engines.run_tree_recurrence(h, phi0, eps, n, sign=sign)
    exact = qcore.pure_density(models.imaginary_evolved(h, phi0, sign * beta))
    measured = qcore.trace_norm(exact - run.rho1)
    return BoundReport(beta, n, eps, hn, s_star, b_K(h), bound, measured, sigmas)


@dataclass(frozen=True)
class EpsOptimum:
    eps: float
    value: float
    grid: tuple[tuple[float, float], ...]
    iterations: int
    at_boundary: bool


_INVPHI = (math.sqrt(5) - 1) / 2


def optimize_eps(
    fn: Callable[[float], float],
    eps_lo: float,
    eps_hi: float,
    tol: float = 1e-3,
    n_grid: int = 25,
    max_iter: int = 100,
    flat_rtol: float = 1e-12,
) -> EpsOptimum:
    """Minimize ``fn`` over ``[eps_lo, eps_hi]``.

    A log-spaced coarse grid brackets the minimum, then golden-section search
    refines it to relative width ``tol``. A grid minimum on either end is
    returned as is with ``at_boundary`` set, and so is ``eps_lo`` when the
    whole grid agrees to ``flat_rtol``. Otherwise the result is never worse
    than the best grid point.
    """
    if not 0 < eps_lo < eps_hi:
        raise ContractError("need 0 < eps_lo < eps_hi")
    xs = np.geomspace(eps_lo, eps_hi, n_grid)
    ys = [float(fn(float(x))) for x in xs]
    grid = tuple(zip(map(float, xs), ys))
    finite = [y if np.isfinite(y) else np.inf for y in ys]
    k = int(np.argmin(finite))
    span = max(finite) - finite[k]
    if np.isfinite(span) and span <= flat_rtol * max(1.0, abs(finite[k])):
        # flat up to round-off: prefer the gentlest step
        return EpsOptimum(float(xs[0]), finite[0], grid, 0, True)
    if k == 0 or k == n_grid - 1:
        return EpsOptimum(float(xs[k]), finite[k], grid, 0, True)

    a, b = float(xs[k - 1]), float(xs[k + 1])
    best_x, best_y = float(xs[k]), finite[k]
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = float(fn(c)), float(fn(d))
    it = 0
    while (b - a) > tol * best_x and it < max_iter:
        it += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = float(fn(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = float(fn(d))
        for x, y in ((c, fc), (d, fd)):
            if y < best_y:
                best_x, best_y = x, y
    return EpsOptimum(best_x, best_y, grid, it, False)


def _ket(h: HamiltonianSpec, phi0: np.ndarray, cool: float, real_time: float = 0.0) -> np.ndarray:
    psi = models.imaginary_evolved(h, phi0, cool)
    if real_time:
        psi = h.real_time(real_time) @ psi
    return psi


def gate_error(h: HamiltonianSpec, phi0: np.ndarray, kind: str, eps: float, sign: int = 1) -> tuple[float, float]:
    """Two-copy and first-copy trace distances of one gate from its ideal target.

    Targets: U -> (cooled, heated); V -> the same with ``eps`` real time on
    both copies; W -> (heated, cooled with ``sqrt(eps)`` real time).
    """
    kind = kind.upper()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        op = gates.two_copy_gate(kind, h, eps, sign)
    if kind == "U":
        a, b = _ket(h, phi0, sign * eps), _ket(h, phi0, -sign * eps)
    elif kind == "V":
        a, b = _ket(h, phi0, sign * eps, eps), _ket(h, phi0, -sign * eps, eps)
    else:
        a, b = _ket(h, phi0, -eps), _ket(h, phi0, eps, math.sqrt(eps))
    out = op @ np.kron(phi0, phi0)
    two = qcore.pure_trace_distance(np.kron(a, b), out)
    d = h.dim
    first = qcore.trace_distance(qcore.reduced_state(out, [d, d], [0]), qcore.pure_density(a))
    return two, first


@dataclass(frozen=True)
class ScalingReport:
    kind: str
    eps: tuple[float, ...]
    distance: tuple[float, ...]
    first_copy: tuple[float, ...]
    slope: float
    coefficient: float
    sigma: float

    def rows(self) -> list[dict]:
        return [
            {
                "kind": self.kind,
                "eps": e,
                "distance": dist,
                "first_copy_distance": f,
                "distance_over_eps2": dist / e**2,
                "slope": self.slope,
                "richardson_coefficient": self.coefficient,
                "sigma_K2": self.sigma,
            }
            for e, dist, f in zip(self.eps, self.distance, self.first_copy)
        ]


def loglog_slope(x, y) -> float:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.any(y <= 0):
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def richardson(eps, values) -> float:
    """Linear extrapolation of ``values(eps)`` to ``eps = 0`` from the two smallest points."""
    order = np.argsort(eps)
    e1, e2 = float(eps[order[0]]), float(eps[order[1]])
    f1, f2 = float(values[order[0]]), float(values[order[1]])
    return (e2 * f1 - e1 * f2) / (e2 - e1)


def gate_scaling_report(
    h: HamiltonianSpec,
    init: InitialStateSpec | np.ndarray,
    gate_kind: str,
    eps_grid=DEFAULT_SCALING_EPS,
    sign: int = 1,
) -> ScalingReport:
    kind = gate_kind.upper()
    phi0 = engines._init_vector(init, h)
    eps = np.asarray(eps_grid, float)
    pairs = [gate_error(h, phi0, kind, float(e), sign) for e in eps]
    dist = np.array([p[0] for p in pairs])
    first = np.array([p[1] for p in pairs])
    slope = loglog_slope(eps, dist)
    if kind in ("U", "V"):
        coeff = richardson(eps, dist / eps**2)
        sigma = sigma_K2(h, phi0)
    else:
        coeff = sigma = float("nan")
    return ScalingReport(kind, tuple(map(float, eps)), tuple(map(float, dist)), tuple(map(float, first)), slope, coeff, sigma)


def fit_decay_rate(ns, values) -> float:
    """Rate ``a`` of ``values ~ A exp(-a n)`` by least squares on ``log(values)``."""
    ns = np.asarray(ns, float)
    v = np.asarray(values, float)
    mask = v > 0
    if np.count_nonzero(mask) < 2:
        return float("nan")
    return float(-np.polyfit(ns[mask], np.log(v[mask]), 1)[0])
