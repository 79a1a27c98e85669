"""Bookkeeping-vector semantics and schedule builders (tree, hedge, single layer).

Copies are 0-based in memory and 1-based in the text format. A bookkeeping
label is a complex integer: the real part counts imaginary-time steps of
``eps`` (positive = moved in the schedule's cooling direction), the imaginary
part counts real-time steps of ``eps``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

from .numerics import ContractError, SizeError, get_config


@dataclass(frozen=True)
class Gate:
    kind: str  # "U" or "V"
    i: int
    j: int

    def __post_init__(self):
        if self.kind not in ("U", "V"):
            raise ContractError(f"schedules hold U or V gates, got {self.kind!r}")
        if self.i == self.j or min(self.i, self.j) < 0:
            raise ContractError(f"invalid copy pair ({self.i}, {self.j})")


@dataclass(frozen=True)
class Pad:
    """Forward real-time evolution of one copy by ``steps * eps``."""

    copy: int
    steps: int = 1


Step = Union[Gate, Pad]


@dataclass(frozen=True)
class Schedule:
    family: str
    n: int
    m: int
    steps: tuple[Step, ...]
    sign: int = 1
    # indices into `steps` where each layer starts; empty for unlayered schedules
    layer_starts: tuple[int, ...] = ()

    @property
    def gates(self) -> list[Gate]:
        return [s for s in self.steps if isinstance(s, Gate)]

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    @property
    def n_padding(self) -> int:
        return sum(s.steps for s in self.steps if isinstance(s, Pad))

    @property
    def layered(self) -> bool:
        return bool(self.layer_starts)

    def layers(self) -> list[tuple[Step, ...]]:
        if not self.layered:
            return [self.steps]
        bounds = list(self.layer_starts) + [len(self.steps)]
        return [self.steps[a:b] for a, b in zip(bounds[:-1], bounds[1:])]

    def labels(self) -> list[complex]:
        """Final bookkeeping vector."""
        c = [0j] * self.m
        for s in self.steps:
            apply_step(c, s)
        return c


def apply_step(c: list[complex], step: Step) -> None:
    """Update a bookkeeping vector in place."""
    if isinstance(step, Pad):
        c[step.copy] += 1j * step.steps
    elif step.kind == "U":
        c[step.i] += 1
        c[step.j] -= 1
    else:
        # V adds eps of real time to both copies
        c[step.i] += 1 + 1j
        c[step.j] += -1 + 1j


def potential(c: Iterable[complex]) -> int:
    return int(round(sum(z.real**2 for z in c)))


def _check_n(n: int) -> None:
    if n < 1:
        raise ContractError("n must be at least 1")
    if n > get_config().max_schedule_n:
        raise SizeError(f"n={n} exceeds schedule cap {get_config().max_schedule_n}")


def _from_layers(family: str, n: int, m: int, layers: list[list[tuple[int, int]]], sign: int) -> Schedule:
    steps: list[Step] = []
    starts: list[int] = []
    for layer in layers:
        starts.append(len(steps))
        steps.extend(Gate("U", i, j) for i, j in layer)
    return Schedule(family, n, m, tuple(steps), sign, tuple(starts))


def tree_layers(n: int) -> list[list[tuple[int, int]]]:
    """0-based gate pairs of each tree layer ``l = 1..n``."""
    m = 2**n
    return [
        [(2**l * i, 2**l * i + 2 ** (l - 1)) for i in range(m // 2**l)]
        for l in range(1, n + 1)
    ]


def build_tree(n: int, sign: int = 1) -> Schedule:
    _check_n(n)
    return _from_layers("tree", n, 2**n, tree_layers(n), sign)


def hedge_layer(n: int, k: int, p: int) -> list[tuple[int, int]]:
    """Layer ``L^k_p`` on ``2n`` copies, 0-based pairs in canonical order."""
    v = list(range(k, p + 1)) + list(range(2 * n - p + 1, 2 * n - k + 2))
    return [(v[2 * t] - 1, v[2 * t + 1] - 1) for t in range(p - k + 1)]


def hedge_layers(n: int) -> list[list[tuple[int, int]]]:
    layers = []
    for i in range(1, n + 1):
        ks = list(range(i, 0, -1)) + list(range(2, i + 1))
        layers.extend(hedge_layer(n, k, i) for k in ks)
    return layers


def build_hedge(n: int, sign: int = 1) -> Schedule:
    _check_n(n)
    return _from_layers("hedge", n, 2 * n, hedge_layers(n), sign)


def build_single_layer(n: int, sign: int = 1) -> Schedule:
    if n < 1:
        raise ContractError("n must be at least 1")
    return _from_layers("single_layer", n, 2 * n, [[(2 * k, 2 * k + 1) for k in range(n)]], sign)


def build(family: str, n: int, sign: int = 1) -> Schedule:
    builders = {"tree": build_tree, "hedge": build_hedge, "single_layer": build_single_layer}
    if family not in builders:
        raise ContractError(f"unknown schedule family {family!r}")
    return builders[family](n, sign)


def expected_gate_count(family: str, n: int) -> int:
    if family == "tree":
        return 2**n - 1
    if family == "hedge":
        return n * (n + 1) * (2 * n + 1) // 6
    if family == "single_layer":
        return n
    raise ContractError(f"no gate-count formula for family {family!r}")


@dataclass
class Certificate:
    ok: bool
    n_gates: int
    final_labels: list[complex]
    potential: int
    violations: list[tuple[int, str]] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.potential == 2 * self.n_gates


def validate(s: Schedule) -> Certificate:
    """Replay the bookkeeping rules and collect every violation.

    Checks: equal labels on each gate's pair (including real-time parts),
    potential increment of exactly 2 per gate, ``M = S(c_final) / 2``, the
    family gate-count formula and the first copy ending at label ``n``.
    """
    c = [0j] * s.m
    violations: list[tuple[int, str]] = []
    for idx, step in enumerate(s.steps):
        copies = (step.copy,) if isinstance(step, Pad) else (step.i, step.j)
        if any(k >= s.m for k in copies):
            violations.append((idx, f"copy index out of range for {s.m} copies"))
            continue
        if isinstance(step, Gate):
            if c[step.i].real != c[step.j].real:
                violations.append((idx, f"unequal labels {c[step.i]} vs {c[step.j]} on ({step.i + 1}, {step.j + 1})"))
            elif c[step.i].imag != c[step.j].imag:
                violations.append((idx, f"unequal real-time labels {c[step.i]} vs {c[step.j]} on ({step.i + 1}, {step.j + 1})"))
            before = c[step.i].real ** 2 + c[step.j].real ** 2
            apply_step(c, step)
            gain = int(round(c[step.i].real ** 2 + c[step.j].real ** 2 - before))
            if gain != 2:
                violations.append((idx, f"potential increment {gain} != 2"))
        else:
            apply_step(c, step)
    n_gates = s.n_gates
    pot = potential(c)
    if pot != 2 * n_gates:
        violations.append((len(s.steps), f"gate count {n_gates} is not S(c_final)/2 = {pot / 2}"))
    if s.family in ("tree", "hedge", "single_layer"):
        want = expected_gate_count(s.family, s.n)
        if n_gates != want:
            violations.append((len(s.steps), f"{s.family} gate count {n_gates} != {want}"))
        first = 1 if s.family == "single_layer" else s.n
        if s.m and c[0].real != first:
            violations.append((len(s.steps), f"first copy label {c[0].real} != {first}"))
    return Certificate(not violations, n_gates, c, pot, violations)


def to_V_schedule(s: Schedule) -> Schedule:
    """Replace U by V and pad every copy idle in a layer by one real-time step."""
    if not s.layered:
        raise ContractError("V conversion needs a layered schedule")
    steps: list[Step] = []
    starts: list[int] = []
    for layer in s.layers():
        starts.append(len(steps))
        busy = set()
        for step in layer:
            if isinstance(step, Gate):
                steps.append(Gate("V", step.i, step.j))
                busy.update((step.i, step.j))
            else:
                steps.append(step)
        steps.extend(Pad(k, 1) for k in range(s.m) if k not in busy)
    return Schedule(s.family, s.n, s.m, tuple(steps), s.sign, tuple(starts))


def to_text(s: Schedule) -> str:
    lines = [f"{s.family} {s.n} {s.m} {s.sign}"]
    starts = set(s.layer_starts)
    for idx, step in enumerate(s.steps):
        if idx in starts:
            lines.append("l")
        if isinstance(step, Gate):
            lines.append(f"g {step.kind} {step.i + 1} {step.j + 1}")
        else:
            lines.append(f"p {step.copy + 1} {step.steps}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Schedule:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 4:
        raise ContractError("schedule header must be 'family n m_copies sign'")
    family, n, m, sign = rows[0][0], int(rows[0][1]), int(rows[0][2]), int(rows[0][3])
    steps: list[Step] = []
    starts: list[int] = []
    for row in rows[1:]:
        tag = row[0]
        if tag == "l" and len(row) == 1:
            starts.append(len(steps))
        elif tag == "g" and len(row) == 4:
            steps.append(Gate(row[1].upper(), int(row[2]) - 1, int(row[3]) - 1))
        elif tag == "p" and len(row) == 3:
            steps.append(Pad(int(row[1]) - 1, int(row[2])))
        else:
            raise ContractError(f"malformed schedule line: {' '.join(row)!r}")
    return Schedule(family, n, m, tuple(steps), sign, tuple(starts))


def causal_cone(s: Schedule, keep: int = 0) -> Schedule:
    """Drop steps that cannot influence the reduced state of copy ``keep``."""
    relevant = {keep}
    kept: list[bool] = []
    for step in reversed(s.steps):
        copies = {step.copy} if isinstance(step, Pad) else {step.i, step.j}
        hit = bool(copies & relevant)
        if hit and isinstance(step, Gate):
            relevant |= copies
        kept.append(hit)
    kept.reverse()
    steps = tuple(st for st, k in zip(s.steps, kept) if k)
    return Schedule(s.family, s.n, s.m, steps, s.sign, ())
