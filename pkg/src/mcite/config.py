"""Flat ``key = value`` sweep configuration.

One key per line, ``#`` starts a comment, lists are comma separated.
Unknown keys and malformed values raise :class:`ConfigError`. The same text
form is written next to every output so a run can be repeated exactly.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field, fields

from . import models
from .numerics import ContractError

THREADS_ENV = "MCITE_THREADS"

HAMILTONIANS = ("sigma_z", "ising")
INITS = ("plus_all", "overlap_mix", "basis_zero")
FAMILIES = ("tree", "hedge", "single_layer")


class ConfigError(ContractError):
    pass


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class SweepConfig:
    hamiltonian: str = "sigma_z"
    N: int = 3
    periodic: bool = True
    init: str = "plus_all"
    # overlap values for overlap_mix; the token "random" means 1/2^N
    p_values: list[str] = field(default_factory=lambda: ["random"])
    family: str = "hedge"
    gate: str = "U"
    sign: int = 1
    n_values: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    N_values: list[int] = field(default_factory=lambda: [2, 3, 4])
    eps: float = 0.0
    eps_values: list[float] = field(default_factory=lambda: [0.05, 0.1, 0.2])
    eps_lo: float = 0.01
    eps_hi: float = 1.0
    eps_grid: int = 25
    eps_tol: float = 1e-3
    betas: list[float] = field(default_factory=lambda: [0.2, 0.5])
    postselect: bool = False
    eps_factors: list[float] = field(default_factory=lambda: [0.19, 0.03])
    n_max: int = 200
    threshold: float = 0.05
    panels: list[str] = field(default_factory=lambda: ["a", "b", "c", "d"])
    gate_kinds: list[str] = field(default_factory=lambda: ["U", "V", "W"])
    threads: int = field(default_factory=_default_threads)

    def validate(self) -> "SweepConfig":
        if self.hamiltonian not in HAMILTONIANS:
            raise ConfigError(f"hamiltonian must be one of {HAMILTONIANS}")
        if self.init not in INITS:
            raise ConfigError(f"init must be one of {INITS}")
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}")
        if self.gate.upper() not in ("U", "V"):
            raise ConfigError("gate must be U or V")
        if self.sign not in (1, -1):
            raise ConfigError("sign must be 1 or -1")
        if not 0 < self.eps_lo < self.eps_hi:
            raise ConfigError("need 0 < eps_lo < eps_hi")
        if self.eps_grid < 3:
            raise ConfigError("eps_grid must be at least 3")
        if self.eps < 0:
            raise ConfigError("eps must be non-negative (0 means optimize)")
        if any(n < 1 for n in self.n_values):
            raise ConfigError("n_values must be positive")
        if any(n < 1 for n in self.N_values) or self.N < 1:
            raise ConfigError("N values must be positive")
        for p in self.p_values:
            if p != "random":
                try:
                    value = float(p)
                except ValueError:
                    raise ConfigError(f"bad overlap value {p!r}") from None
                if not 0 <= value <= 1:
                    raise ConfigError(f"overlap {p} outside [0, 1]")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        for k in self.gate_kinds:
            if k.upper() not in ("U", "V", "W"):
                raise ConfigError(f"unknown gate kind {k!r}")
        return self

    # construction helpers

    def hamiltonian_spec(self, N: int | None = None) -> models.HamiltonianSpec:
        if self.hamiltonian == "sigma_z":
            return models.sigma_z()
        return models.build_ising(self.N if N is None else N, self.periodic)

    def overlap(self, p: str, N: int) -> float:
        return 2.0**-N if p == "random" else float(p)

    def init_spec(self, p: float | None = None) -> models.InitialStateSpec:
        if self.init == "overlap_mix":
            if p is None:
                p = self.overlap(self.p_values[0], self.N)
            return models.InitialStateSpec("overlap_mix", p=p)
        return models.InitialStateSpec(self.init)

    # text round trip

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ",".join(_fmt(x) for x in v)
            else:
                v = _fmt(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SweepConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
        return cls.from_strings(values)

    @classmethod
    def from_strings(cls, values: dict[str, str], base: "SweepConfig | None" = None) -> "SweepConfig":
        cfg = dataclasses.replace(base) if base is not None else cls()
        types = {f.name: f.type for f in fields(cls)}
        for key, raw in values.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                setattr(cfg, key, _parse(types[key], raw))
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
        return cfg.validate()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(type_name: str, raw: str):
    raw = raw.strip()
    if type_name.startswith("list["):
        inner = type_name[5:-1]
        return [_parse(inner, part) for part in raw.split(",") if part.strip()]
    if type_name == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError("expected a boolean")
    if type_name == "int":
        return int(raw)
    if type_name == "float":
        return float(raw)
    return raw


def load(path: str | os.PathLike) -> SweepConfig:
    with open(path, encoding="utf-8") as fh:
        return SweepConfig.from_text(fh.read())
