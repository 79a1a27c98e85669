"""Command-line entry point.

Every subcommand reads an optional ``--config`` file, applies flag overrides,
validates the result and then runs. Exit status: 0 on success, 2 when
validation fails, 3 when a size cap is exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields

from . import compiler, sweeps
from .config import ConfigError, SweepConfig, load
from .numerics import ContractError, SizeError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CAP = 3

SWEEPS = {
    "gate-scaling": ("gate_scaling", sweeps.gate_scaling),
    "tree-run": ("tree_run", lambda cfg: sweeps.protocol_runs(cfg, "tree")),
    "hedge-run": ("hedge_run", lambda cfg: sweeps.protocol_runs(cfg, "hedge")),
    "bound-check": ("bound_check", sweeps.bound_check),
    "fig3": ("fig3", sweeps.figure3_sweep),
    "fig4": ("fig4", sweeps.figure4_sweep),
    "fig5": ("fig5", sweeps.figure5_sweep),
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", help="output directory for CSV/JSON files (default: CSV to stdout)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
    group = p.add_argument_group("config overrides")
    for f in fields(SweepConfig):
        group.add_argument(_flag(f.name), dest=f"cfg_{f.name}", metavar="VALUE", help=f"{f.type}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcite", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SWEEPS:
        _add_common(sub.add_parser(name, allow_abbrev=False))
    sched = sub.add_parser("schedule", allow_abbrev=False, help="print and validate a schedule")
    _add_common(sched)
    sched.add_argument("--file", help="validate a schedule text file instead of building one")
    sched.add_argument("--n", type=int, help="schedule size (default: largest of n_values)")
    return parser


def resolve_config(args: argparse.Namespace) -> SweepConfig:
    base = load(args.config) if args.config else SweepConfig()
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    for f in fields(SweepConfig):
        value = getattr(args, f"cfg_{f.name}", None)
        if value is not None:
            overrides[f.name] = value
    return SweepConfig.from_strings(overrides, base=base)


def _run_schedule(args, cfg: SweepConfig) -> int:
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            s = compiler.from_text(fh.read())
    else:
        s = compiler.build(cfg.family, args.n or max(cfg.n_values), cfg.sign)
        if cfg.gate.upper() == "V":
            s = compiler.to_V_schedule(s)
    cert = compiler.validate(s)
    text = compiler.to_text(s)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"{s.family}_n{s.n}.schedule"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    labels = " ".join(f"{c.real:g}{c.imag:+g}i" for c in sorted(cert.final_labels, key=lambda c: (c.real, c.imag)))
    print(f"# gates={cert.n_gates} padding={s.n_padding} potential={cert.potential} optimal={cert.optimal}", file=sys.stderr)
    print(f"# final labels: {labels}", file=sys.stderr)
    for step, msg in cert.violations:
        print(f"# violation at step {step}: {msg}", file=sys.stderr)
    print(f"# valid={cert.ok}", file=sys.stderr)
    return EXIT_OK if cert.ok else EXIT_INVALID


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "schedule":
            return _run_schedule(args, cfg)
        name, fn = SWEEPS[args.command]
        tables = fn(cfg)
        if args.out:
            for path in sweeps.write_outputs(args.out, name, tables, cfg):
                print(path, file=sys.stderr)
        else:
            for table, rows in tables.items():
                if len(tables) > 1:
                    sys.stdout.write(f"# {table}\n")
                sys.stdout.write(sweeps.rows_to_csv(rows))
        if args.command == "bound-check":
            broken = [r for r in tables["bound_check"] if r["asserted"] and not r["holds"]]
            if broken:
                print(f"bound violated at {len(broken)} point(s) with eps <= 0.1", file=sys.stderr)
                return EXIT_INVALID
        return EXIT_OK
    except SizeError as exc:
        print(f"size cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ContractError, FileNotFoundError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
