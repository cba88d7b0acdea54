"""Command-line entry point: ``hooke-billiard {simulate,diagram,fomenko,verify}``."""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conic_geometry import BilliardTable
from .diagram import bifurcation_diagram, write_diagram_csv
from .dynamics import PhasePoint, simulate
from .errors import DomainError
from .foliation import fomenko_graph
from .integrability import caustics, constant_term, in_billiard_domain
from .io import write_trajectory_csv
from .sampling import DEFAULT_SEED
from .svg import diagram_svg, trajectory_svg
from .verification import PROFILES, run_verification

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFY_FAILED = 2


@dataclass
class RunConfig:
    command: str
    table: BilliardTable | None = None
    seed: int = DEFAULT_SEED
    options: dict = field(default_factory=dict)


def _finite(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    return name.strip(), _finite(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hooke-billiard",
        description="Elliptic billiard in a Hooke potential.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def table_args(p):
        p.add_argument("--a", type=_finite, required=True, help="major semi-axis squared")
        p.add_argument("--b", type=_finite, required=True, help="minor semi-axis squared")
        p.add_argument("--sigma", type=_finite, required=True, help="potential stiffness")

    p = sub.add_parser("simulate", help="integrate a trajectory and write a CSV")
    table_args(p)
    for name in ("x", "y", "vx", "vy"):
        p.add_argument(f"--{name}", type=_finite, required=True)
    p.add_argument("--bounces", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--svg", type=Path)

    p = sub.add_parser("diagram", help="sample the bifurcation diagram")
    table_args(p)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--svg", type=Path)

    p = sub.add_parser("fomenko", help="print the Fomenko graph at an energy")
    table_args(p)
    p.add_argument("--energy", type=_finite, required=True)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--dot", action="store_true")

    p = sub.add_parser("verify", help="run the property checks")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--fast", action="store_true", help="smaller samples for a quick run")
    p.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--profile", choices=sorted(PROFILES),
                   help="tolerance profile (default from HOOKE_BILLIARD_TOL_PROFILE)")
    p.add_argument("--json", action="store_true")
    p.add_argument("--timings", action="store_true", help="include wall times (not deterministic)")
    return parser


def parse_config(argv: list[str] | None = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "a", "b", "sigma", "seed")}
    table = BilliardTable(args.a, args.b, args.sigma) if hasattr(args, "a") else None
    return RunConfig(args.command, table, getattr(args, "seed", DEFAULT_SEED), opts)


def cmd_simulate(cfg: RunConfig, out) -> int:
    o, table = cfg.options, cfg.table
    if o["bounces"] < 0:
        raise ValueError("--bounces must be nonnegative")
    state = PhasePoint([o["x"], o["y"]], [o["vx"], o["vy"]])
    if not in_billiard_domain(table, state):
        c0 = float(constant_term(table, state.xi, state.v))
        where = "inside" if table.contains(state.xi) else "outside"
        raise DomainError(f"initial state not in billiard domain: c0={c0!r} (position {where} the table)")
    traj = simulate(table, state, o["bounces"])
    write_trajectory_csv(o["out"], traj)
    if o["svg"] is not None:
        pair = caustics(table, state)
        o["svg"].write_text(trajectory_svg(traj, (pair.lambda1, pair.lambda2)))
    print(f"wrote {o['bounces']} bounces to {o['out']}", file=out)
    return EXIT_OK


def cmd_diagram(cfg: RunConfig, out) -> int:
    o = cfg.options
    data = bifurcation_diagram(cfg.table, o["samples"], np.random.default_rng(cfg.seed))
    write_diagram_csv(o["out"], data)
    if o["svg"] is not None:
        o["svg"].write_text(diagram_svg(data))
    print(f"wrote {len(data.points)} samples to {o['out']}", file=out)
    return EXIT_OK


def cmd_fomenko(cfg: RunConfig, out) -> int:
    graph = fomenko_graph(cfg.table, cfg.options["energy"])
    if cfg.options["json"]:
        out.write(graph.to_json() + "\n")
    elif cfg.options["dot"]:
        out.write(graph.to_dot())
    else:
        out.write(graph.to_text())
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out) -> int:
    o = cfg.options
    report = run_verification(cfg.seed, fast=o["fast"], tolerances=dict(o["tol"]), profile=o["profile"])
    out.write(report.to_json(o["timings"]) + "\n" if o["json"] else report.render(o["timings"]))
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


COMMANDS = {
    "simulate": cmd_simulate,
    "diagram": cmd_diagram,
    "fomenko": cmd_fomenko,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        cfg = parse_config(argv)
        return COMMANDS[cfg.command](cfg, out)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_INVALID if exc.code else EXIT_OK
    except ValueError as exc:  # includes every BilliardError
        print(f"error: {exc}", file=err)
        return EXIT_INVALID


def main_entry() -> None:
    sys.exit(main())
