# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the pc-boundary-lab command line driver. Every subcommand
samples its configurations from --seed, runs one verification suite, renders
the result as a table and writes JSON and markdown reports to --out.

Exit codes: 0 every check passed, 1 a check failed or the run hit a LabError,
2 the configuration was rejected.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections import OrderedDict
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from pc_boundary_lab.algebra_common.grassmann import build_layout
from pc_boundary_lab.bfv_common.action import action_gradient_rows, cohomological_vf
from pc_boundary_lab.bfv_common.ledger import cancellation_ledger, ledger_values
from pc_boundary_lab.bfv_common.master import TOTAL, master_equation
from pc_boundary_lab.bfv_common.primed import change_variables_primed
from pc_boundary_lab.bfv_common.state import BFVState, bfv_layout, random_bfv_state, random_relabelling
from pc_boundary_lab.canonical_common.brackets import (
    gauge_invariance_check,
    random_configuration,
    verify_bracket_suite,
    verify_constraint_gradients,
)
from pc_boundary_lab.canonical_common.constraints import multiplier_layout
from pc_boundary_lab.fields_common import snapshot
from pc_boundary_lab.fields_common.field import Field
from pc_boundary_lab.fields_common.geometry import Geometry
from pc_boundary_lab.fields_common.grid import Backend, Grid
from pc_boundary_lab.fields_common.random_fields import random_form, random_geometry
from pc_boundary_lab.slice_common.slice import decompose_connection, dof_audit, verify_decomposition
from pc_boundary_lab.ui_common.themes import CMD_LINE_COLOR, create_lab_theme, verdict
from pc_boundary_lab.utils_common.config import RunConfig, load_config
from pc_boundary_lab.utils_common.errors import ConfigError, LabError, SnapshotError
from pc_boundary_lab.utils_common.reports import GradientReport, ReportModel
from pc_boundary_lab.utils_common.tools_utils import convergence_ladder, init_logging, setup_logging, status
from pc_boundary_lab.wedge_common.lemmas import verify_lemma_suite

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

LADDER = (8, 16)
# coframe perturbation on the refinement ladder; ω and the ghosts stay constant there
LADDER_EPS = 0.05


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=None, help="Spacetime dimension N (at least 4)")
    common.add_argument("--grid", type=str, default=None, help="Points per axis, one value or N-1 values (4 or 4x4x8)")
    common.add_argument("--backend", type=str, default=None, help="Derivative backend: FD or SPECTRAL")
    common.add_argument("--seed", type=int, default=None, help="Seed of every random configuration")
    common.add_argument("--trials", type=int, default=None, help="Random coframes per lemma")
    common.add_argument("--fit-trials", type=int, default=None, dest="fit_trials", help="Configurations entering the bracket coefficient fit")
    common.add_argument("--tol", type=float, default=None, help="Relative tolerance of the residual checks")
    common.add_argument("--lambda", type=float, default=None, dest="cosmological", help="Cosmological constant Λ")
    common.add_argument(
        "--constant-coframe",
        action=argparse.BooleanOptionalAction,
        default=None,
        dest="constant_coframe",
        help="Sample a spatially constant coframe",
    )
    common.add_argument("--converge", action="store_true", default=None, help="Also run the FD refinement ladder 4/8/16")
    common.add_argument("--shifts", type=int, default=None, help="Random kernel shifts for the gauge checks")
    common.add_argument("--directions", type=int, default=None, help="Random directions for the gradient checks")
    common.add_argument("--out", type=str, default=None, help="Report folder")
    common.add_argument("--config", type=str, default=None, help="key = value config file")
    common.add_argument("-v", "--verbose", action="count", default=None, help="-v for info, -vv for debug logs")
    common.add_argument("--quiet", action="store_true", default=None, help="No progress bars or status lines")

    parser = argparse.ArgumentParser(
        prog="pc-boundary-lab",
        description="Numerical checks of the boundary structure of Palatini–Cartan gravity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    lemmas = sub.add_parser("verify-lemmas", parents=[common], help="Ranks and kernels of the wedge maps")
    lemmas.add_argument("--exact", action="store_true", default=None, help="Add the identity coframe ranked over the rationals")
    lemmas.add_argument("--probe", action="store_true", default=None, help="Add the degenerate boundary metric probe")

    decompose = sub.add_parser("decompose", parents=[common], help="Split a connection onto the structural slice")
    decompose.add_argument("snapshot", nargs="?", default=None, help="Snapshot of ω̃; a random one is drawn when absent")

    sub.add_parser("brackets", parents=[common], help="First class relations of L, P and H")
    sub.add_parser("master-equation", parents=[common], help="{S,S} piece by piece, Q and the primed variables")
    sub.add_parser("ledger", parents=[common], help="Term by term cancellation of 2{S0,S1}_f + {S1,S1}_g")
    return parser.parse_args(argv)


def config_from_args(args: argparse.Namespace, environ=None) -> RunConfig:
    fields = set(RunConfig.__fields__)
    overrides = {k: v for k, v in vars(args).items() if k in fields}
    return load_config(overrides, args.config, environ)


# shared helpers


def make_geometry(
    cfg: RunConfig, layout, rng: np.random.Generator, grid: Optional[Grid] = None, backend=None
) -> Geometry:
    return random_geometry(
        layout,
        grid or cfg.make_grid(),
        Backend.parse(backend or cfg.backend),
        rng,
        eps=cfg.perturbation,
        constant=cfg.constant_coframe,
        cosmological=cfg.cosmological,
    )


def ladder_geometry(cfg: RunConfig, layout, rng: np.random.Generator, points: int) -> Geometry:
    return random_geometry(
        layout,
        Grid.cube(cfg.n, points),
        Backend.FD,
        rng,
        eps=min(cfg.perturbation, LADDER_EPS),
        constant=False,
        cosmological=cfg.cosmological,
    )


def report_path(cfg: RunConfig, name: str, suffix: str) -> str:
    return os.path.join(cfg.out, f"{name}_N{cfg.dim}_seed{cfg.seed}.{suffix}")


def save_report(cfg: RunConfig, report: ReportModel, name: str, title: str):
    report.save_as_json(report_path(cfg, name, "json"))
    report.save_as_markdown(report_path(cfg, name, "md"), title)
    status(f"Saved {name} report to {report_path(cfg, name, 'json')}", quiet=cfg.quiet)


def render(title: str, columns: List[str], rows: List[List[str]], quiet: bool = False):
    if quiet:
        return
    console = Console()
    console.push_theme(create_lab_theme(console.color_system))
    table = Table(title=title, title_style="bold")
    for column in columns:
        table.add_column(column)
    for row in rows:
        table.add_row(*row)
    console.print(table)


def _num(value: Optional[float]) -> str:
    return "-" if value is None else f"[number]{value:.3e}[/number]"


# subcommands


def cmd_verify_lemmas(cfg: RunConfig, args: argparse.Namespace) -> int:
    report = verify_lemma_suite(
        cfg.dim,
        cfg.trials,
        cfg.seed,
        tol=cfg.rank_tol,
        exact=cfg.exact,
        eps=cfg.perturbation,
        probe=cfg.probe,
        quiet=cfg.quiet,
    )
    summary: Dict[str, Dict] = OrderedDict()
    for row in report.rows:
        entry = summary.setdefault(row.lemma_id, {"anchor": row.anchor, "expected": set(), "observed": set(), "passed": True})
        entry["expected"].add(row.expected)
        entry["observed"].add(row.observed)
        entry["passed"] = entry["passed"] and row.passed
    rows = [
        [
            lemma_id,
            f"[anchor]{escape(entry['anchor'])}[/anchor]",
            ",".join(str(v) for v in sorted(entry["expected"])),
            ",".join(str(v) for v in sorted(entry["observed"])),
            verdict(entry["passed"]),
        ]
        for lemma_id, entry in summary.items()
    ]
    for probe in report.probes:
        rows.append([probe.lemma_id, f"[gray]{escape(probe.anchor)}[/gray]", str(probe.expected), str(probe.observed), "[gray]probe[/gray]"])
    render(f"Wedge map lemmas, N={cfg.dim}, {cfg.trials} trials", ["lemma", "claim", "expected", "observed", "result"], rows, cfg.quiet)
    save_report(cfg, report, "lemmas", f"Wedge map lemmas N={cfg.dim}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def _load_connection(cfg: RunConfig, fname: Optional[str], rng: np.random.Generator) -> Field:
    if fname is None:
        layout = build_layout(cfg.n, cfg.dim)
        grid = cfg.make_grid()
        return random_form(layout, grid, Backend.parse(cfg.backend), 1, 2, rng, constant=False)
    try:
        omega_tilde = snapshot.load(fname)
    except OSError as e:
        raise SnapshotError(f"Cannot read snapshot: {e}", {"file": fname})
    if not isinstance(omega_tilde, Field):
        raise SnapshotError("Snapshot holds a vector field, not a connection", {"file": fname})
    if omega_tilde.layout.internal_dim != cfg.dim:
        raise SnapshotError("Snapshot dimension disagrees with --dim", {"snapshot": omega_tilde.layout.internal_dim, "dim": cfg.dim})
    return omega_tilde


def cmd_decompose(cfg: RunConfig, args: argparse.Namespace) -> int:
    rng = np.random.default_rng(cfg.seed)
    omega_tilde = _load_connection(cfg, args.snapshot, rng)
    geometry = make_geometry(cfg, omega_tilde.layout, rng, omega_tilde.grid, omega_tilde.backend)
    result = decompose_connection(omega_tilde, geometry, cfg.rank_tol)
    for name, f in (("omega", result.omega), ("v", result.v), ("sigma", result.sigma)):
        snapshot.save(f, report_path(cfg, f"decompose_{name}", "snap"), name)
    report = verify_decomposition(geometry, omega_tilde, cfg.accept_tol, cfg.shifts, rng)
    audit = dof_audit(cfg.dim)
    rows = [
        ["round trip", _num(report.max_residual), _num(report.tol), verdict(report.max_residual <= report.tol)],
        ["structural constraint", _num(report.structural_residual), _num(report.tol), verdict(report.structural_residual <= report.tol)],
    ]
    if report.gauge_deviation is not None:
        rows.append([f"gauge, {report.gauge_shifts} shifts", _num(report.gauge_deviation), _num(1e-9), verdict(report.gauge_deviation <= 1e-9)])
    rows.append(["physical degrees of freedom", str(audit.physical), str(cfg.dim * (cfg.dim - 3) // 2), verdict(audit.passed)])
    render(f"Slice decomposition, N={cfg.dim}, grid {list(geometry.grid.dims)}", ["check", "value", "bound", "result"], rows, cfg.quiet)
    save_report(cfg, report, "decompose", f"Slice decomposition N={cfg.dim}")
    save_report(cfg, audit, "dof", f"Degrees of freedom N={cfg.dim}")
    return EXIT_PASS if report.passed and audit.passed else EXIT_FAIL


def _ladder(cfg: RunConfig, quantity: str, residual_at: Callable[[int], float]) -> bool:
    ladder = convergence_ladder(quantity, residual_at, LADDER)
    rows = [[str(r.points), _num(r.residual), "-" if r.ratio is None else f"{r.ratio:.2f}"] for r in ladder.rows]
    render(f"FD refinement, {quantity}", ["points", "residual", "ratio"], rows, cfg.quiet)
    save_report(cfg, ladder, f"{quantity}_ladder", f"FD refinement {quantity}")
    return ladder.passed


def cmd_brackets(cfg: RunConfig, args: argparse.Namespace) -> int:
    rng = np.random.default_rng(cfg.seed)
    layout = multiplier_layout(cfg.n, cfg.dim, cfg.ghost_generators)
    geometry = make_geometry(cfg, layout, rng)
    report = verify_bracket_suite(geometry, rng, cfg.seed, cfg.fit_trials, cfg.tol, quiet=cfg.quiet)
    rows = [
        [
            r.relation_id,
            f"[anchor]{escape(r.anchor)}[/anchor]",
            _num(r.residual),
            _num(r.displayed_residual),
            escape(", ".join(f"{k}={v:+.4f}" for k, v in r.fitted.items())),
            verdict(r.passed),
        ]
        for r in report.rows
    ]
    render(
        f"First class relations, N={cfg.dim}, Λ={cfg.cosmological}",
        ["relation", "statement", "fitted residual", "displayed residual", "coefficients", "result"],
        rows,
        cfg.quiet,
    )
    save_report(cfg, report, "brackets", f"First class relations N={cfg.dim}")
    passed = report.passed

    omega, m = random_configuration(geometry, rng)
    gradients = verify_constraint_gradients(geometry, omega, m, rng, cfg.seed, cfg.directions)
    save_report(cfg, gradients, "constraint_gradients", f"Hamiltonian fields against finite differences N={cfg.dim}")
    omega_tilde = random_form(layout, geometry.grid, geometry.backend, 1, 2, rng, constant=False)
    gauge = gauge_invariance_check(geometry, omega_tilde, m, rng, cfg.shifts, cfg.tol)
    render(
        "Consistency",
        ["check", "worst", "result"],
        [
            ["ι_X ϖ = δF", _num(max(r.rel_error for r in gradients.rows)), verdict(gradients.passed)],
            [f"gauge, {gauge.shifts} shifts", _num(gauge.max_deviation), verdict(gauge.passed)],
        ],
        cfg.quiet,
    )
    passed = passed and gradients.passed and gauge.passed

    if cfg.converge:

        def residual_at(points: int) -> float:
            local = np.random.default_rng(cfg.seed)
            g = ladder_geometry(cfg, layout, local, points)
            rows = verify_bracket_suite(g, local, cfg.seed, 1, cfg.tol, constant_fields=True).rows
            return max(r.displayed_residual * r.scale for r in rows)

        passed = _ladder(cfg, "brackets", residual_at) and passed
    return EXIT_PASS if passed else EXIT_FAIL


def _bfv_state(cfg: RunConfig, rng: np.random.Generator, points: Optional[int] = None) -> BFVState:
    """Varying fields over the configured coframe, or the refinement ladder state when points is given"""
    layout = bfv_layout(cfg.n, cfg.dim, cfg.ghost_generators, cfg.antighost_generators)
    if points is None:
        return random_bfv_state(make_geometry(cfg, layout, rng), rng, constant=False)
    return random_bfv_state(ladder_geometry(cfg, layout, rng, points), rng, constant=True)


def cmd_master_equation(cfg: RunConfig, args: argparse.Namespace) -> int:
    rng = np.random.default_rng(cfg.seed)
    state = _bfv_state(cfg, rng)
    q = cohomological_vf(state)
    ledger = ledger_values(state, cfg.quiet)
    relabel = random_relabelling(state.layout, rng)
    report = master_equation(state, cfg.seed, cfg.tol, q=q, ledger=ledger, relabel=relabel, quiet=cfg.quiet)
    rows = [[p.piece, _num(p.residual), _num(p.scale), _num(p.tol), verdict(p.passed)] for p in report.pieces]
    rows.append(["ghost numbers S: +1, {S,S}: +2", "-", "-", "-", verdict(report.ghost_number_ok)])
    render(f"Master equation, N={cfg.dim}, grid {report.grid}", ["piece", "residual", "scale", "tol", "result"], rows, cfg.quiet)
    save_report(cfg, report, "master", f"Master equation N={cfg.dim}")

    primed = change_variables_primed(state, cfg.seed)
    gradient_rows = action_gradient_rows(state, rng, cfg.directions, q=q)
    gradients = GradientReport(N=cfg.dim, seed=cfg.seed, tol=1e-6, passed=all(r.passed for r in gradient_rows), rows=gradient_rows)
    render(
        "Primed variables and Q",
        ["check", "value", "result"],
        [
            ["S - S′", _num(primed.action_residual), verdict(primed.action_residual <= primed.tol)],
            ["e_n y† = -λ†", _num(primed.reconstruction_n), verdict(primed.reconstruction_n <= primed.tol)],
            ["e_a y† = -ξ′†_a", _num(primed.reconstruction_a), verdict(primed.reconstruction_a <= primed.tol)],
            ["rank ϖ′", f"{primed.pairing_rank}/{primed.pairing_dim}", verdict(primed.pairing_rank == primed.pairing_dim)],
            ["ι_Q ϖ = δS", _num(max((r.rel_error for r in gradient_rows), default=0.0)), verdict(gradients.passed)],
        ],
        cfg.quiet,
    )
    save_report(cfg, primed, "primed", f"Primed variables N={cfg.dim}")
    save_report(cfg, gradients, "action_gradients", f"Q against finite differences of S N={cfg.dim}")
    passed = report.passed and primed.passed and gradients.passed

    if cfg.converge:

        def residual_at(points: int) -> float:
            local = np.random.default_rng(cfg.seed)
            s = _bfv_state(cfg, local, points)
            total = next(p for p in master_equation(s, cfg.seed, cfg.tol, quiet=True).pieces if p.piece == TOTAL)
            return total.residual * total.scale

        passed = _ladder(cfg, "master", residual_at) and passed
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_ledger(cfg: RunConfig, args: argparse.Namespace) -> int:
    rng = np.random.default_rng(cfg.seed)
    state = _bfv_state(cfg, rng)
    report = cancellation_ledger(state, cfg.seed, cfg.tol, quiet=cfg.quiet)
    rows = [
        [
            g.group_id,
            " ".join(g.term_ids),
            _num(g.group_sum),
            "exact" if g.exact else _num(g.tol),
            verdict(g.passed),
        ]
        for g in report.groups
    ]
    render(f"Cancellation ledger, N={cfg.dim}", ["group", "terms", "relative sum", "tol", "result"], rows, cfg.quiet)
    save_report(cfg, report, "ledger", f"Cancellation ledger N={cfg.dim}")
    return EXIT_PASS if report.passed else EXIT_FAIL


COMMANDS = {
    "verify-lemmas": cmd_verify_lemmas,
    "decompose": cmd_decompose,
    "brackets": cmd_brackets,
    "master-equation": cmd_master_equation,
    "ledger": cmd_ledger,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as e:
        print(CMD_LINE_COLOR.RED, f"Invalid configuration: {e}", CMD_LINE_COLOR.ENDC, file=sys.stderr)
        return EXIT_USAGE
    setup_logging(cfg.verbose)
    init_logging(cfg.out)
    try:
        status(f"pc-boundary-lab {args.command}: N={cfg.dim}, grid {list(cfg.grid_dims())}, {cfg.backend}, seed {cfg.seed}", quiet=cfg.quiet)
        code = COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(CMD_LINE_COLOR.RED, f"Invalid configuration: {e}", CMD_LINE_COLOR.ENDC, file=sys.stderr)
        return EXIT_USAGE
    except LabError as e:
        print(CMD_LINE_COLOR.RED, f"{type(e).__name__}: {e}", CMD_LINE_COLOR.ENDC, file=sys.stderr)
        return EXIT_FAIL
    if code == EXIT_PASS:
        status("All checks passed", CMD_LINE_COLOR.GREEN, cfg.quiet)
    else:
        status("Some checks failed", CMD_LINE_COLOR.RED, cfg.quiet)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
