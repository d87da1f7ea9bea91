# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains common utilities used by all pc-boundary-lab suites.
"""
import importlib.resources
import logging
import math
import os
import sys
from typing import Callable, Iterable, List, Optional, Sequence

from rich.logging import RichHandler
from tqdm import tqdm
from yaml import safe_load

from pc_boundary_lab.ui_common.themes import CMD_LINE_COLOR
from pc_boundary_lab.utils_common.reports import ConvergenceReport, ConvergenceRow

LOG_FOLDER = os.path.expanduser("~/.config/pc_boundary_lab/reports")

logger = logging.getLogger(__name__)


def init_logging(log_folder: str):
    """Create report folders if they don't exist"""
    if not os.path.isdir(log_folder):
        os.makedirs(log_folder)


def setup_logging(verbosity: int = 0):
    """Install a RichHandler on the package logger; 0 warning, 1 info, 2+ debug"""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    root = logging.getLogger("pc_boundary_lab")
    root.setLevel(level)
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        root.addHandler(RichHandler(show_path=False, markup=False))


def get_lab_data(file: str):
    """Parsed YAML from the package's data directory"""
    text = importlib.resources.files("pc_boundary_lab").joinpath("data", file).read_text()
    return safe_load(text)


def status(message: str, color: str = CMD_LINE_COLOR.BLUE, quiet: bool = False):
    if quiet:
        return
    print(color, message, CMD_LINE_COLOR.ENDC)


def progress(iterable: Iterable, desc: str, quiet: bool = False, total: Optional[int] = None):
    """tqdm bar over iterable, off when quiet or stderr is not a terminal"""
    disable = quiet or not sys.stderr.isatty()
    return tqdm(iterable, desc=desc, total=total, disable=disable, leave=False)


def relative(residual: float, scale: float) -> float:
    return residual / scale if scale > 0 else residual


def convergence_ladder(
    quantity: str,
    residual_at: Callable[[int], float],
    points: Sequence[int] = (4, 8, 16),
    expected_order: float = 2.0,
    slack: float = 0.5,
) -> ConvergenceReport:
    """
    Evaluate residual_at(points per axis) along the ladder. Passes when the last
    refinement ratio is within slack of 2^expected_order.
    """
    rows: List[ConvergenceRow] = []
    previous = None
    for p in points:
        value = float(residual_at(p))
        ratio = previous / value if previous is not None and value > 0 else None
        rows.append(ConvergenceRow(points=p, residual=value, ratio=ratio))
        logger.info(f"{quantity}: {p} points per axis, residual {value:.3e}")
        previous = value
    ratios = [r.ratio for r in rows if r.ratio]
    order = math.log2(ratios[-1]) if ratios else None
    passed = bool(ratios) and abs(ratios[-1] - 2.0**expected_order) <= slack
    return ConvergenceReport(quantity=quantity, order=order, passed=passed, rows=rows)
