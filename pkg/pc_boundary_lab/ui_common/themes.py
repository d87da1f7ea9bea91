# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

from typing import Dict, Optional

from rich.style import Style
from rich.theme import Theme

# role -> (truecolor, 256 colors, standard)
_PALETTE = {
    "pass": ("#1eb57d", "dark_cyan", "green"),
    "fail": ("#f04f5e", "red1", "red"),
    "anchor": ("#786bb0", "medium_purple3", "magenta"),
    "number": ("#ffd10a", "gold1", "bright_yellow"),
    "gray": ("bright_black", "bright_black", "bright_black"),
}


def create_color_scheme(color_system: Optional[str]) -> Dict[str, str]:
    """Colors per report role for the color system rich detected"""
    column = {"truecolor": 0, "256": 1}.get(color_system or "standard", 2)
    return {role: colors[column] for role, colors in _PALETTE.items()}


class CMD_LINE_COLOR:
    BLUE = "\033[94m"
    GREEN = "\033[92m"
    RED = "\033[91m"
    ENDC = "\033[0m"


def create_lab_theme(color_system: Optional[str] = "truecolor") -> Theme:
    colors = create_color_scheme(color_system)
    return Theme(
        {
            "pass": Style(color=colors["pass"], bold=True),
            "fail": Style(color=colors["fail"], bold=True),
            "anchor": Style(color=colors["anchor"], italic=True),
            "number": Style(color=colors["number"]),
            "gray": Style(color=colors["gray"]),
        }
    )


def verdict(passed: bool) -> str:
    """Markup for a pass/fail cell"""
    return "[pass]pass[/pass]" if passed else "[fail]FAIL[/fail]"
