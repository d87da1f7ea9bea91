# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the exception hierarchy shared by every pc-boundary-lab module.
Library code raises these, only the command line front end turns them into exit codes.
"""

from typing import Dict, List, Optional, Sequence


class LabError(Exception):
    """Base class for all errors raised by pc-boundary-lab"""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self):
        if not self.details:
            return self.message
        extra = ", ".join(f"{k}={v}" for k, v in self.details.items())
        return f"{self.message} ({extra})"


class DegreeError(LabError, ValueError):
    """Form or internal degree out of range for the requested operation"""


class DegeneracyError(LabError, ArithmeticError):
    """A frame, boundary metric or linear system is singular at one or more nodes"""

    def __init__(self, message: str, nodes: Sequence = (), details: Optional[Dict] = None):
        self.nodes: List = [tuple(int(i) for i in n) if hasattr(n, "__iter__") else int(n) for n in nodes]
        details = dict(details or {})
        if self.nodes:
            shown = self.nodes[:8]
            details["nodes"] = shown if len(self.nodes) <= 8 else f"{shown} +{len(self.nodes) - 8} more"
        super().__init__(message, details)


class OffSliceError(LabError, ValueError):
    """The connection does not satisfy the structural constraint to tolerance"""


class BudgetError(LabError, RuntimeError):
    """The Grassmann generator budget cannot hold the requested fields"""


class ConfigError(LabError, ValueError):
    """Invalid run configuration"""


class SnapshotError(LabError, ValueError):
    """A field snapshot file could not be parsed"""
