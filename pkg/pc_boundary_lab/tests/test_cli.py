# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0
"""
Test for the pc-boundary-lab command line: exit codes and saved reports
"""
import json
import tempfile
from pathlib import Path

from pc_boundary_lab.cli import EXIT_PASS, EXIT_USAGE, main, parse_args


def test_parse_args():
    args = parse_args(["brackets", "--dim", "5", "--lambda", "0.5", "--no-constant-coframe", "-vv"])
    assert args.command == "brackets"
    assert args.dim == 5
    assert args.cosmological == 0.5
    assert args.constant_coframe is False
    assert args.verbose == 2
    assert args.trials is None


def test_invalid_dimension_exit_code(tmp_path: Path):
    assert main(["verify-lemmas", "--dim", "3", "--quiet", "--out", str(tmp_path)]) == EXIT_USAGE


def test_mismatched_grid_exit_code(tmp_path: Path):
    assert main(["verify-lemmas", "--grid", "4x4", "--quiet", "--out", str(tmp_path)]) == EXIT_USAGE


def test_verify_lemmas_report(tmp_path: Path):
    code = main(["verify-lemmas", "--trials", "1", "--exact", "--quiet", "--out", str(tmp_path)])
    assert code == EXIT_PASS
    report = json.loads((tmp_path / "lemmas_N4_seed0.json").read_text())
    assert report["passed"]
    assert report["exact"]
    assert (tmp_path / "lemmas_N4_seed0.md").exists()


def main_tests():
    test_parse_args()
    with tempfile.TemporaryDirectory() as folder:
        test_invalid_dimension_exit_code(Path(folder))
        test_mismatched_grid_exit_code(Path(folder))
        test_verify_lemmas_report(Path(folder))
    print("cli tests passed")


if __name__ == "__main__":
    main_tests()
