# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0
"""
Test for the run configuration: defaults, config file, PCLAB_* variables and
command line precedence
"""
import tempfile
from pathlib import Path

import pytest

from pc_boundary_lab.fields_common.grid import Backend
from pc_boundary_lab.utils_common.config import env_overrides, load_config, parse_config_file
from pc_boundary_lab.utils_common.errors import ConfigError


def test_defaults():
    cfg = load_config(environ={})
    assert cfg.dim == 4
    assert cfg.grid_dims() == (8, 8, 8)
    assert cfg.backend_enum == Backend.SPECTRAL
    assert cfg.fit_trials == 3


def test_precedence(tmp_path: Path):
    fname = tmp_path / "run.cfg"
    fname.write_text("# lab run\ndim = 5\nseed = 3\ngrid = 6x6x6x8\nfit-trials = 2\n")
    cfg = load_config(config_file=str(fname), environ={})
    assert cfg.dim == 5
    assert cfg.grid_dims() == (6, 6, 6, 8)
    assert cfg.fit_trials == 2
    cfg = load_config(config_file=str(fname), environ={"PCLAB_SEED": "7", "PCLAB_UNKNOWN": "1"})
    assert cfg.seed == 7
    cfg = load_config({"seed": 11, "dim": None}, config_file=str(fname), environ={"PCLAB_SEED": "7"})
    assert cfg.seed == 11
    assert cfg.dim == 5


def test_env_overrides_filter():
    out = env_overrides({"PCLAB_BACKEND": "fd", "PCLAB_NOPE": "1", "HOME": "/root"})
    assert out == {"backend": "fd"}
    assert load_config(environ={"PCLAB_BACKEND": "fd"}).backend == "FD"


def test_rejects_bad_values():
    for overrides in ({"dim": 3}, {"grid": "2"}, {"tol": 0.0}, {"trials": 0}, {"backend": "cheb"}, {"perturbation": 0.5}):
        with pytest.raises(ConfigError):
            load_config(overrides, environ={})
    with pytest.raises(ConfigError):
        load_config({"colour": "red"}, environ={})
    cfg = load_config({"grid": "4x4"}, environ={})
    with pytest.raises(ConfigError):
        cfg.grid_dims()


def test_config_file_errors(tmp_path: Path):
    fname = tmp_path / "bad.cfg"
    fname.write_text("dim 5\n")
    with pytest.raises(ConfigError):
        parse_config_file(str(fname))
    with pytest.raises(ConfigError):
        parse_config_file(str(tmp_path / "missing.cfg"))


def main():
    test_defaults()
    with tempfile.TemporaryDirectory() as folder:
        test_precedence(Path(folder))
        test_config_file_errors(Path(folder))
    test_env_overrides_filter()
    test_rejects_bad_values()
    print("config tests passed")


if __name__ == "__main__":
    main()
