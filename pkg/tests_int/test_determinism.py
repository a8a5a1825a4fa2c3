# -*- coding: utf-8 -*-

import pytest

from hamstate.cli import EXIT_OK, main

pytestmark = pytest.mark.slow

CONFIG = """
preset = "nls1d"

[model]
n_x = 128
half_extent = 20.0

[time]
t_final = 0.5
n_steps = 50
stride = 10

[observation]
noise = 0.05

[experiment]
seed = 11
"""


def test_repeated_runs_are_byte_identical(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(CONFIG)
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["run", "--config", str(path), "--out-dir", str(out)]) == EXIT_OK
        outputs.append(
            {
                p.name: p.read_bytes()
                for p in sorted((out / "dynamic").glob("*.csv"))
            }
        )
    assert outputs[0].keys() == {"records.csv", "sensors.csv", "figure_0.csv", "figure_1.csv", "figure_2.csv"}
    assert outputs[0] == outputs[1]


if __name__ == "__main__":
    from hamstate.tests import run_cov_test

    run_cov_test(
        __file__,
        "hamstate.cli",
        preview=False,
    )
