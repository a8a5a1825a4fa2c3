# -*- coding: utf-8 -*-

import csv

import pytest

from hamstate.cli import EXIT_BETA_FLOOR, EXIT_ERROR, EXIT_OK, main, make_parser

TINY = """
preset = "nls1d"

[model]
n_x = 64
half_extent = 10.0

[time]
t_final = 0.04
n_steps = 4
stride = 2

[reduced]
n = 2
k_h = 3
k_s = 2

[observation]
positions = [-1.0, 0.0, 1.0]
sigma = 0.5

[placement]
l_max = 2

[experiment]
true_thetas = [[1.0, 1.0]]
figure_thetas = []
"""

TINY_TRANSPORT = """
[transport]
n_x = 400
n_times = 5
t_final = 4.0
"""


@pytest.fixture
def tiny(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY)
    return path


def test_parser():
    args = make_parser().parse_args(["run", "--preset", "swe1d", "--mode", "static"])
    assert args.command == "run"
    assert args.preset == "swe1d"
    assert args.mode == "static"
    assert args.verbose is False
    args = make_parser().parse_args(["truth", "--verbose"])
    assert args.verbose is True
    with pytest.raises(SystemExit):
        make_parser().parse_args([])
    with pytest.raises(SystemExit):
        make_parser().parse_args(["run", "--mode", "sometimes"])


def test_truth(tmp_path, tiny):
    out = tmp_path / "out"
    assert main(["truth", "--config", str(tiny), "--out-dir", str(out)]) == EXIT_OK
    assert len(list((out / "truth").glob("*.bin"))) == 1


def test_run(tmp_path, tiny):
    out = tmp_path / "out"
    code = main(
        ["run", "--config", str(tiny), "--out-dir", str(out), "--mode", "static", "--seed", "1"]
    )
    assert code == EXIT_OK
    with (out / "static" / "records.csv").open() as f:
        rows = list(csv.reader(f))
    assert len(rows) == 4
    assert (out / "static" / "sensors.csv").exists()


def test_run_below_beta_floor(tmp_path, tiny):
    tiny.write_text(TINY + "beta_min = 1.0\n")
    out = tmp_path / "out"
    assert main(["run", "--config", str(tiny), "--out-dir", str(out)]) == EXIT_BETA_FLOOR


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--preset", "nls3d"],
        ["truth", "--config", "missing.toml"],
    ],
)
def test_errors(argv):
    assert main(argv) == EXIT_ERROR


def test_invalid_key(tmp_path, tiny):
    tiny.write_text(TINY + "bogus = 1\n")
    assert main(["run", "--config", str(tiny), "--out-dir", str(tmp_path)]) == EXIT_ERROR


def test_demo_transport(tmp_path):
    path = tmp_path / "transport.toml"
    path.write_text(TINY_TRANSPORT)
    out = tmp_path / "out"
    code = main(
        ["demo-transport", "--config", str(path), "--out-dir", str(out), "--mode", "static"]
    )
    assert code == EXIT_OK
    with (out / "transport" / "static.csv").open() as f:
        rows = list(csv.reader(f))
    assert len(rows) == 1 + 5
    assert not (out / "transport" / "dynamic.csv").exists()


if __name__ == "__main__":
    from hamstate.tests import run_cov_test

    run_cov_test(
        __file__,
        "hamstate.cli",
        preview=False,
    )
