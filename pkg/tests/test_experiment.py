# -*- coding: utf-8 -*-

import csv
import logging

import numpy as np
import pytest

from hamstate.config import Mode, load_config, load_transport_config
from hamstate.discretization import SpatialGrid
from hamstate.pbdw import SweepMaxima
from hamstate import experiment
from hamstate.experiment import (
    RunRecord,
    RECORD_CSV_COLUMNS,
    record_columns,
    truth_path,
    load_or_solve_truth,
    generate_truths,
    run,
    emit_csv,
    execute,
    transport_case,
    transport_basis,
    transport_beta_decay_demo,
)
from hamstate.tests.configs import tiny_overrides


def _config(tmp_path, **experiment_keys):
    return load_config("nls1d", overrides=tiny_overrides(tmp_path, **experiment_keys))


def _read(path):
    with path.open() as f:
        return list(csv.reader(f))


@pytest.fixture
def truths(tmp_path):
    return generate_truths(_config(tmp_path), cache=False)


class TestTruths:
    def test_path(self, tmp_path):
        cfg = _config(tmp_path)
        path = truth_path(tmp_path, cfg.model_spec(), (1.0, 1.04), cfg)
        assert path.name == "nls1d_64_1.0000000000_1.0400000000_4_2.bin"

    def test_generate(self, tmp_path):
        cfg = _config(tmp_path)
        truths = generate_truths(cfg)
        assert set(truths) == {(1.0, 1.0), (1.04, 1.04)}
        assert truths[(1.0, 1.0)].count == 3
        assert len(list((tmp_path / "truth").glob("*.bin"))) == 2

    def test_cache_is_reused(self, tmp_path, monkeypatch):
        cfg = _config(tmp_path)
        first = load_or_solve_truth(cfg, (1.0, 1.0), tmp_path / "truth")

        def fail(*args, **kwargs):
            raise AssertionError("the cached trajectory should have been used")

        monkeypatch.setattr(experiment, "solve_trajectory", fail)
        second = load_or_solve_truth(cfg, (1.0, 1.0), tmp_path / "truth")
        np.testing.assert_array_equal(first.states, second.states)

    def test_corrupt_cache_is_replaced(self, tmp_path, caplog):
        cfg = _config(tmp_path)
        dir_truth = tmp_path / "truth"
        path = truth_path(dir_truth, cfg.model_spec(), (1.0, 1.0), cfg)
        load_or_solve_truth(cfg, (1.0, 1.0), dir_truth)
        path.write_bytes(path.read_bytes()[:100])
        with caplog.at_level(logging.WARNING, logger="hamstate.experiment"):
            traj = load_or_solve_truth(cfg, (1.0, 1.0), dir_truth)
        assert "ignoring cached truth" in caplog.text
        assert traj.count == 3

    def test_stale_cache_is_not_used(self, tmp_path):
        cfg = _config(tmp_path)
        dir_truth = tmp_path / "truth"
        load_or_solve_truth(cfg, (1.0, 1.0), dir_truth)
        overrides = tiny_overrides(tmp_path)
        overrides["time"]["t_final"] = 0.08
        longer = load_config("nls1d", overrides=overrides)
        traj = load_or_solve_truth(longer, (1.0, 1.0), dir_truth)
        assert traj.time_grid.t_final == 0.08


class TestRun:
    def test_records(self, tmp_path, truths):
        records = list(run(_config(tmp_path), truths))
        assert [r.t for r in records] == pytest.approx([0.0, 0.02, 0.04])
        for r in records:
            assert not r.failed
            assert 0 < r.beta <= 1.0 + 1e-12
            assert r.positions.shape == (3, 1)
            assert r.maxima.proj_err <= r.maxima.err + 1e-12
            assert r.maxima.err <= r.maxima.bound + 1e-12
            assert np.isfinite(r.maxima.ham_err)
            assert len(r.figures) == 1
        # the drift of the reference reconstruction starts at zero
        assert records[0].maxima.ham_drift_truth == 0.0
        assert records[0].maxima.ham_drift_rec == 0.0

    def test_dynamic_does_not_lose_stability(self, tmp_path, truths):
        static = list(run(_config(tmp_path, mode="static"), truths))
        dynamic = list(run(_config(tmp_path, mode="dynamic"), truths))
        for r in static:
            np.testing.assert_array_equal(r.positions[:, 0], [-1.0, 0.0, 1.0])
            assert r.ascent_iterations == 0
        assert dynamic[0].beta >= static[0].beta - 1e-14

    def test_static_equals_dynamic_without_ascent(self, tmp_path, truths):
        overrides = tiny_overrides(tmp_path, mode="static")
        overrides["placement"] = {"l_max": 0}
        static = list(run(load_config("nls1d", overrides=overrides), truths))
        overrides["experiment"]["mode"] = "dynamic"
        dynamic = list(run(load_config("nls1d", overrides=overrides), truths))
        for a, b in zip(static, dynamic):
            assert a.beta == b.beta
            assert a.maxima == b.maxima
            np.testing.assert_array_equal(a.positions, b.positions)

    def test_noise_is_reproducible(self, tmp_path, truths):
        overrides = tiny_overrides(tmp_path, seed=3)
        overrides["observation"]["noise"] = 0.01
        a = list(run(load_config("nls1d", overrides=overrides), truths))
        b = list(run(load_config("nls1d", overrides=overrides), truths))
        overrides["experiment"]["seed"] = 4
        c = list(run(load_config("nls1d", overrides=overrides), truths))
        assert [r.maxima for r in a] == [r.maxima for r in b]
        assert a[-1].maxima.err != c[-1].maxima.err

    def test_error_grows_with_noise_level(self, tmp_path, truths):
        means = []
        for level in (0.0, 0.5, 2.0, 8.0):
            errors = []
            for seed in range(6):
                overrides = tiny_overrides(tmp_path, seed=seed, mode="static")
                overrides["observation"]["noise"] = level
                records = run(load_config("nls1d", overrides=overrides), truths)
                errors.extend(r.maxima.err for r in records)
            means.append(np.mean(errors))
        assert all(a <= b for a, b in zip(means, means[1:]))
        assert means[-1] > means[0]

    def test_parallel_sweep_matches_serial(self, tmp_path, truths):
        serial = list(run(_config(tmp_path, workers=1), truths))
        parallel = list(run(_config(tmp_path, workers=4), truths))
        assert [r.maxima for r in serial] == [r.maxima for r in parallel]

    def test_beta_floor(self, tmp_path, truths):
        records = list(run(_config(tmp_path, beta_min=1.0, mode="static"), truths))
        assert all(r.failed for r in records)
        assert np.isnan(records[0].maxima.err)
        assert np.isnan(records[0].figures[0].err)

    def test_missing_truth(self, tmp_path, truths):
        del truths[(1.0, 1.0)]
        with pytest.raises(KeyError):
            next(run(_config(tmp_path), truths))

    def test_trace_and_basis_dump(self, tmp_path, truths):
        cfg = _config(tmp_path, trace=True, dump_basis_every=2)
        list(run(cfg, truths))
        trace = _read(tmp_path / "dynamic" / "ascent.csv")
        assert trace[0] == ["t", "iteration", "beta_sq", "step", "grad_norm"]
        # times 0 and 2 of three, four columns each
        assert len(list((tmp_path / "dynamic" / "basis").glob("*.bin"))) == 8


class TestCsv:
    def test_columns(self):
        assert record_columns(2, 2)[len(RECORD_CSV_COLUMNS):] == ["s1_x", "s1_y", "s2_x", "s2_y"]

    def test_empty_stream(self, tmp_path):
        path = emit_csv([], tmp_path / "empty.csv")
        assert _read(path) == [list(RECORD_CSV_COLUMNS)]

    def test_precision(self, tmp_path):
        maxima = SweepMaxima(0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
        record = RunRecord(t=1 / 3, beta=0.5, maxima=maxima, positions=np.array([[0.25]]))
        rows = _read(emit_csv([record], tmp_path / "r.csv"))
        assert rows[0][-1] == "s1_x"
        assert float(rows[1][0]) == 1 / 3
        assert rows[1][-1] == "0.25"

    def test_execute(self, tmp_path, truths):
        cfg = _config(tmp_path, mode="static")
        records = execute(cfg, truths)
        dir_out = tmp_path / "static"
        rows = _read(dir_out / "records.csv")
        assert len(rows[0]) == 8 + 3
        assert len(rows) == 1 + len(records)
        assert float(rows[2][1]) == records[1].beta
        sensors = _read(dir_out / "sensors.csv")
        assert sensors[0] == ["t", "sensor_index", "x"]
        assert len(sensors) == 1 + 3 * len(records)
        figure = _read(dir_out / "figure_0.csv")
        assert float(figure[1][2]) == records[0].figures[0].err


class TestTransport:
    @pytest.fixture
    def grid(self):
        return SpatialGrid.uniform_1d(40.0, 1600)

    def test_case(self, grid):
        u = transport_case(0.8, 1.0, 0.0, grid)
        assert grid.weight * u.q.sum() == pytest.approx(1.0, abs=1e-12)
        assert not u.p.any()
        assert u.q.max() == pytest.approx(1.0 / (np.sqrt(2 * np.pi) * 0.8))
        # the packet moves with speed theta_2
        moved = transport_case(0.8, 1.0, 5.0, grid)
        (x,) = grid.coordinates()
        assert x[np.argmax(moved.q)] == pytest.approx(5.0)
        # and wraps around the box
        wrapped = transport_case(0.8, 1.0, 5.0 + 80.0, grid)
        np.testing.assert_allclose(wrapped.q, moved.q, atol=1e-12)
        with pytest.raises(ValueError):
            transport_case(0.0, 1.0, 0.0, grid)

    def test_basis(self, grid):
        V = transport_basis(np.array([[0.8, 1.0], [1.0, 1.1]]), 3.0, grid)
        assert V.shape == (3200, 2)
        np.testing.assert_allclose(grid.weight * V.T @ V, np.eye(2), atol=1e-12)
        assert not V[1600:].any()

    def test_static_beta_decays(self):
        cfg = load_transport_config(
            overrides={"transport": {"n_x": 800, "n_times": 11}}
        )
        records = list(transport_beta_decay_demo(cfg, Mode.STATIC))
        assert len(records) == 11
        assert records[0].beta > 0.1
        assert records[-1].beta < 1e-6
        for r in records:
            np.testing.assert_array_equal(r.positions[:, 0], [-1.5, -0.5, 0.5, 1.5])
            if not r.failed:
                assert r.maxima.err <= r.maxima.bound + 1e-10


if __name__ == "__main__":
    from hamstate.tests import run_cov_test

    run_cov_test(
        __file__,
        "hamstate.experiment",
        preview=False,
    )
