# -*- coding: utf-8 -*-

"""
Dynamical state estimation driver.

At every assimilation time ``t_k`` (every ``stride`` high-fidelity steps):

1. dynamic mode only: move the sensors uphill on ``beta^2`` for the current
   basis, warm-started from the previous placement;
2. measure every true trajectory of the test set, reconstruct, and reduce the
   errors to their maxima over the test set;
3. advance basis and coefficients to ``t_{k+1}`` with ``stride * substeps``
   reduced steps.

A time where ``beta`` falls below the floor yields a failure row (``nan``
errors) and the run goes on.

The module also holds the pure transport scenario, whose solution is known in
closed form, and the CSV writers.
"""

import typing as T
import csv
import concurrent.futures
import dataclasses
import logging
from pathlib import Path

import numpy as np
import scipy.linalg as la

from .config.schema import ExperimentConfig, Mode, TransportRunConfig
from .discretization import SpatialGrid, GridFunction
from .exc import BinaryFormatError
from .highfidelity import Trajectory, load_trajectory, save_trajectory, solve_trajectory
from .models import ModelSpec
from .observation import (
    SensorArray,
    build_representers,
    gram_A,
    gram_B,
    measure,
    add_noise,
    write_sensor_trajectory,
)
from .pbdw import (
    ErrorReport,
    SweepMaxima,
    error_report,
    reconstruct,
    stability_constant,
    sweep_max,
)
from .placement import AscentState, run_ascent, write_ascent_trace
from .sdlr import dlr_step, dump_basis, initialize

logger = logging.getLogger(__name__)

ThetaKey = T.Tuple[float, float]


@dataclasses.dataclass
class RunRecord:
    """
    Result of one assimilation time.

    :param maxima: error maxima over the test parameters, all ``nan`` when
        ``failed``
    :param positions: ``m x d`` sensor positions used at ``t``
    :param figures: one single-parameter report per figure parameter
    """

    t: float
    beta: float
    maxima: SweepMaxima
    positions: np.ndarray
    ascent_iterations: int = 0
    failed: bool = False
    figures: T.List[SweepMaxima] = dataclasses.field(default_factory=list)


def _nan_maxima() -> SweepMaxima:
    return SweepMaxima(**{f.name: np.nan for f in dataclasses.fields(SweepMaxima)})


def _single(report: ErrorReport) -> SweepMaxima:
    return sweep_max([report])


def _key(theta: T.Sequence[float]) -> ThetaKey:
    return (float(theta[0]), float(theta[1]))


# ------------------------------------------------------------------------------
# Truth trajectories
# ------------------------------------------------------------------------------
def truth_path(dir_truth: Path, spec: ModelSpec, theta: T.Sequence[float], config: ExperimentConfig) -> Path:
    t = config.time
    counts = "x".join(str(c) for c in spec.grid.counts)
    return dir_truth / (
        f"{spec.kind.value}_{counts}_{theta[0]:.10f}_{theta[1]:.10f}"
        f"_{t.n_steps}_{t.stride}.bin"
    )


def _matches(traj: Trajectory, theta: ThetaKey, config: ExperimentConfig) -> bool:
    t = config.time
    return (
        traj.time_grid.n_steps == t.n_steps
        and traj.stride == t.stride
        and np.isclose(traj.time_grid.t_final, t.t_final, rtol=1e-14, atol=0)
        and np.allclose(traj.theta, theta, rtol=1e-14, atol=0)
    )


def load_or_solve_truth(
    config: ExperimentConfig,
    theta: T.Sequence[float],
    dir_truth: T.Optional[Path] = None,
) -> Trajectory:
    """
    Reuse a cached trajectory when grid, time grid and parameter match,
    otherwise solve it (and cache it when ``dir_truth`` is given).
    """
    spec = config.model_spec()
    theta = _key(theta)
    path = None
    if dir_truth is not None:
        path = truth_path(dir_truth, spec, theta, config)
        if path.exists():
            try:
                traj = load_trajectory(path, spec.grid)
            except BinaryFormatError as e:
                logger.warning("ignoring cached truth %s: %s", path, e)
            else:
                if _matches(traj, theta, config):
                    logger.debug("reusing cached truth %s", path)
                    return traj
    traj = solve_trajectory(
        spec,
        theta,
        config.time.time_grid(),
        config.time.stride,
        tol=config.time.newton_tol,
        max_newton=config.time.max_newton,
    )
    if path is not None:
        save_trajectory(path, traj)
    return traj


def generate_truths(
    config: ExperimentConfig,
    cache: bool = True,
) -> T.Dict[ThetaKey, Trajectory]:
    """
    Truth trajectories of every test and figure parameter.

    :param cache: read and write ``<out_dir>/truth``
    """
    dir_truth = Path(config.out_dir) / "truth" if cache else None
    thetas = [_key(th) for th in config.test_thetas()] + [
        _key(th) for th in config.figure_thetas
    ]
    unique = list(dict.fromkeys(thetas))
    with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as pool:
        trajectories = list(
            pool.map(lambda th: load_or_solve_truth(config, th, dir_truth), unique)
        )
    return dict(zip(unique, trajectories))


# ------------------------------------------------------------------------------
# Assimilation
# ------------------------------------------------------------------------------
def run(
    config: ExperimentConfig,
    truths: T.Optional[T.Dict[ThetaKey, Trajectory]] = None,
) -> T.Iterator[RunRecord]:
    """
    Yield one :class:`RunRecord` per assimilation time.

    :param truths: precomputed trajectories keyed by parameter; computed (and
        cached under ``out_dir``) when omitted
    """
    spec = config.model_spec()
    grid = spec.grid
    if truths is None:
        truths = generate_truths(config)
    test_thetas = [_key(th) for th in config.test_thetas()]
    figure_thetas = [_key(th) for th in config.figure_thetas]
    missing = [th for th in test_thetas + figure_thetas if th not in truths]
    if missing:
        raise KeyError(f"no truth trajectory for theta = {missing[0]}")
    systems = {th: spec.system(th) for th in test_thetas + figure_thetas}

    theta_h = config.parameter_grid().theta_h
    basis, coefficients = initialize(spec, theta_h, config.reduced.n)
    sensors = config.observation.sensors(grid)
    state = AscentState()
    dynamic = config.mode is Mode.DYNAMIC

    time_grid = config.time.time_grid()
    stride = config.time.stride
    substeps = config.reduced.substeps
    dt_reduced = time_grid.dt / substeps
    times = time_grid.stored_steps(stride) * time_grid.dt
    noise = config.observation.noise
    noise_seeds = np.random.default_rng(config.seed)
    h_rec_initial: T.Dict[ThetaKey, float] = {}
    dir_out = Path(config.out_dir) / config.mode.value

    def assess(job):
        theta, k, seed, obs, A, B, stab = job
        traj = truths[theta]
        u = traj.snapshot(k)
        z = measure(u, obs)
        if noise > 0:
            z = add_noise(z, obs, noise, seed)
        rec = reconstruct(
            A,
            B,
            basis,
            obs,
            z,
            include_w_correction=config.include_w_correction,
            beta_min=config.beta_min,
            stability=stab,
        )
        system = systems[theta]
        h_rec = system.hamiltonian(rec.v_star.vector)
        return error_report(
            u,
            rec,
            basis,
            stab.beta,
            model=system,
            ham_truth_initial=float(traj.hamiltonians[0]),
            ham_rec_initial=h_rec_initial.get(theta, h_rec),
        ), h_rec

    logger.info(
        "%s run of %s: %d assimilation times, %d test parameters, m = %d, 2n = %d",
        config.mode.value,
        spec.kind.value,
        len(times),
        len(test_thetas),
        sensors.m,
        2 * config.reduced.n,
    )
    with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as pool:
        for k, t in enumerate(times):
            iterations = 0
            if dynamic:
                result = run_ascent(sensors, basis, grid, config.placement, state)
                sensors = result.sensors
                iterations = result.iterations
                if config.trace:
                    write_ascent_trace(dir_out / "ascent.csv", t, result)

            obs = build_representers(sensors, grid)
            A = gram_A(obs)
            B = gram_B(obs, basis)
            stab = stability_constant(A, B)
            thetas = test_thetas + figure_thetas
            # drawn every time so failure rows do not shift later seeds
            seeds = [int(s) for s in noise_seeds.integers(0, 2**63 - 1, size=len(thetas))]

            if stab.beta <= config.beta_min:
                logger.warning(
                    "t = %.6g: beta = %.3e is below the floor %.3e, no reconstruction",
                    t,
                    stab.beta,
                    config.beta_min,
                )
                record = RunRecord(
                    t=float(t),
                    beta=stab.beta,
                    maxima=_nan_maxima(),
                    positions=np.array(sensors.positions),
                    ascent_iterations=iterations,
                    failed=True,
                    figures=[_nan_maxima() for _ in figure_thetas],
                )
            else:
                jobs = [(th, k, seed, obs, A, B, stab) for th, seed in zip(thetas, seeds)]
                outcomes = list(pool.map(assess, jobs))
                for th, (_, h_rec) in zip(thetas, outcomes):
                    h_rec_initial.setdefault(th, h_rec)
                reports = [report for report, _ in outcomes]
                record = RunRecord(
                    t=float(t),
                    beta=stab.beta,
                    maxima=sweep_max(reports[: len(test_thetas)]),
                    positions=np.array(sensors.positions),
                    ascent_iterations=iterations,
                    figures=[_single(r) for r in reports[len(test_thetas):]],
                )
                logger.info(
                    "t = %.4g: beta = %.3e, max error %.3e (projection %.3e)",
                    t,
                    stab.beta,
                    record.maxima.err,
                    record.maxima.proj_err,
                )
            yield record

            if config.dump_basis_every and k % config.dump_basis_every == 0:
                dump_basis(dir_out / "basis", basis, k)
            if k + 1 < len(times):
                for _ in range(stride * substeps):
                    basis, coefficients = dlr_step(
                        spec, basis, coefficients, theta_h, dt_reduced
                    )


# ------------------------------------------------------------------------------
# CSV output
# ------------------------------------------------------------------------------
RECORD_CSV_COLUMNS = (
    "t",
    "beta",
    "err_max",
    "err_proj_max",
    "err_bound_max",
    "ham_err_max",
    "ham_drift_truth",
    "ham_drift_rec",
)

_AXES = ("x", "y")


def record_columns(m: int, dim: int) -> T.List[str]:
    return list(RECORD_CSV_COLUMNS) + [
        f"s{j + 1}_{_AXES[axis]}" for j in range(m) for axis in range(dim)
    ]


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _row(t: float, beta: float, maxima: SweepMaxima, positions: np.ndarray) -> T.List[str]:
    values = [
        t,
        beta,
        maxima.err,
        maxima.proj_err,
        maxima.bound,
        maxima.ham_err,
        maxima.ham_drift_truth,
        maxima.ham_drift_rec,
    ] + list(np.asarray(positions, dtype=float).ravel())
    return [_fmt(v) for v in values]


def emit_csv(
    records: T.Iterable[RunRecord],
    path: T.Union[str, Path],
    figure: T.Optional[int] = None,
) -> Path:
    """
    Write records as CSV, 17 significant digits.

    The sensor columns follow the shape of the first record; an empty stream
    gives a header-only file without sensor columns.

    :param figure: write the maxima of figure parameter ``figure`` instead of
        the test-set maxima
    """
    records = list(records)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if records:
        m, dim = records[0].positions.shape
    else:
        m, dim = 0, 1
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(record_columns(m, dim))
        for r in records:
            maxima = r.maxima if figure is None else r.figures[figure]
            writer.writerow(_row(r.t, r.beta, maxima, r.positions))
    return path


def execute(
    config: ExperimentConfig,
    truths: T.Optional[T.Dict[ThetaKey, Trajectory]] = None,
) -> T.List[RunRecord]:
    """
    Run and write ``records.csv``, ``sensors.csv`` and one
    ``figure_<i>.csv`` per figure parameter under ``<out_dir>/<mode>/``.
    """
    records = list(run(config, truths))
    dir_out = Path(config.out_dir) / config.mode.value
    emit_csv(records, dir_out / "records.csv")
    write_sensor_trajectory(
        dir_out / "sensors.csv",
        [r.t for r in records],
        [r.positions for r in records],
    )
    for i in range(len(config.figure_thetas)):
        emit_csv(records, dir_out / f"figure_{i}.csv", figure=i)
    failures = sum(r.failed for r in records)
    if failures:
        logger.warning("%d of %d assimilation times fell below the beta floor", failures, len(records))
    logger.info("wrote %s", dir_out)
    return records


# ------------------------------------------------------------------------------
# Pure transport
# ------------------------------------------------------------------------------
def transport_case(
    theta_1: float,
    theta_2: float,
    t: float,
    grid: SpatialGrid,
) -> GridFunction:
    """
    Exact solution of ``u_t + theta_2 u_x = 0`` from a unit-mass Gaussian of
    width ``theta_1``, sampled into ``q`` (``p = 0``). Displacements use the
    minimum image, so the packet wraps around the periodic box.
    """
    if not theta_1 > 0:
        raise ValueError(f"theta_1 must be positive, got {theta_1}")
    x = grid.coordinates()[0]
    shift = grid.minimum_image(x - t * theta_2, axis=0)
    q = np.exp(-(shift**2) / (2.0 * theta_1**2)) / (np.sqrt(2.0 * np.pi) * theta_1)
    return GridFunction(grid, q=q, p=np.zeros(grid.n_dof))


def transport_basis(
    thetas: np.ndarray,
    t: float,
    grid: SpatialGrid,
) -> np.ndarray:
    """
    V-orthonormal ``2N x n`` basis of the snapshots at time ``t``.
    """
    vectors = np.stack([transport_case(th[0], th[1], t, grid).vector for th in thetas], axis=1)
    sqrt_w = np.sqrt(grid.weight)
    Q, _ = la.qr(sqrt_w * vectors, mode="economic")
    return Q / sqrt_w


def transport_beta_decay_demo(
    config: TransportRunConfig,
    mode: T.Union[Mode, str] = Mode.STATIC,
) -> T.Iterator[RunRecord]:
    """
    ``beta(t)`` for the transported snapshot space and Gaussian sensors.

    In static mode the sensors stay put and ``beta`` decays to zero once the
    packets leave them; in dynamic mode they follow the packets.
    """
    mode = Mode(mode)
    cfg = config.transport
    grid = cfg.grid()
    sensors = SensorArray(positions=cfg.positions, sigma=cfg.sigma)
    state = AscentState()
    logger.info("transport scenario, %s sensors, %d times", mode.value, cfg.n_times)
    for t in cfg.times():
        V = transport_basis(cfg.snapshot_thetas, t, grid)
        iterations = 0
        if mode is Mode.DYNAMIC:
            result = run_ascent(sensors, V, grid, config.placement, state)
            sensors = result.sensors
            iterations = result.iterations
        obs = build_representers(sensors, grid)
        A = gram_A(obs)
        B = gram_B(obs, V)
        stab = stability_constant(A, B)
        if stab.beta > 0:
            reports = []
            for theta in cfg.test_thetas:
                u = transport_case(theta[0], theta[1], t, grid)
                rec = reconstruct(A, B, V, obs, measure(u, obs), stability=stab, beta_min=0.0)
                reports.append(error_report(u, rec, V, stab.beta))
            maxima, failed = sweep_max(reports), False
        else:
            maxima, failed = _nan_maxima(), True
        yield RunRecord(
            t=float(t),
            beta=stab.beta,
            maxima=maxima,
            positions=np.array(sensors.positions),
            ascent_iterations=iterations,
            failed=failed,
        )
