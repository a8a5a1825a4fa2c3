# -*- coding: utf-8 -*-

"""
Ground-truth trajectories from the implicit midpoint rule.

Each step solves ``u+ = u + dt * F((u + u+) / 2)`` by Newton's method with the
analytic sparse Jacobian ``I - dt / 2 * dF``. The stopping test is the V-norm
of the nonlinear defect.

**Trajectory file**

Little-endian, after the grid-function header of
:mod:`hamstate.discretization`::

    count, n_steps, stride          (int64)
    t_final, theta_1, theta_2       (float64)
    count snapshots, q then p       (float64, 2N each)
    count stored times              (float64)
    count stored Hamiltonians       (float64)
"""

import typing as T
import csv
import dataclasses
import logging
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import (
    SpatialGrid,
    GridFunction,
    decode_header,
    encode_header,
)
from .models import HamiltonianSystem, ModelSpec, initial_condition
from .exc import (
    BinaryFormatError,
    NewtonConvergenceError,
    StepFailureError,
)

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-10
MAX_NEWTON = 25

_INT = np.dtype("<i8")
_FLOAT = np.dtype("<f8")


@dataclasses.dataclass(frozen=True)
class TimeGrid:
    t_final: float
    n_steps: int

    def __post_init__(self):
        if not self.t_final > 0 or self.n_steps < 1:
            raise ValueError(
                f"need t_final > 0 and n_steps >= 1, got {self.t_final}, {self.n_steps}"
            )

    @property
    def dt(self) -> float:
        return self.t_final / self.n_steps

    def stored_steps(self, stride: int) -> np.ndarray:
        """
        Indices of the steps kept with the given stride, step 0 included.
        """
        if stride < 1:
            raise ValueError(f"stride must be >= 1, got {stride}")
        return np.arange(0, self.n_steps + 1, stride)


@dataclasses.dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Stored states of one high-fidelity solve.

    :param states: ``count x 2N`` array, row ``k`` is the ``[q; p]`` vector at
        ``times[k]``
    """

    grid: SpatialGrid
    time_grid: TimeGrid
    stride: int
    theta: T.Tuple[float, float]
    states: np.ndarray
    times: np.ndarray
    hamiltonians: np.ndarray

    def __post_init__(self):
        count = len(self.time_grid.stored_steps(self.stride))
        if self.states.shape != (count, 2 * self.grid.n_dof):
            raise ValueError(
                f"expected {count} snapshots of size {2 * self.grid.n_dof}, "
                f"got states of shape {self.states.shape}"
            )

    @property
    def count(self) -> int:
        return self.states.shape[0]

    def snapshot(self, k: int) -> GridFunction:
        return GridFunction.from_vector(self.grid, self.states[k])

    @property
    def snapshots(self) -> T.List[GridFunction]:
        return [self.snapshot(k) for k in range(self.count)]


def implicit_midpoint(
    system: HamiltonianSystem,
    vec: np.ndarray,
    dt: float,
    tol: float = NEWTON_TOL,
    max_newton: int = MAX_NEWTON,
) -> T.Tuple[np.ndarray, int]:
    """
    One implicit midpoint step of ``system`` from ``vec``.

    A negative ``dt`` steps backward; the rule is symmetric, so a step of
    ``-dt`` undoes a step of ``dt``.

    :return: the new state and the number of Newton iterations used

    :raises NewtonConvergenceError: if the defect is still above ``tol``
        after ``max_newton`` iterations
    """
    if dt == 0 or not np.isfinite(dt):
        raise ValueError(f"dt must be non-zero and finite, got {dt}")
    sqrt_w = np.sqrt(system.grid.weight)
    identity = sp.identity(vec.shape[0], format="csc")
    u_new = vec.copy()
    res_norm = np.inf
    for iteration in range(max_newton + 1):
        mid = 0.5 * (vec + u_new)
        residual = u_new - vec - dt * system.rhs(mid)
        res_norm = sqrt_w * float(np.linalg.norm(residual))
        logger.debug("newton iteration %d, residual %.3e", iteration, res_norm)
        if res_norm <= tol:
            return u_new, iteration
        if iteration == max_newton:
            break
        jac = identity - 0.5 * dt * system.jacobian(mid)
        u_new = u_new - spla.spsolve(sp.csc_matrix(jac), residual)
    raise NewtonConvergenceError(residual=res_norm, iterations=max_newton)


def midpoint_step(
    spec: ModelSpec,
    theta: T.Sequence[float],
    u: GridFunction,
    dt: float,
    tol: float = NEWTON_TOL,
    max_newton: int = MAX_NEWTON,
) -> GridFunction:
    vec, _ = implicit_midpoint(spec.system(theta), u.vector, dt, tol, max_newton)
    return GridFunction.from_vector(spec.grid, vec)


def solve_trajectory(
    spec: ModelSpec,
    theta: T.Sequence[float],
    time_grid: TimeGrid,
    stride: int,
    initial: T.Optional[GridFunction] = None,
    tol: float = NEWTON_TOL,
    max_newton: int = MAX_NEWTON,
) -> Trajectory:
    """
    Integrate from the model's initial condition (or ``initial``) to the
    final time, keeping every ``stride``-th state and its Hamiltonian.

    :raises StepFailureError: with the index of the failing step
    """
    theta = spec.check_parameter(theta)
    system = spec.system(theta)
    u0 = initial_condition(spec, theta) if initial is None else initial
    stored = time_grid.stored_steps(stride)
    dt = time_grid.dt

    states = np.empty((len(stored), 2 * spec.grid.n_dof))
    hamiltonians = np.empty(len(stored))
    vec = u0.vector
    states[0] = vec
    hamiltonians[0] = system.hamiltonian(vec)
    logger.info(
        "solving %s truth for theta = (%.6g, %.6g), %d steps",
        spec.kind.value,
        theta[0],
        theta[1],
        time_grid.n_steps,
    )
    k = 1
    for step in range(1, stored[-1] + 1):
        try:
            vec, _ = implicit_midpoint(system, vec, dt, tol, max_newton)
        except NewtonConvergenceError as e:
            raise StepFailureError(step, e) from e
        if step % stride == 0:
            states[k] = vec
            hamiltonians[k] = system.hamiltonian(vec)
            k += 1
    drift = abs(hamiltonians[-1] - hamiltonians[0])
    logger.info("done, Hamiltonian drift %.3e", drift)
    return Trajectory(
        grid=spec.grid,
        time_grid=time_grid,
        stride=stride,
        theta=theta,
        states=states,
        times=stored * dt,
        hamiltonians=hamiltonians,
    )


# ------------------------------------------------------------------------------
# Persistence
# ------------------------------------------------------------------------------
_META_SIZE = 48


def trajectory_file_size(grid: SpatialGrid, count: int) -> int:
    header = len(encode_header(grid))
    return header + _META_SIZE + 2 * grid.n_dof * 8 * count + 2 * 8 * count


def save_trajectory(
    path: T.Union[str, Path],
    traj: Trajectory,
    write_csv: bool = True,
) -> Path:
    """
    Write the binary trajectory file and, optionally, the companion
    ``(t, H)`` CSV next to it (same name, ``.csv`` suffix).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tg = traj.time_grid
    payload = b"".join(
        [
            encode_header(traj.grid),
            np.array([traj.count, tg.n_steps, traj.stride], dtype=_INT).tobytes(),
            np.array([tg.t_final, *traj.theta], dtype=_FLOAT).tobytes(),
            np.ascontiguousarray(traj.states, dtype=_FLOAT).tobytes(),
            np.asarray(traj.times, dtype=_FLOAT).tobytes(),
            np.asarray(traj.hamiltonians, dtype=_FLOAT).tobytes(),
        ]
    )
    path.write_bytes(payload)
    if write_csv:
        with path.with_suffix(".csv").open("w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["t", "H"])
            for t, h in zip(traj.times, traj.hamiltonians):
                writer.writerow([f"{t:.17g}", f"{h:.17g}"])
    return path


def _same_grid(a: SpatialGrid, b: SpatialGrid) -> bool:
    return a.counts == b.counts and np.allclose(a.spacing, b.spacing, rtol=1e-12, atol=0)


def load_trajectory(
    path: T.Union[str, Path],
    grid: T.Optional[SpatialGrid] = None,
) -> Trajectory:
    """
    Read a file written by :func:`save_trajectory`.

    :param grid: expected grid; the file must match it

    :raises BinaryFormatError: on malformed or truncated files and on a grid
        mismatch
    """
    path = Path(path)
    buffer = path.read_bytes()
    file_grid, offset = decode_header(buffer)
    if grid is not None:
        if not _same_grid(grid, file_grid):
            raise BinaryFormatError(
                f"{path} holds a trajectory on {file_grid.counts} points with "
                f"spacing {file_grid.spacing}, expected {grid.counts} with {grid.spacing}"
            )
        file_grid = grid
    if len(buffer) < offset + _META_SIZE:
        raise BinaryFormatError(f"truncated trajectory file {path}")
    count, n_steps, stride = (
        int(v) for v in np.frombuffer(buffer, dtype=_INT, count=3, offset=offset)
    )
    t_final, theta_1, theta_2 = (
        float(v) for v in np.frombuffer(buffer, dtype=_FLOAT, count=3, offset=offset + 24)
    )
    if count < 1 or n_steps < 1 or stride < 1:
        raise BinaryFormatError(
            f"malformed trajectory metadata: count={count}, n_steps={n_steps}, stride={stride}"
        )
    expected = trajectory_file_size(file_grid, count)
    if len(buffer) != expected:
        raise BinaryFormatError(
            f"truncated trajectory file {path}: expected {expected} bytes, got {len(buffer)}"
        )
    n2 = 2 * file_grid.n_dof
    pos = offset + _META_SIZE
    states = np.frombuffer(buffer, dtype=_FLOAT, count=count * n2, offset=pos)
    pos += 8 * count * n2
    times = np.frombuffer(buffer, dtype=_FLOAT, count=count, offset=pos)
    pos += 8 * count
    hamiltonians = np.frombuffer(buffer, dtype=_FLOAT, count=count, offset=pos)
    try:
        return Trajectory(
            grid=file_grid,
            time_grid=TimeGrid(t_final=t_final, n_steps=n_steps),
            stride=stride,
            theta=(theta_1, theta_2),
            states=states.reshape(count, n2).copy(),
            times=times.copy(),
            hamiltonians=hamiltonians.copy(),
        )
    except ValueError as e:
        raise BinaryFormatError(f"inconsistent trajectory file {path}: {e}") from e
