# -*- coding: utf-8 -*-

"""
Moving local-average sensors.

Each of the ``m`` sensors observes both components of ``u = (q, p)`` through the
same periodic Gaussian kernel, so there are ``2m`` measurements: the first ``m``
act on ``q``, the last ``m`` on ``p``. The kernels are the Riesz representers of
the measurement functionals in the discrete inner product, which makes every
Gram matrix a plain weighted dot product of sampled columns.
"""

import typing as T
import csv
import dataclasses
import logging
import warnings
from pathlib import Path

import numpy as np
import scipy.linalg as la

from .discretization import SpatialGrid, GridFunction, as_basis_matrix
from .exc import (
    DimensionError,
    NearSingularGramWarning,
    UnderResolvedRepresenterWarning,
    make_grid_mismatch_error,
)

logger = logging.getLogger(__name__)

COINCIDENCE_TOL = 1e-10
"""
Two sensors closer than this are reported as coincident.
"""


@dataclasses.dataclass(frozen=True, eq=False)
class SensorArray:
    """
    Positions of ``m`` Gaussian sensors of common width ``sigma``.

    :param positions: ``m x d`` array, row ``i`` is sensor ``i``
    :param sigma: standard deviation of the Gaussian kernel
    """

    positions: np.ndarray
    sigma: float

    def __post_init__(self):
        positions = np.array(self.positions, dtype=float)
        if positions.ndim == 1:
            positions = positions[:, None]
        if positions.ndim != 2 or positions.shape[0] < 1:
            raise DimensionError(
                f"sensor positions must be an m x d array with m >= 1, got shape {positions.shape}"
            )
        if not np.all(np.isfinite(positions)):
            raise ValueError("sensor positions must be finite")
        if not float(self.sigma) > 0:
            raise ValueError(f"sensor width sigma must be positive, got {self.sigma}")
        positions.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def m(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def moved(self, positions: np.ndarray) -> "SensorArray":
        return SensorArray(positions=positions, sigma=self.sigma)


@dataclasses.dataclass(frozen=True, eq=False)
class ObservationOperator:
    """
    Sampled representers of the ``2m`` measurements.

    ``w_q[:, j]`` is the kernel of measurement ``j`` (acting on ``q``) and
    ``w_p[:, j]`` the kernel of measurement ``m + j`` (acting on ``p``).
    Both are the same Gaussian.
    """

    grid: SpatialGrid
    sensors: SensorArray
    w_q: np.ndarray
    w_p: np.ndarray

    @property
    def m(self) -> int:
        return self.sensors.m

    @property
    def matrix(self) -> np.ndarray:
        """
        ``2N x 2m`` block matrix ``[[w_q, 0], [0, w_p]]`` of the representers.
        """
        n, m = self.w_q.shape
        out = np.zeros((2 * n, 2 * m))
        out[:n, :m] = self.w_q
        out[n:, m:] = self.w_p
        return out

    def embedded(self, i: int) -> GridFunction:
        """
        Representer of measurement ``i`` as a phase-space field.
        """
        m = self.m
        if not 0 <= i < 2 * m:
            raise IndexError(f"measurement index {i} out of range [0, {2 * m})")
        zeros = np.zeros(self.grid.n_dof)
        if i < m:
            return GridFunction(self.grid, q=self.w_q[:, i], p=zeros)
        return GridFunction(self.grid, q=zeros, p=self.w_p[:, i - m])


def _displacements(
    sensors: SensorArray,
    grid: SpatialGrid,
) -> T.List[np.ndarray]:
    """
    Minimum-image displacements ``x - x_s`` per axis, each of shape ``N x m``.
    """
    if sensors.dim != grid.dim:
        raise DimensionError(
            f"sensors live in {sensors.dim}D but the grid is {grid.dim}D"
        )
    positions = grid.wrap(sensors.positions)
    coords = grid.coordinates()
    return [
        grid.minimum_image(coords[axis][:, None] - positions[None, :, axis], axis)
        for axis in range(grid.dim)
    ]


def build_representers(sensors: SensorArray, grid: SpatialGrid) -> ObservationOperator:
    """
    Sample the periodic Gaussian kernel
    ``(2 pi sigma^2)^(-d/2) exp(-|x - x_s|^2 / (2 sigma^2))`` of every sensor.
    """
    sigma = sensors.sigma
    if sigma < min(grid.spacing):
        warnings.warn(
            f"sensor width sigma = {sigma:.3e} is below the grid spacing "
            f"{min(grid.spacing):.3e}; the representers are under-resolved",
            UnderResolvedRepresenterWarning,
            stacklevel=2,
        )
    dist_sq = sum(d**2 for d in _displacements(sensors, grid))
    norm_const = (2.0 * np.pi * sigma**2) ** (-0.5 * grid.dim)
    kernel = norm_const * np.exp(-0.5 * dist_sq / sigma**2)
    return ObservationOperator(grid=grid, sensors=sensors, w_q=kernel, w_p=kernel.copy())


def representer_derivatives(obs: ObservationOperator, axis: int) -> np.ndarray:
    """
    Derivative of each kernel column with respect to its own sensor coordinate
    along ``axis``: ``((x - x_s) / sigma^2) * omega``.
    """
    grid = obs.grid
    if not 0 <= axis < grid.dim:
        raise DimensionError(f"axis {axis} out of range for a {grid.dim}D grid")
    disp = _displacements(obs.sensors, grid)[axis]
    return disp / obs.sensors.sigma**2 * obs.w_q


def measure(u: GridFunction, obs: ObservationOperator) -> np.ndarray:
    """
    Measurement vector ``z`` of length ``2m``: ``z_i = <omega_i, u>``.
    """
    if u.grid != obs.grid:
        raise make_grid_mismatch_error("u", obs.grid, u.grid)
    w = obs.grid.weight
    return np.concatenate([w * (obs.w_q.T @ u.q), w * (obs.w_p.T @ u.p)])


def _check_coincident(sensors: SensorArray, grid: SpatialGrid):
    positions = grid.wrap(sensors.positions)
    m = sensors.m
    if m < 2:
        return
    diff = positions[:, None, :] - positions[None, :, :]
    for axis in range(grid.dim):
        diff[..., axis] = grid.minimum_image(diff[..., axis], axis)
    dist = np.sqrt(np.sum(diff**2, axis=-1))
    dist[np.diag_indices(m)] = np.inf
    closest = float(dist.min())
    if closest < COINCIDENCE_TOL:
        warnings.warn(
            f"two sensors are {closest:.3e} apart, the Gram matrix is near singular",
            NearSingularGramWarning,
            stacklevel=3,
        )


def gram_A(obs: ObservationOperator) -> np.ndarray:
    """
    Block-diagonal ``2m x 2m`` Gram matrix of the representers.
    """
    _check_coincident(obs.sensors, obs.grid)
    w = obs.grid.weight
    m = obs.m
    a_q = w * (obs.w_q.T @ obs.w_q)
    a_p = w * (obs.w_p.T @ obs.w_p)
    out = np.zeros((2 * m, 2 * m))
    # symmetrize the blocks so that A == A.T holds exactly
    out[:m, :m] = 0.5 * (a_q + a_q.T)
    out[m:, m:] = 0.5 * (a_p + a_p.T)
    return out


def gram_B(obs: ObservationOperator, basis: T.Any) -> np.ndarray:
    """
    Cross Gram matrix ``B_is = <omega_i, v_s>`` of shape ``2m x k``, stacked
    as ``[B_q; B_p]``.

    :param basis: an orthosymplectic basis or any ``2N x k`` matrix of
        V-orthonormal columns
    """
    grid = obs.grid
    matrix = as_basis_matrix(basis, grid)
    n = grid.n_dof
    w = grid.weight
    return np.vstack([w * (obs.w_q.T @ matrix[:n]), w * (obs.w_p.T @ matrix[n:])])


def add_noise(
    z: np.ndarray,
    obs: ObservationOperator,
    eps_noise: float,
    seed: int,
) -> np.ndarray:
    """
    Perturb measurements by ``delta z`` drawn uniformly on the sphere
    ``delta z^T A^-1 delta z = eps_noise^2``.

    The representer-space perturbation ``eta = W A^-1 delta z`` then has
    V-norm exactly ``eps_noise``.
    """
    z = np.asarray(z, dtype=float)
    if eps_noise < 0:
        raise ValueError(f"eps_noise must be non-negative, got {eps_noise}")
    if eps_noise == 0:
        return z.copy()
    if z.shape != (2 * obs.m,):
        raise DimensionError(f"expected {2 * obs.m} measurements, got shape {z.shape}")
    chol = la.cholesky(gram_A(obs), lower=True)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(z.shape[0])
    return z + eps_noise * (chol @ g) / np.linalg.norm(g)


def noise_norm(delta_z: np.ndarray, obs: ObservationOperator) -> float:
    """
    V-norm of the representer-space element produced by ``delta_z``.
    """
    chol = la.cholesky(gram_A(obs), lower=True)
    y = la.solve_triangular(chol, delta_z, lower=True)
    return float(np.linalg.norm(y))


SENSOR_CSV_COLUMNS = ("t", "sensor_index", "x", "y")


def write_sensor_trajectory(
    path: T.Union[str, Path],
    times: T.Sequence[float],
    positions: T.Sequence[np.ndarray],
) -> None:
    """
    Write sensor positions over time as CSV rows ``t, sensor_index, x[, y]``.
    """
    if len(times) != len(positions):
        raise ValueError(
            f"got {len(times)} times but {len(positions)} position arrays"
        )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dim = np.asarray(positions[0]).shape[1] if len(positions) else 1
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SENSOR_CSV_COLUMNS[: 2 + dim])
        for t, pos in zip(times, positions):
            for i, row in enumerate(np.asarray(pos, dtype=float)):
                writer.writerow([f"{t:.17g}", i] + [f"{v:.17g}" for v in row])
