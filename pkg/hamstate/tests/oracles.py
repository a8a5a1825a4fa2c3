# -*- coding: utf-8 -*-

"""
Slow, obviously correct reference implementations used by the tests.
"""

import typing as T

import numpy as np
import scipy.integrate as integrate

from ..discretization import SpatialGrid, GridFunction
from ..observation import SensorArray, ObservationOperator, build_representers


def naive_gram(obs: ObservationOperator, V: np.ndarray) -> T.Tuple[np.ndarray, np.ndarray]:
    """
    ``A`` and ``B`` entry by entry from the embedded representers.
    """
    grid = obs.grid
    size = 2 * obs.m
    reps = [obs.embedded(i) for i in range(size)]
    A = np.zeros((size, size))
    B = np.zeros((size, V.shape[1]))
    for i in range(size):
        for k in range(size):
            A[i, k] = grid.weight * np.sum(reps[i].vector * reps[k].vector)
        for s in range(V.shape[1]):
            B[i, s] = grid.weight * np.sum(reps[i].vector * V[:, s])
    return A, B


def naive_stability(obs: ObservationOperator, V: np.ndarray) -> float:
    """
    ``beta^2`` as the smallest eigenvalue of ``B^T A^-1 B`` with a dense solve.
    """
    A, B = naive_gram(obs, V)
    M = B.T @ np.linalg.solve(A, B)
    return max(float(np.linalg.eigvalsh(0.5 * (M + M.T))[0]), 0.0)


def kkt_reconstruct(obs: ObservationOperator, V: np.ndarray, z: np.ndarray) -> np.ndarray:
    """
    Minimum-norm state consistent with the data, from the saddle point system
    ``[[A, B], [B^T, 0]] [eta; c] = [z; 0]``; returns ``V c``.
    """
    A, B = naive_gram(obs, V)
    k = B.shape[1]
    K = np.block([[A, B], [B.T, np.zeros((k, k))]])
    rhs = np.concatenate([z, np.zeros(k)])
    sol = np.linalg.solve(K, rhs)
    return V @ sol[A.shape[0]:]


def random_orthonormal(grid: SpatialGrid, k: int, rng: np.random.Generator) -> np.ndarray:
    """
    ``2N x k`` matrix of V-orthonormal smooth random columns.
    """
    coords = grid.coordinates()
    columns = []
    for _ in range(k):
        centre = rng.uniform(-1.0, 1.0, size=grid.dim)
        width = rng.uniform(0.8, 2.0)
        dist_sq = sum((c - x0) ** 2 for c, x0 in zip(coords, centre))
        bump = np.exp(-dist_sq / (2 * width**2))
        columns.append(
            np.concatenate(
                [
                    bump * rng.uniform(-1.0, 1.0),
                    bump * np.cos(coords[0] * rng.uniform(0.2, 1.0)),
                ]
            )
        )
    sqrt_w = np.sqrt(grid.weight)
    Q, _ = np.linalg.qr(sqrt_w * np.stack(columns, axis=1))
    return Q / sqrt_w


def finite_difference_grad(
    sensors: SensorArray,
    grid: SpatialGrid,
    V: np.ndarray,
    step: float = 1e-6,
) -> np.ndarray:
    """
    Central differences of :func:`naive_stability` in every sensor coordinate.
    """
    grad = np.zeros_like(sensors.positions)
    for j in range(sensors.m):
        for axis in range(sensors.dim):
            values = []
            for sign in (1.0, -1.0):
                pos = np.array(sensors.positions)
                pos[j, axis] += sign * step
                obs = build_representers(sensors.moved(pos), grid)
                values.append(naive_stability(obs, V))
            grad[j, axis] = (values[0] - values[1]) / (2.0 * step)
    return grad


def complex_svd_tail(vectors: np.ndarray, grid: SpatialGrid, n: int) -> float:
    """
    Relative weighted norm of the snapshots ``q + i p`` outside their best
    rank-``n`` complex approximation.
    """
    n_dof = grid.n_dof
    Z = (vectors[:, :n_dof] + 1j * vectors[:, n_dof:]).T
    s = np.linalg.svd(np.sqrt(grid.weight) * Z, compute_uv=False)
    return float(np.sqrt(np.sum(s[n:] ** 2) / np.sum(s**2)))


def gaussian_mass(theta_1: float, centre: float, half_extent: float) -> float:
    """
    Integral over ``[-L, L]`` of the unit-mass Gaussian of width ``theta_1``
    centred at ``centre``, by adaptive quadrature.
    """
    value, _ = integrate.quad(
        lambda x: np.exp(-((x - centre) ** 2) / (2 * theta_1**2))
        / (np.sqrt(2 * np.pi) * theta_1),
        -half_extent,
        half_extent,
        points=[centre],
        limit=200,
    )
    return float(value)


def v_norm(f: GridFunction) -> float:
    return float(np.sqrt(f.grid.weight * np.sum(f.vector**2)))
