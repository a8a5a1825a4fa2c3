# -*- coding: utf-8 -*-

"""
Symplectic dynamical low-rank evolution of the approximation space.

The reduced state of parameter ``theta_k`` is ``V c_k`` with ``V`` a
``2N x 2n`` orthosymplectic basis in the block form::

    V = [[Phi, -Psi],
         [Psi,  Phi]]

which is the real form of the complex ``N x n`` matrix ``Z = Phi + i Psi``
with ``w Z^H Z = I``. Multiplication by ``J_2n`` from the right is
multiplication of ``Z`` by ``i``, so block-form matrices satisfy
``V J_2n = J_2N V`` and ``V^T w J_2N V = J_2n`` follows from orthonormality.

The coupled evolution, with ``F`` the ``K x 2N`` matrix of vector-field
rows ``f_k`` and ``w_k = 1 / K``::

    Y  = F^T diag(w_k) C
    S  = C^T diag(w_k) C + J_2n^T (C^T diag(w_k) C) J_2n
    V' = (I - V V^T w) (Y + J_2N Y J_2n^T) S^-1
    C' = F (w V)
"""

import typing as T
import dataclasses
import logging
from pathlib import Path

import numpy as np
import scipy.linalg as la

from .discretization import SpatialGrid, GridFunction, write_grid_function
from .models import ModelSpec, initial_condition
from .exc import (
    DimensionError,
    RankCollapseError,
    RankDeficiencyError,
)

logger = logging.getLogger(__name__)

S_COND_MAX = 1e12
S_SHIFT = 1e-12


def canonical_j(n: int) -> np.ndarray:
    """
    ``J_2n = [[0, I], [-I, 0]]``, the matrix of ``(q, p) -> (p, -q)``.
    """
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def _apply_j(X: np.ndarray) -> np.ndarray:
    """
    ``J_2N X`` for a matrix with ``2N`` rows.
    """
    n = X.shape[0] // 2
    return np.concatenate([X[n:], -X[:n]], axis=0)


def _apply_jt_right(X: np.ndarray) -> np.ndarray:
    """
    ``X J_2n^T`` for a matrix with ``2n`` columns.
    """
    n = X.shape[1] // 2
    return np.concatenate([X[:, n:], -X[:, :n]], axis=1)


@dataclasses.dataclass(frozen=True, eq=False)
class OrthosymplecticBasis:
    """
    Block-form basis stored through its blocks ``Phi`` and ``Psi``.

    The constructor checks shapes only; :meth:`check_invariants` measures how
    far the basis is from the orthosymplectic set.
    """

    grid: SpatialGrid
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        psi = np.asarray(self.psi, dtype=float)
        if phi.ndim != 2 or phi.shape != psi.shape or phi.shape[0] != self.grid.n_dof:
            raise DimensionError(
                f"Phi and Psi must both be {self.grid.n_dof} x n, "
                f"got {phi.shape} and {psi.shape}"
            )
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)

    @classmethod
    def from_complex(cls, grid: SpatialGrid, Z: np.ndarray) -> "OrthosymplecticBasis":
        return cls(grid=grid, phi=Z.real.copy(), psi=Z.imag.copy())

    @property
    def n(self) -> int:
        return self.phi.shape[1]

    @property
    def complex(self) -> np.ndarray:
        return self.phi + 1j * self.psi

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.phi, -self.psi], [self.psi, self.phi]])

    def coefficients(self, vectors: np.ndarray) -> np.ndarray:
        """
        V-inner products of stacked ``[q; p]`` rows with the basis columns.

        :param vectors: ``K x 2N`` array or a single vector of length ``2N``
        """
        vectors = np.asarray(vectors, dtype=float)
        return self.grid.weight * (vectors @ self.matrix)

    def reconstruct(self, C: np.ndarray) -> np.ndarray:
        """
        Rows ``V c_k`` for every coefficient row of ``C``.
        """
        return np.asarray(C) @ self.matrix.T

    def check_invariants(self) -> T.Tuple[float, float]:
        """
        Max-norm defects of ``V^T w V = I`` and ``V^T w J_2N V = J_2n``.
        """
        V = self.matrix
        w = self.grid.weight
        eye = np.eye(2 * self.n)
        orth = np.abs(w * V.T @ V - eye).max()
        symp = np.abs(w * V.T @ _apply_j(V) - canonical_j(self.n)).max()
        return float(orth), float(symp)

    def retracted(self) -> "OrthosymplecticBasis":
        phi, psi = retract(self.phi, self.psi, self.grid.weight)
        return OrthosymplecticBasis(self.grid, phi, psi)


@dataclasses.dataclass(frozen=True, eq=False)
class CoefficientEnsemble:
    """
    Coefficients of the training parameters, row ``k`` belongs to ``theta_k``.
    """

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] % 2 != 0 or matrix.shape[0] < 1:
            raise DimensionError(
                f"coefficient matrix must be K x 2n with K >= 1, got {matrix.shape}"
            )
        object.__setattr__(self, "matrix", matrix)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)


def retract(
    phi: np.ndarray,
    psi: np.ndarray,
    weight: float = 1.0,
    rank_tol: float = 1e-12,
) -> T.Tuple[np.ndarray, np.ndarray]:
    """
    Map ``Z = Phi + i Psi`` to the unitary factor of its weighted thin QR
    decomposition, with the diagonal of ``R`` made real and positive.

    :raises RankDeficiencyError: if a diagonal entry of ``R`` vanishes
    """
    sqrt_w = np.sqrt(weight)
    Q, R = la.qr(sqrt_w * (phi + 1j * psi), mode="economic")
    diag = np.diag(R)
    scale = np.abs(diag)
    if scale.size and scale.min() <= rank_tol * max(scale.max(), 1.0):
        raise RankDeficiencyError(
            f"basis lost rank during retraction (smallest |R_jj| = {scale.min():.3e})"
        )
    Q = Q * (diag / scale)[None, :]
    Z = Q / sqrt_w
    return Z.real.copy(), Z.imag.copy()


def initialize(
    spec: ModelSpec,
    theta_h: np.ndarray,
    n: int,
) -> T.Tuple[OrthosymplecticBasis, CoefficientEnsemble]:
    """
    Rank-``n`` complex SVD of the initial snapshots ``q_k + i p_k``.

    :raises RankDeficiencyError: if the snapshots have fewer than ``n``
        numerically independent complex directions
    """
    theta_h = np.atleast_2d(np.asarray(theta_h, dtype=float))
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    grid = spec.grid
    snapshots = [initial_condition(spec, theta) for theta in theta_h]
    vectors = np.stack([u.vector for u in snapshots])
    Zs = np.stack([u.q + 1j * u.p for u in snapshots], axis=1)
    sqrt_w = np.sqrt(grid.weight)
    U, s, _ = la.svd(sqrt_w * Zs, full_matrices=False)
    tol = max(Zs.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    if n > rank:
        raise RankDeficiencyError(
            f"requested n = {n} but the {len(theta_h)} initial snapshots have "
            f"complex rank {rank}"
        )
    basis = OrthosymplecticBasis.from_complex(grid, U[:, :n] / sqrt_w)
    ensemble = CoefficientEnsemble(basis.coefficients(vectors))
    logger.info(
        "initial basis: n = %d, relative singular value tail %.3e",
        n,
        np.sqrt(np.sum(s[n:] ** 2)) / np.sqrt(np.sum(s**2)),
    )
    return basis, ensemble


def s_matrix(C: CoefficientEnsemble) -> np.ndarray:
    G = C.matrix.T @ (C.weights[:, None] * C.matrix)
    Jn = canonical_j(C.matrix.shape[1] // 2)
    S = G + Jn.T @ G @ Jn
    return 0.5 * (S + S.T)


def _solve_s(S: np.ndarray, rhs_t: np.ndarray) -> np.ndarray:
    """
    Solve ``S X = rhs_t``, with a Tikhonov shift when ``S`` is ill-conditioned.
    """
    size = S.shape[0]
    trace = float(np.trace(S))
    if not trace > 0:
        raise RankCollapseError(
            "S(C) vanishes; the coefficient ensemble carries no information, "
            "use a smaller n"
        )
    cond = np.linalg.cond(S)
    if cond > S_COND_MAX:
        shift = S_SHIFT * trace / size
        logger.debug("S(C) condition number %.3e, shift %.3e", cond, shift)
        S = S + shift * np.eye(size)
    try:
        factor = la.cho_factor(S, lower=True)
    except la.LinAlgError as e:
        raise RankCollapseError(
            f"S(C) is numerically singular (condition number {cond:.3e}); "
            f"use a smaller n"
        ) from e
    return la.cho_solve(factor, rhs_t)


def dlr_rhs(
    spec: ModelSpec,
    basis: OrthosymplecticBasis,
    C: CoefficientEnsemble,
    theta_h: np.ndarray,
) -> T.Tuple[np.ndarray, np.ndarray]:
    """
    Velocities of the basis (``2N x 2n``) and of the coefficients (``K x 2n``).
    """
    theta_h = np.atleast_2d(np.asarray(theta_h, dtype=float))
    if theta_h.shape[0] != C.size:
        raise DimensionError(
            f"{theta_h.shape[0]} training parameters but {C.size} coefficient rows"
        )
    V = basis.matrix
    w = basis.grid.weight
    reduced = basis.reconstruct(C.matrix)
    F = np.stack(
        [spec.system(theta).rhs(u) for theta, u in zip(theta_h, reduced)]
    )

    Y = F.T @ (C.weights[:, None] * C.matrix)
    X = Y + _apply_jt_right(_apply_j(Y))
    X = X - V @ (w * (V.T @ X))
    basis_velocity = _solve_s(s_matrix(C), X.T).T
    coef_velocity = w * (F @ V)
    return basis_velocity, coef_velocity


def _blocks(basis: OrthosymplecticBasis, velocity: np.ndarray) -> T.Tuple[np.ndarray, np.ndarray]:
    """
    ``(dPhi, dPsi)`` of a block-form velocity.
    """
    n_dof = basis.grid.n_dof
    n = basis.n
    return velocity[:n_dof, :n], velocity[n_dof:, :n]


def dlr_step(
    spec: ModelSpec,
    basis: OrthosymplecticBasis,
    C: CoefficientEnsemble,
    theta_h: np.ndarray,
    dt: float,
) -> T.Tuple[OrthosymplecticBasis, CoefficientEnsemble]:
    """
    One explicit midpoint step of the coupled system, then retraction of the
    basis and re-projection of the coefficients onto the retracted basis.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = basis.grid

    dv1, dc1 = dlr_rhs(spec, basis, C, theta_h)
    dphi, dpsi = _blocks(basis, dv1)
    half_basis = OrthosymplecticBasis(
        grid, basis.phi + 0.5 * dt * dphi, basis.psi + 0.5 * dt * dpsi
    )
    half_C = CoefficientEnsemble(C.matrix + 0.5 * dt * dc1)

    dv2, dc2 = dlr_rhs(spec, half_basis, half_C, theta_h)
    dphi, dpsi = _blocks(basis, dv2)
    new_basis = OrthosymplecticBasis(grid, basis.phi + dt * dphi, basis.psi + dt * dpsi)
    new_C = C.matrix + dt * dc2

    retracted = new_basis.retracted()
    reduced = new_basis.reconstruct(new_C)
    return retracted, CoefficientEnsemble(retracted.coefficients(reduced))


def dump_basis(
    directory: T.Union[str, Path],
    basis: OrthosymplecticBasis,
    index: int,
) -> T.List[Path]:
    """
    Write every basis column as a grid-function file
    ``basis_<index>_<column>.bin``.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for j, column in enumerate(basis.matrix.T):
        path = directory / f"basis_{index:06d}_{j:03d}.bin"
        write_grid_function(path, GridFunction.from_vector(basis.grid, column))
        paths.append(path)
    return paths
