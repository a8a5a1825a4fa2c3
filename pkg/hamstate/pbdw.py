# -*- coding: utf-8 -*-

"""
PBDW state estimation on a prior space ``V`` and an observation space ``W``.

With ``A`` the Gram matrix of the representers and ``B`` the cross Gram
matrix against an orthonormal basis of ``V``, every quantity reduces to small
dense linear algebra:

- ``M = B^T A^-1 B``; the stability constant ``beta^2`` is its smallest
  eigenvalue.
- ``v* = V c`` with ``M c = B^T A^-1 z``.
- ``u* = v* + W A^-1 (z - B c)``.

``A^-1`` is only ever applied through its Cholesky factor.
"""

import typing as T
import dataclasses
import logging

import numpy as np
import scipy.linalg as la

from .discretization import GridFunction, as_basis_matrix, norm
from .observation import ObservationOperator
from .exc import (
    DimensionError,
    make_ill_posed_error,
    make_singular_gram_error,
)

if T.TYPE_CHECKING:  # pragma: no cover
    from .models import HamiltonianSystem, ModelSpec

logger = logging.getLogger(__name__)

BETA_MIN = 1e-12
"""
Default floor below which a reconstruction is refused.
"""


@dataclasses.dataclass(frozen=True, eq=False)
class StabilityResult:
    """
    Smallest eigenpair of ``M = B^T A^-1 B``.

    :param beta_sq: smallest eigenvalue, clipped at zero
    :param eigvec_c: unit eigenvector of ``beta_sq``
    :param matrix_M: the matrix ``M``
    :param eigenvalues: all eigenvalues of ``M`` in ascending order
    """

    beta_sq: float
    beta: float
    eigvec_c: np.ndarray
    matrix_M: np.ndarray
    eigenvalues: np.ndarray

    @property
    def eigengap(self) -> float:
        if self.eigenvalues.shape[0] < 2:
            return np.inf
        return float(self.eigenvalues[1] - self.eigenvalues[0])


@dataclasses.dataclass(frozen=True, eq=False)
class Reconstruction:
    v_star: GridFunction
    coefficients: np.ndarray
    beta: float
    u_star: T.Optional[GridFunction] = None


@dataclasses.dataclass(frozen=True)
class ErrorReport:
    """
    Errors of one reconstruction against the true state.

    ``proj_err <= err <= bound`` whenever ``beta > 0``.
    """

    err: float
    proj_err: float
    bound: float
    ham_err: float
    ham_drift_truth: float
    ham_drift_rec: float


@dataclasses.dataclass(frozen=True)
class SweepMaxima:
    err: float
    proj_err: float
    bound: float
    ham_err: float
    ham_drift_truth: float
    ham_drift_rec: float


def cholesky_gram(A: np.ndarray) -> np.ndarray:
    """
    Lower Cholesky factor of ``A``.

    :raises SingularGramError: if ``A`` is not positive definite
    """
    try:
        return la.cholesky(A, lower=True)
    except la.LinAlgError:
        raise make_singular_gram_error(float(np.linalg.cond(A)))


def stability_constant(A: np.ndarray, B: np.ndarray) -> StabilityResult:
    """
    Compute ``beta^2 = lambda_min(B^T A^-1 B)`` with its eigenvector.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"A must be square, got shape {A.shape}")
    if B.ndim != 2 or B.shape[0] != A.shape[0]:
        raise DimensionError(
            f"B must have {A.shape[0]} rows to match A, got shape {B.shape}"
        )
    if B.shape[1] > B.shape[0]:
        raise DimensionError(
            f"prior space dimension {B.shape[1]} exceeds the number of "
            f"measurements {B.shape[0]}"
        )
    chol = cholesky_gram(A)
    X = la.solve_triangular(chol, B, lower=True)
    M = X.T @ X
    M = 0.5 * (M + M.T)
    eigenvalues, eigenvectors = la.eigh(M)
    c = eigenvectors[:, 0]
    # fix the sign so repeated runs return the same vector
    if c[np.argmax(np.abs(c))] < 0:
        c = -c
    beta_sq = max(float(eigenvalues[0]), 0.0)
    return StabilityResult(
        beta_sq=beta_sq,
        beta=float(np.sqrt(beta_sq)),
        eigvec_c=c,
        matrix_M=M,
        eigenvalues=eigenvalues,
    )


def reconstruct(
    A: np.ndarray,
    B: np.ndarray,
    basis: T.Any,
    obs: ObservationOperator,
    z: np.ndarray,
    include_w_correction: bool = False,
    beta_min: float = BETA_MIN,
    stability: T.Optional[StabilityResult] = None,
) -> Reconstruction:
    """
    PBDW reconstruction from the measurements ``z``.

    :param basis: orthosymplectic basis or ``2N x k`` V-orthonormal matrix
    :param include_w_correction: also return ``u* = v* + W A^-1 (z - B c)``
    :param beta_min: refuse to reconstruct when ``beta <= beta_min``
    :param stability: precomputed :func:`stability_constant` of ``(A, B)``

    :raises IllPosedReconstructionError: if ``beta <= beta_min``
    """
    grid = obs.grid
    matrix = as_basis_matrix(basis, grid)
    z = np.asarray(z, dtype=float)
    if z.shape != (A.shape[0],):
        raise DimensionError(f"expected {A.shape[0]} measurements, got shape {z.shape}")
    if stability is None:
        stability = stability_constant(A, B)
    if stability.beta <= beta_min:
        raise make_ill_posed_error(stability.beta, beta_min)

    chol = cholesky_gram(A)
    X = la.solve_triangular(chol, B, lower=True)
    r = la.solve_triangular(chol, z, lower=True)
    # least squares on the whitened system solves M c = B^T A^-1 z
    coefficients, *_ = la.lstsq(X, r)
    v_star = GridFunction.from_vector(grid, matrix @ coefficients)

    u_star = None
    if include_w_correction:
        residual = la.cho_solve((chol, True), z - B @ coefficients)
        u_star = GridFunction.from_vector(grid, v_star.vector + obs.matrix @ residual)
    return Reconstruction(
        v_star=v_star,
        coefficients=coefficients,
        beta=stability.beta,
        u_star=u_star,
    )


def projection(u: GridFunction, basis: T.Any) -> GridFunction:
    """
    Orthogonal projection of ``u`` onto the span of a V-orthonormal basis.
    """
    matrix = as_basis_matrix(basis, u.grid)
    coefficients = u.grid.weight * (matrix.T @ u.vector)
    return GridFunction.from_vector(u.grid, matrix @ coefficients)


def error_report(
    u_truth: GridFunction,
    rec: Reconstruction,
    basis: T.Any,
    beta: float,
    model: T.Optional["HamiltonianSystem"] = None,
    ham_truth_initial: T.Optional[float] = None,
    ham_rec_initial: T.Optional[float] = None,
) -> ErrorReport:
    """
    Compare a reconstruction with the true state.

    :param model: system providing ``hamiltonian(vector)``; without it the
        Hamiltonian fields are ``nan``
    :param ham_truth_initial: Hamiltonian of the truth at the first
        assimilation time, the drift reference; ``None`` means the current value
    :param ham_rec_initial: same for the reconstruction
    """
    err = norm(u_truth - rec.v_star)
    proj_err = norm(u_truth - projection(u_truth, basis))
    bound = proj_err / beta if beta > 0 else np.inf

    if model is None:
        ham_err = ham_drift_truth = ham_drift_rec = np.nan
    else:
        h_truth = model.hamiltonian(u_truth.vector)
        h_rec = model.hamiltonian(rec.v_star.vector)
        ham_err = abs(h_truth - h_rec)
        ham_drift_truth = (
            0.0 if ham_truth_initial is None else abs(h_truth - ham_truth_initial)
        )
        ham_drift_rec = 0.0 if ham_rec_initial is None else abs(h_rec - ham_rec_initial)
    return ErrorReport(
        err=err,
        proj_err=proj_err,
        bound=bound,
        ham_err=ham_err,
        ham_drift_truth=ham_drift_truth,
        ham_drift_rec=ham_drift_rec,
    )


def sweep_max(reports: T.Iterable[ErrorReport]) -> SweepMaxima:
    """
    Elementwise maxima of error reports over the test parameters.
    """
    reports = list(reports)
    if len(reports) == 0:
        raise ValueError("cannot aggregate an empty set of error reports")
    fields = [f.name for f in dataclasses.fields(ErrorReport)]
    return SweepMaxima(
        **{
            name: float(np.max([getattr(r, name) for r in reports]))
            for name in fields
        }
    )


def hamiltonian_lipschitz_estimate(
    spec: "ModelSpec",
    theta: T.Sequence[float],
    u: GridFunction,
    radius: float = 1e-4,
    n_dirs: int = 8,
    seed: int = 0,
) -> float:
    """
    Finite-difference estimate of the local Lipschitz constant of the
    Hamiltonian at ``u``.

    Takes the largest centered difference quotient
    ``|H(u + r e) - H(u - r e)| / (2 r)`` over the steepest-ascent direction
    and ``n_dirs`` random unit directions ``e``.
    """
    from .models import symplectic_inverse_apply

    system = spec.system(theta)
    vec = u.vector
    grid = u.grid
    rng = np.random.default_rng(seed)

    steepest = symplectic_inverse_apply(GridFunction.from_vector(grid, system.rhs(vec)))
    directions = [steepest.vector] + [
        rng.standard_normal(vec.shape[0]) for _ in range(n_dirs)
    ]
    estimate = 0.0
    for d in directions:
        d_norm = np.sqrt(grid.weight) * np.linalg.norm(d)
        if d_norm == 0:
            continue
        e = d / d_norm
        quotient = abs(
            system.hamiltonian(vec + radius * e) - system.hamiltonian(vec - radius * e)
        ) / (2.0 * radius)
        estimate = max(estimate, quotient)
    return float(estimate)
