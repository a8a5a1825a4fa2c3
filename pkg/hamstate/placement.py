# -*- coding: utf-8 -*-

"""
Sensor placement by gradient ascent on ``beta^2``.

``beta^2(x)`` is the smallest eigenvalue of ``M = B^T A^-1 B``. When it is
simple, with unit eigenvector ``c`` and ``y = A^-1 B c``, the derivative with
respect to the ``l``-th coordinate of sensor ``j`` is::

    2 y_j (B_D c - A_D y)_j

where ``(B_D)_js = <d omega_j, v_s>`` and ``(A_D)_jk = <d omega_j, omega_k>``.
Sensor ``j`` moves both measurement ``j`` (on ``q``) and ``m + j`` (on ``p``),
so its gradient is the sum of the two contributions.

For an orthosymplectic basis every eigenvalue of ``M`` is double. ``beta^2``
is still smooth as long as the pair stays apart from the next one, and the
formula gives the same value for any unit vector of the pair, so the crossing
test skips the partner.
"""

import typing as T
import csv
import dataclasses
import logging
import warnings
from pathlib import Path

import numpy as np
import scipy.linalg as la

from .discretization import SpatialGrid, as_basis_matrix
from .observation import (
    SensorArray,
    ObservationOperator,
    build_representers,
    gram_A,
    gram_B,
    representer_derivatives,
)
from .pbdw import StabilityResult, cholesky_gram, stability_constant
from .exc import (
    EigenvalueCrossingWarning,
    SingularGramError,
    make_config_error,
)

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class PlacementConfig:
    """
    Parameters of the ascent.

    :param l_max: maximum ascent iterations per call
    :param alpha0: first trial step, in units of ``sigma / max|grad|``
    :param armijo_shrink: backtracking factor
    :param armijo_slope: sufficient increase fraction of the Armijo test
    :param max_backtracks: trials per iteration before giving up
    :param lambda_penalty: inertia weight, only 0 is supported
    :param step_growth: factor applied to the last accepted step to get the
        next first trial
    :param max_move_sigmas: cap on the move of any sensor in one iteration,
        in units of ``sigma``
    :param grad_tol: stop when ``max|grad| <= grad_tol``
    :param eigengap_tol: below this gap between the two smallest eigenvalues
        of ``M`` the gradient is reported as ill-defined
    """

    l_max: int = 5
    alpha0: float = 0.1
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-4
    max_backtracks: int = 20
    lambda_penalty: float = 0.0
    step_growth: float = 2.0
    max_move_sigmas: float = 5.0
    grad_tol: float = 1e-12
    eigengap_tol: float = 1e-12

    def __post_init__(self):
        if self.l_max < 0:
            raise make_config_error("placement.l_max", f"must be >= 0, got {self.l_max}")
        if not self.alpha0 > 0:
            raise make_config_error("placement.alpha0", f"must be > 0, got {self.alpha0}")
        if not 0 < self.armijo_shrink < 1:
            raise make_config_error(
                "placement.armijo_shrink", f"must be in (0, 1), got {self.armijo_shrink}"
            )
        if not 0 <= self.armijo_slope < 1:
            raise make_config_error(
                "placement.armijo_slope", f"must be in [0, 1), got {self.armijo_slope}"
            )
        if self.max_backtracks < 0:
            raise make_config_error(
                "placement.max_backtracks", f"must be >= 0, got {self.max_backtracks}"
            )
        if self.lambda_penalty != 0:
            raise make_config_error(
                "placement.lambda_penalty",
                f"only first-order ascent (0) is supported, got {self.lambda_penalty}",
            )
        if not self.step_growth >= 1:
            raise make_config_error(
                "placement.step_growth", f"must be >= 1, got {self.step_growth}"
            )
        if not self.max_move_sigmas > 0:
            raise make_config_error(
                "placement.max_move_sigmas", f"must be > 0, got {self.max_move_sigmas}"
            )


@dataclasses.dataclass
class AscentState:
    """
    Warm-start memory carried from one assimilation time to the next.
    """

    last_step: T.Optional[float] = None


@dataclasses.dataclass
class AscentResult:
    sensors: SensorArray
    beta_sq_history: T.List[float]
    step_sizes: T.List[float]
    grad_norms: T.List[float]
    iterations: int = 0
    converged: bool = False
    warnings: T.List[str] = dataclasses.field(default_factory=list)

    @property
    def beta_sq(self) -> float:
        return self.beta_sq_history[-1]


def is_complex_structured(V: np.ndarray, n_dof: int, atol: float = 1e-12) -> bool:
    """
    Whether ``V = [[Phi, -Psi], [Psi, Phi]]``. Then ``V`` commutes with the
    canonical rotation and, since the ``q`` and ``p`` kernels coincide, every
    eigenvalue of ``M`` comes with a partner of equal value.
    """
    k = V.shape[1]
    if k % 2:
        return False
    h = k // 2
    return bool(
        np.allclose(V[:n_dof, h:], -V[n_dof:, :h], rtol=0, atol=atol)
        and np.allclose(V[n_dof:, h:], V[:n_dof, :h], rtol=0, atol=atol)
    )


def crossing_gap(stab: StabilityResult, paired: bool) -> float:
    """
    Distance from ``beta^2`` to the next eigenvalue of ``M`` that is not its
    partner under the complex structure.
    """
    offset = 2 if paired else 1
    if stab.eigenvalues.shape[0] <= offset:
        return np.inf
    return float(stab.eigenvalues[offset] - stab.eigenvalues[0])


def _check_eigengap(stab: StabilityResult, tol: float, paired: bool):
    gap = crossing_gap(stab, paired)
    if gap < tol:
        warnings.warn(
            f"the two smallest distinct eigenvalues of M are {gap:.3e} apart; "
            f"beta^2 is not differentiable here, using the computed eigenvector",
            EigenvalueCrossingWarning,
            stacklevel=3,
        )


def grad_beta_sq(
    obs: ObservationOperator,
    basis: T.Any,
    stab: StabilityResult,
    A: T.Optional[np.ndarray] = None,
    B: T.Optional[np.ndarray] = None,
    eigengap_tol: float = 1e-12,
) -> np.ndarray:
    """
    Gradient of ``beta^2`` with respect to the sensor positions, ``m x d``,
    using the block-diagonal structure of ``A``.
    """
    grid = obs.grid
    V = as_basis_matrix(basis, grid)
    _check_eigengap(stab, eigengap_tol, is_complex_structured(V, grid.n_dof))
    A = gram_A(obs) if A is None else A
    B = gram_B(obs, V) if B is None else B
    n, m, w = grid.n_dof, obs.m, grid.weight
    c = stab.eigvec_c

    blocks = []
    for rows, kernel, V_half in (
        (slice(0, m), obs.w_q, V[:n]),
        (slice(m, 2 * m), obs.w_p, V[n:]),
    ):
        chol = cholesky_gram(A[rows, rows])
        b_c = B[rows] @ c
        y = la.cho_solve((chol, True), b_c)
        blocks.append((y, kernel, V_half))

    grad = np.zeros((m, grid.dim))
    for axis in range(grid.dim):
        d_omega = representer_derivatives(obs, axis)
        for y, kernel, V_half in blocks:
            b_d = w * (d_omega.T @ V_half)
            a_d = w * (d_omega.T @ kernel)
            grad[:, axis] += 2.0 * y * (b_d @ c - a_d @ y)
    return grad


def grad_beta_sq_generic(
    obs: ObservationOperator,
    basis: T.Any,
    stab: StabilityResult,
) -> np.ndarray:
    """
    Same gradient from the full ``2m x 2m`` matrices, without using the block
    structure; entries ``j`` and ``m + j`` are summed per sensor.
    """
    grid = obs.grid
    V = as_basis_matrix(basis, grid)
    A = gram_A(obs)
    B = gram_B(obs, V)
    n, m, w = grid.n_dof, obs.m, grid.weight
    W = obs.matrix
    c = stab.eigvec_c
    y = la.cho_solve((cholesky_gram(A), True), B @ c)

    grad = np.zeros((m, grid.dim))
    for axis in range(grid.dim):
        d_omega = representer_derivatives(obs, axis)
        W_D = np.zeros_like(W)
        W_D[:n, :m] = d_omega
        W_D[n:, m:] = d_omega
        B_D = w * (W_D.T @ V)
        A_D = w * (W_D.T @ W)
        full = 2.0 * y * (B_D @ c - A_D @ y)
        grad[:, axis] = full[:m] + full[m:]
    return grad


def _evaluate(sensors: SensorArray, grid: SpatialGrid, V: np.ndarray):
    obs = build_representers(sensors, grid)
    A = gram_A(obs)
    B = gram_B(obs, V)
    return obs, A, B, stability_constant(A, B)


def run_ascent(
    sensors: SensorArray,
    basis: T.Any,
    grid: SpatialGrid,
    cfg: PlacementConfig,
    state: T.Optional[AscentState] = None,
) -> AscentResult:
    """
    At most ``cfg.l_max`` gradient-ascent iterations with Armijo backtracking.

    ``beta^2`` never decreases: a step is only accepted when it passes the
    sufficient increase test, and the ascent stops at the first iteration
    where every trial fails.

    :param state: warm-start memory, updated in place with the last accepted
        step
    """
    V = as_basis_matrix(basis, grid)
    state = AscentState() if state is None else state
    sigma = sensors.sigma
    obs, A, B, stab = _evaluate(sensors, grid, V)
    result = AscentResult(
        sensors=sensors,
        beta_sq_history=[stab.beta_sq],
        step_sizes=[],
        grad_norms=[],
    )

    for iteration in range(cfg.l_max):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", EigenvalueCrossingWarning)
            grad = grad_beta_sq(obs, V, stab, A=A, B=B, eigengap_tol=cfg.eigengap_tol)
        for record in caught:
            result.warnings.append(str(record.message))
            warnings.warn(record.message, record.category, stacklevel=2)

        g_inf = float(np.abs(grad).max())
        result.grad_norms.append(g_inf)
        if g_inf <= cfg.grad_tol:
            result.converged = True
            break

        if state.last_step is None:
            alpha = cfg.alpha0 * sigma / g_inf
        else:
            alpha = state.last_step * cfg.step_growth
        alpha = min(alpha, cfg.max_move_sigmas * sigma / g_inf)
        g_sq = float(np.sum(grad**2))

        accepted = None
        for _ in range(cfg.max_backtracks + 1):
            trial = sensors.moved(grid.wrap(result.sensors.positions + alpha * grad))
            try:
                evaluation = _evaluate(trial, grid, V)
            except SingularGramError:
                alpha *= cfg.armijo_shrink
                continue
            target = stab.beta_sq + cfg.armijo_slope * alpha * g_sq
            logger.debug(
                "line search: alpha %.3e, beta^2 %.6e (need %.6e)",
                alpha,
                evaluation[3].beta_sq,
                target,
            )
            if evaluation[3].beta_sq >= target:
                accepted = (trial, evaluation)
                break
            alpha *= cfg.armijo_shrink

        if accepted is None:
            logger.debug("line search failed at iteration %d, keeping best so far", iteration)
            break
        state.last_step = alpha
        result.sensors, (obs, A, B, stab) = accepted
        result.beta_sq_history.append(stab.beta_sq)
        result.step_sizes.append(alpha)
        result.iterations = iteration + 1

    logger.debug(
        "ascent: %d iterations, beta^2 %.6e -> %.6e",
        result.iterations,
        result.beta_sq_history[0],
        result.beta_sq_history[-1],
    )
    return result


def sensors_update(
    sensors: SensorArray,
    basis: T.Any,
    cfg: PlacementConfig,
    grid: T.Optional[SpatialGrid] = None,
    state: T.Optional[AscentState] = None,
) -> SensorArray:
    """
    Move the sensors uphill on ``beta^2`` for the current basis.

    :param grid: defaults to ``basis.grid``
    """
    if grid is None:
        grid = basis.grid
    return run_ascent(sensors, basis, grid, cfg, state).sensors


ASCENT_CSV_COLUMNS = ("t", "iteration", "beta_sq", "step", "grad_norm")


def write_ascent_trace(
    path: T.Union[str, Path],
    t: float,
    result: AscentResult,
) -> None:
    """
    Append one row per ascent iteration; the header is written with the
    first row of a new file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    is_new = not path.exists()
    with path.open("a", newline="") as f:
        writer = csv.writer(f)
        if is_new:
            writer.writerow(ASCENT_CSV_COLUMNS)
        for i, beta_sq in enumerate(result.beta_sq_history):
            step = result.step_sizes[i - 1] if i > 0 else 0.0
            grad = result.grad_norms[i] if i < len(result.grad_norms) else float("nan")
            writer.writerow(
                [f"{t:.17g}", i, f"{beta_sq:.17g}", f"{step:.17g}", f"{grad:.17g}"]
            )
