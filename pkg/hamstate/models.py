# -*- coding: utf-8 -*-

"""
Parameterized Hamiltonian PDEs on a periodic grid.

Every model is written in canonical form ``u_t = J dH(u)`` with
``J(q, p) = (p, -q)``. The discrete Hamiltonians are chosen so that the
discrete vector fields are their exact J-gradients in the quadrature inner
product:

- NLS: ``H = 1/2 w sum[(D+ q)^2 + (D+ p)^2 - eps/2 (q^2 + p^2)^2]`` with the
  forward difference ``D+``; ``D+^T D+`` is minus the 3-point Laplacian.
- SWE: ``H = 1/2 w sum[h |D Phi|^2 + h^2]`` with centered differences ``D``,
  the same operator used in the flux ``D (h D Phi)``.
"""

import typing as T
import abc
import dataclasses
import enum

import numpy as np
import scipy.sparse as sp

from .discretization import (
    SpatialGrid,
    GridFunction,
    difference_matrix,
    laplacian,
    laplacian_matrix,
    partial,
)
from .exc import ParameterOutOfBoxError, DimensionError

Box = T.Tuple[T.Tuple[float, float], T.Tuple[float, float]]


class ModelKind(str, enum.Enum):
    NLS1D = "nls1d"
    SWE1D = "swe1d"
    SWE2D = "swe2d"


DEFAULT_BOXES: T.Dict[ModelKind, Box] = {
    ModelKind.NLS1D: ((0.98, 1.1), (0.98, 1.1)),
    ModelKind.SWE1D: ((1 / 10, 1 / 7), (2 / 10, 15 / 10)),
    ModelKind.SWE2D: ((1 / 5, 1 / 2), (11 / 10, 17 / 10)),
}


# ------------------------------------------------------------------------------
# Systems
# ------------------------------------------------------------------------------
class HamiltonianSystem(abc.ABC):
    """
    A Hamiltonian vector field on the stacked ``[q; p]`` vector of length ``2N``.
    """

    def __init__(self, grid: SpatialGrid):
        self.grid = grid

    def split(self, vec: np.ndarray) -> T.Tuple[np.ndarray, np.ndarray]:
        vec = np.asarray(vec, dtype=float)
        n = self.grid.n_dof
        if vec.shape[0] != 2 * n:
            raise DimensionError(f"expected {2 * n} entries, got shape {vec.shape}")
        return vec[:n], vec[n:]

    @abc.abstractmethod
    def rhs(self, vec: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @abc.abstractmethod
    def jacobian(self, vec: np.ndarray) -> sp.spmatrix:
        """
        Sparse ``2N x 2N`` Jacobian of :meth:`rhs`.
        """
        raise NotImplementedError

    @abc.abstractmethod
    def hamiltonian(self, vec: np.ndarray) -> float:
        raise NotImplementedError


class NLSSystem(HamiltonianSystem):
    """
    Cubic Schroedinger equation ``i psi_t + psi_xx + eps |psi|^2 psi = 0``
    split as ``psi = q + i p``.
    """

    def __init__(self, grid: SpatialGrid, eps: float):
        super().__init__(grid)
        self.eps = float(eps)
        self._lap = None

    @property
    def lap(self) -> sp.csr_matrix:
        if self._lap is None:
            self._lap = laplacian_matrix(self.grid)
        return self._lap

    def rhs(self, vec: np.ndarray) -> np.ndarray:
        q, p = self.split(vec)
        r = q**2 + p**2
        dq = -laplacian(p, self.grid) - self.eps * r * p
        dp = laplacian(q, self.grid) + self.eps * r * q
        return np.concatenate([dq, dp])

    def jacobian(self, vec: np.ndarray) -> sp.spmatrix:
        q, p = self.split(vec)
        eps = self.eps
        r = q**2 + p**2
        lap = self.lap
        return sp.bmat(
            [
                [sp.diags(-2.0 * eps * q * p), -lap - sp.diags(eps * (r + 2.0 * p**2))],
                [lap + sp.diags(eps * (r + 2.0 * q**2)), sp.diags(2.0 * eps * p * q)],
            ],
            format="csr",
        )

    def hamiltonian(self, vec: np.ndarray) -> float:
        q, p = self.split(vec)
        grad_sq = 0.0
        for axis in range(self.grid.dim):
            k = self.grid.array_axis(axis)
            h = self.grid.spacing[axis]
            for f in (q, p):
                arr = f.reshape(self.grid.shape)
                grad_sq = grad_sq + np.sum(((np.roll(arr, -1, axis=k) - arr) / h) ** 2)
        r = q**2 + p**2
        return float(0.5 * self.grid.weight * (grad_sq - 0.5 * self.eps * np.sum(r**2)))


class ShallowWaterSystem(HamiltonianSystem):
    """
    Shallow water equations in 1D or 2D with ``u = (h, Phi)``::

        h_t + div(h grad Phi) = 0
        Phi_t + |grad Phi|^2 / 2 + h = 0
    """

    def __init__(self, grid: SpatialGrid):
        super().__init__(grid)
        self._diff = None

    @property
    def diff(self) -> T.List[sp.csr_matrix]:
        if self._diff is None:
            self._diff = [difference_matrix(self.grid, a) for a in range(self.grid.dim)]
        return self._diff

    def rhs(self, vec: np.ndarray) -> np.ndarray:
        h, phi = self.split(vec)
        dh = np.zeros_like(h)
        dphi = -h.copy()
        for axis in range(self.grid.dim):
            d_phi = partial(phi, self.grid, axis)
            dh -= partial(h * d_phi, self.grid, axis)
            dphi -= 0.5 * d_phi**2
        return np.concatenate([dh, dphi])

    def jacobian(self, vec: np.ndarray) -> sp.spmatrix:
        h, phi = self.split(vec)
        n = self.grid.n_dof
        j_hh = sp.csr_matrix((n, n))
        j_hphi = sp.csr_matrix((n, n))
        j_phiphi = sp.csr_matrix((n, n))
        for D in self.diff:
            d_phi = D @ phi
            j_hh = j_hh - D @ sp.diags(d_phi)
            j_hphi = j_hphi - D @ sp.diags(h) @ D
            j_phiphi = j_phiphi - sp.diags(d_phi) @ D
        return sp.bmat(
            [[j_hh, j_hphi], [-sp.identity(n), j_phiphi]],
            format="csr",
        )

    def hamiltonian(self, vec: np.ndarray) -> float:
        h, phi = self.split(vec)
        grad_sq = sum(partial(phi, self.grid, a) ** 2 for a in range(self.grid.dim))
        return float(0.5 * self.grid.weight * np.sum(h * grad_sq + h**2))


# ------------------------------------------------------------------------------
# Model specification
# ------------------------------------------------------------------------------
@dataclasses.dataclass(frozen=True)
class ModelSpec:
    """
    One of the three test problems on a concrete grid.

    :param parameter_box: ``((lo_1, hi_1), (lo_2, hi_2))``. NLS parameters are
        ``(alpha, eps)``; SWE parameters are ``(alpha, beta_ic)``, the
        amplitude and the inverse squared width of the initial hump.
    """

    kind: ModelKind
    grid: SpatialGrid
    parameter_box: Box

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        box = tuple((float(lo), float(hi)) for lo, hi in self.parameter_box)
        if len(box) != 2 or any(not lo < hi for lo, hi in box):
            raise ValueError(f"parameter box must be two intervals lo < hi, got {box}")
        object.__setattr__(self, "parameter_box", box)
        expected_dim = 2 if kind is ModelKind.SWE2D else 1
        if self.grid.dim != expected_dim:
            raise DimensionError(
                f"model {kind.value} needs a {expected_dim}D grid, got {self.grid.dim}D"
            )

    @classmethod
    def nls1d(
        cls,
        n_x: int = 1000,
        half_extent: float = 20 * np.pi,
        parameter_box: T.Optional[Box] = None,
    ) -> "ModelSpec":
        return cls(
            kind=ModelKind.NLS1D,
            grid=SpatialGrid.uniform_1d(half_extent, n_x),
            parameter_box=parameter_box or DEFAULT_BOXES[ModelKind.NLS1D],
        )

    @classmethod
    def swe1d(
        cls,
        n_x: int = 1000,
        half_extent: float = 30.0,
        parameter_box: T.Optional[Box] = None,
    ) -> "ModelSpec":
        return cls(
            kind=ModelKind.SWE1D,
            grid=SpatialGrid.uniform_1d(half_extent, n_x),
            parameter_box=parameter_box or DEFAULT_BOXES[ModelKind.SWE1D],
        )

    @classmethod
    def swe2d(
        cls,
        n_x: int = 50,
        n_y: T.Optional[int] = None,
        half_extent: float = 8.0,
        parameter_box: T.Optional[Box] = None,
    ) -> "ModelSpec":
        return cls(
            kind=ModelKind.SWE2D,
            grid=SpatialGrid.uniform_2d(half_extent, half_extent, n_x, n_y or n_x),
            parameter_box=parameter_box or DEFAULT_BOXES[ModelKind.SWE2D],
        )

    def contains(self, theta: T.Sequence[float]) -> bool:
        return all(lo <= t <= hi for t, (lo, hi) in zip(theta, self.parameter_box))

    def check_parameter(self, theta: T.Sequence[float]) -> T.Tuple[float, float]:
        theta = tuple(float(t) for t in theta)
        if len(theta) != 2:
            raise DimensionError(f"theta must have two entries, got {theta}")
        if not self.contains(theta):
            raise ParameterOutOfBoxError(
                f"theta = {theta} is outside the parameter box {self.parameter_box} "
                f"of model {self.kind.value}"
            )
        return theta

    def system(self, theta: T.Sequence[float]) -> HamiltonianSystem:
        theta = self.check_parameter(theta)
        if self.kind is ModelKind.NLS1D:
            return NLSSystem(self.grid, eps=theta[1])
        return ShallowWaterSystem(self.grid)


@dataclasses.dataclass(frozen=True, eq=False)
class ParameterGrid:
    """
    Training set ``theta_h`` and test set ``theta_s``, each a tensor grid in
    the parameter box, one row per parameter.

    ``theta_h`` has ``k_h`` equispaced points per axis including the box
    corners; ``theta_s`` has ``k_s`` cell-centred points per axis, which are the
    midpoints of the ``theta_h`` lines when ``k_s = k_h - 1``.
    """

    theta_h: np.ndarray
    theta_s: np.ndarray

    @classmethod
    def uniform(cls, box: Box, k_h: int, k_s: int) -> "ParameterGrid":
        if k_h < 1 or k_s < 1:
            raise ValueError(f"need at least one point per axis, got k_h={k_h}, k_s={k_s}")
        train_axes = [
            np.linspace(lo, hi, k_h) if k_h > 1 else np.array([0.5 * (lo + hi)])
            for lo, hi in box
        ]
        test_axes = [lo + (np.arange(k_s) + 0.5) * (hi - lo) / k_s for lo, hi in box]
        theta_h = np.stack([a.ravel() for a in np.meshgrid(*train_axes, indexing="ij")], axis=1)
        theta_s = np.stack([a.ravel() for a in np.meshgrid(*test_axes, indexing="ij")], axis=1)
        return cls(theta_h=theta_h, theta_s=theta_s)

    def overlapping(self, tol: float = 1e-12) -> bool:
        diff = np.abs(self.theta_s[:, None, :] - self.theta_h[None, :, :]).max(axis=-1)
        return bool(np.any(diff <= tol))


# ------------------------------------------------------------------------------
# Public operations
# ------------------------------------------------------------------------------
def initial_condition(spec: ModelSpec, theta: T.Sequence[float]) -> GridFunction:
    """
    NLS: ``psi_0 = sqrt(2) / cosh(alpha x) * exp(i x / 2)``, ``q + i p = psi_0``.
    SWE: ``h_0 = 1 + alpha exp(-beta_ic |x|^2)``, ``Phi_0 = 0``.
    """
    theta = spec.check_parameter(theta)
    grid = spec.grid
    coords = grid.coordinates()
    if spec.kind is ModelKind.NLS1D:
        alpha = theta[0]
        x = coords[0]
        amplitude = np.sqrt(2.0) / np.cosh(alpha * x)
        return GridFunction(grid, q=amplitude * np.cos(0.5 * x), p=amplitude * np.sin(0.5 * x))
    alpha, beta_ic = theta
    dist_sq = sum(c**2 for c in coords)
    h0 = 1.0 + alpha * np.exp(-beta_ic * dist_sq)
    return GridFunction(grid, q=h0, p=np.zeros(grid.n_dof))


def vector_field(spec: ModelSpec, theta: T.Sequence[float], u: GridFunction) -> GridFunction:
    if u.grid != spec.grid:
        raise DimensionError(f"u lives on {u.grid}, the model on {spec.grid}")
    return GridFunction.from_vector(spec.grid, spec.system(theta).rhs(u.vector))


def hamiltonian(spec: ModelSpec, theta: T.Sequence[float], u: GridFunction) -> float:
    if u.grid != spec.grid:
        raise DimensionError(f"u lives on {u.grid}, the model on {spec.grid}")
    return spec.system(theta).hamiltonian(u.vector)


def symplectic_apply(u: GridFunction) -> GridFunction:
    """
    ``J(q, p) = (p, -q)``.
    """
    return GridFunction(u.grid, q=u.p, p=-u.q)


def symplectic_inverse_apply(u: GridFunction) -> GridFunction:
    """
    ``J^-1 (q, p) = (-p, q)``.
    """
    return GridFunction(u.grid, q=-u.p, p=u.q)


def hump_location(u: GridFunction) -> np.ndarray:
    """
    Position of the maximum of ``sqrt(q^2 + p^2)``.
    """
    grid = u.grid
    idx = int(np.argmax(u.q**2 + u.p**2))
    return np.array([c[idx] for c in grid.coordinates()])
