# -*- coding: utf-8 -*-

"""
Periodic uniform grids and the discrete Hilbert space on top of them.

A phase-space state ``u = (q, p)`` is sampled on a periodic, uniform grid over
``[-L_x, L_x)`` (1D) or ``[-L_x, L_x) x [-L_y, L_y)`` (2D). The duplicate
periodic endpoint is excluded, so the spacing along each axis is ``h = 2L / N``
and the quadrature rule of the discrete ``L^2`` inner product is the rectangle
rule with the single weight ``prod(h)``.

**Storage convention**

2D fields are stored row-major, y first then x: the flat index of the sample
at ``(x_i, y_j)`` is ``j * N_x + i``. Axis ``0`` always means ``x`` and axis
``1`` means ``y``, regardless of the array axis they map to.

**Binary format**

:func:`write_grid_function` writes little-endian 64-bit values::

    dim, N_x[, N_y]          (int64)
    h_x[, h_y]               (float64)
    q block, then p block    (float64, N values each)
"""

import typing as T
import dataclasses
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .exc import (
    BinaryFormatError,
    DimensionError,
    make_grid_mismatch_error,
)

_INT = np.dtype("<i8")
_FLOAT = np.dtype("<f8")


@dataclasses.dataclass(frozen=True)
class QuadratureRule:
    """
    Uniform rectangle rule of a periodic grid, every node has the same weight.
    """

    weight: float

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError(f"quadrature weight must be positive, got {self.weight}")


def _half_extent(spacing: float, count: int) -> float:
    """
    Half extent ``L`` whose spacing ``2 L / count`` is exactly ``spacing``.

    ``0.5 * count * spacing`` can be an ulp away from such a value;
    neighbouring floats are searched, closest first.
    """
    guess = 0.5 * count * spacing
    lo = hi = guess
    candidates = [guess]
    for _ in range(4):
        lo = float(np.nextafter(lo, -np.inf))
        hi = float(np.nextafter(hi, np.inf))
        candidates.extend([lo, hi])
    for L in candidates:
        if 2.0 * L / count == spacing:
            return float(L)
    return float(guess)


def _canonical_half_extent(half_extent: float, count: int) -> float:
    """
    The representative of all half extents sharing the spacing of
    ``half_extent``. A grid rebuilt from its stored spacing gets the same one.
    """
    L = float(half_extent)
    for _ in range(4):
        snapped = _half_extent(2.0 * L / count, count)
        if snapped == L:
            break
        L = snapped
    return L


@dataclasses.dataclass(frozen=True)
class SpatialGrid:
    """
    Periodic uniform grid in 1 or 2 dimensions.

    :param half_extents: ``(L_x,)`` or ``(L_x, L_y)``, the domain is ``[-L, L)`` per axis
    :param counts: ``(N_x,)`` or ``(N_x, N_y)`` points per axis
    """

    half_extents: T.Tuple[float, ...]
    counts: T.Tuple[int, ...]

    def __post_init__(self):
        half_extents = tuple(float(v) for v in self.half_extents)
        counts = tuple(int(v) for v in self.counts)
        if len(half_extents) not in (1, 2) or len(half_extents) != len(counts):
            raise DimensionError(
                f"grid must be 1D or 2D with one extent and one count per axis, "
                f"got half_extents={half_extents}, counts={counts}"
            )
        if any(not L > 0 for L in half_extents):
            raise ValueError(f"half extents must be positive, got {half_extents}")
        if any(n < 2 for n in counts):
            raise ValueError(f"need at least 2 points per axis, got {counts}")
        half_extents = tuple(
            _canonical_half_extent(L, n) for L, n in zip(half_extents, counts)
        )
        object.__setattr__(self, "half_extents", half_extents)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def uniform_1d(cls, half_extent: float, n_x: int) -> "SpatialGrid":
        return cls(half_extents=(half_extent,), counts=(n_x,))

    @classmethod
    def uniform_2d(
        cls,
        half_extent_x: float,
        half_extent_y: float,
        n_x: int,
        n_y: int,
    ) -> "SpatialGrid":
        return cls(half_extents=(half_extent_x, half_extent_y), counts=(n_x, n_y))

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def spacing(self) -> T.Tuple[float, ...]:
        return tuple(2.0 * L / n for L, n in zip(self.half_extents, self.counts))

    @property
    def n_dof(self) -> int:
        """
        Number of grid points ``N``; a phase-space field has ``2N`` entries.
        """
        return int(np.prod(self.counts))

    @property
    def shape(self) -> T.Tuple[int, ...]:
        """
        Array shape of a field, y axis first.
        """
        return tuple(reversed(self.counts))

    @property
    def weight(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def quadrature(self) -> QuadratureRule:
        return QuadratureRule(weight=self.weight)

    def array_axis(self, axis: int) -> int:
        """
        Map a spatial axis (0 = x, 1 = y) to the axis of a field array of
        shape :attr:`shape`.
        """
        if not 0 <= axis < self.dim:
            raise DimensionError(f"axis {axis} out of range for a {self.dim}D grid")
        return self.dim - 1 - axis

    def axis_coordinates(self, axis: int) -> np.ndarray:
        n = self.counts[axis]
        return -self.half_extents[axis] + self.spacing[axis] * np.arange(n)

    def coordinates(self) -> T.List[np.ndarray]:
        """
        Flat coordinate arrays, one per spatial axis, each of length ``N``.
        """
        axes = [self.axis_coordinates(a) for a in range(self.dim)]
        # meshgrid with "xy" indexing gives arrays of shape (N_y, N_x)
        mesh = np.meshgrid(*axes, indexing="xy")
        return [m.ravel() for m in mesh]

    def wrap(self, points: np.ndarray) -> np.ndarray:
        """
        Map positions of shape ``(m, d)`` into ``[-L, L)`` per axis.
        """
        points = np.asarray(points, dtype=float)
        L = np.asarray(self.half_extents)
        return np.mod(points + L, 2.0 * L) - L

    def minimum_image(self, displacement: np.ndarray, axis: int) -> np.ndarray:
        """
        Shortest periodic representative of a displacement along ``axis``.
        """
        period = 2.0 * self.half_extents[axis]
        return displacement - period * np.round(displacement / period)

    def check_field(self, values: np.ndarray, what: str = "values") -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape[:1] != (self.n_dof,):
            raise make_grid_mismatch_error(what, f"{self.n_dof} rows", values.shape)
        return values


@dataclasses.dataclass(frozen=True, eq=False)
class GridFunction:
    """
    Phase-space field ``u = (q, p)`` sampled on a :class:`SpatialGrid`.
    """

    grid: SpatialGrid
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        p = np.asarray(self.p, dtype=float).ravel()
        n = self.grid.n_dof
        if q.shape != (n,):
            raise make_grid_mismatch_error("q", n, q.shape)
        if p.shape != (n,):
            raise make_grid_mismatch_error("p", n, p.shape)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def zeros(cls, grid: SpatialGrid) -> "GridFunction":
        return cls(grid=grid, q=np.zeros(grid.n_dof), p=np.zeros(grid.n_dof))

    @classmethod
    def from_vector(cls, grid: SpatialGrid, vector: np.ndarray) -> "GridFunction":
        """
        Build from the stacked ``[q; p]`` layout of length ``2N``.
        """
        vector = np.asarray(vector, dtype=float)
        n = grid.n_dof
        if vector.shape != (2 * n,):
            raise make_grid_mismatch_error("vector", 2 * n, vector.shape)
        return cls(grid=grid, q=vector[:n], p=vector[n:])

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return GridFunction(self.grid, self.q + other.q, self.p + other.p)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return GridFunction(self.grid, self.q - other.q, self.p - other.p)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.grid, scalar * self.q, scalar * self.p)

    __rmul__ = __mul__


def _check_same_grid(f: GridFunction, g: GridFunction):
    if f.grid != g.grid:
        raise make_grid_mismatch_error("g", f.grid, g.grid)


def inner_product(f: GridFunction, g: GridFunction) -> float:
    """
    ``<f, g> = weight * (sum f.q * g.q + sum f.p * g.p)``.
    """
    _check_same_grid(f, g)
    return f.grid.weight * float(np.dot(f.q, g.q) + np.dot(f.p, g.p))


def norm(f: GridFunction) -> float:
    return float(np.sqrt(max(inner_product(f, f), 0.0)))


# ------------------------------------------------------------------------------
# Finite difference operators
#
# All operators accept arrays whose first dimension is N (a single scalar
# field, or N x k for k fields at once) and return the same shape.
# ------------------------------------------------------------------------------
def _as_grid_array(values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    values = grid.check_field(values)
    return values.reshape(grid.shape + values.shape[1:])


def laplacian(values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """
    Periodic 3-point (1D) / 5-point (2D) Laplacian.
    """
    arr = _as_grid_array(values, grid)
    out = np.zeros_like(arr)
    for axis, h in enumerate(grid.spacing):
        k = grid.array_axis(axis)
        out += (np.roll(arr, -1, axis=k) - 2.0 * arr + np.roll(arr, 1, axis=k)) / h**2
    return out.reshape(np.shape(values))


def partial(values: np.ndarray, grid: SpatialGrid, axis: int) -> np.ndarray:
    """
    Centered second-order periodic difference along ``axis``.
    """
    arr = _as_grid_array(values, grid)
    k = grid.array_axis(axis)
    h = grid.spacing[axis]
    out = (np.roll(arr, -1, axis=k) - np.roll(arr, 1, axis=k)) / (2.0 * h)
    return out.reshape(np.shape(values))


def gradient(values: np.ndarray, grid: SpatialGrid) -> T.List[np.ndarray]:
    return [partial(values, grid, axis) for axis in range(grid.dim)]


def divergence(components: T.Sequence[np.ndarray], grid: SpatialGrid) -> np.ndarray:
    if len(components) != grid.dim:
        raise DimensionError(
            f"divergence needs {grid.dim} components, got {len(components)}"
        )
    return sum(partial(c, grid, axis) for axis, c in enumerate(components))


def _periodic_stencil_1d(n: int, offsets: T.Dict[int, float]) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    idx = np.arange(n)
    for offset, value in offsets.items():
        rows.append(idx)
        cols.append((idx + offset) % n)
        vals.append(np.full(n, value))
    # duplicates (tiny grids) are summed, matching np.roll semantics
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()


def _embed(grid: SpatialGrid, axis: int, op_1d: sp.spmatrix) -> sp.csr_matrix:
    if grid.dim == 1:
        return sp.csr_matrix(op_1d)
    n_x, n_y = grid.counts
    if axis == 0:
        return sp.kron(sp.identity(n_y), op_1d, format="csr")
    return sp.kron(op_1d, sp.identity(n_x), format="csr")


def difference_matrix(grid: SpatialGrid, axis: int) -> sp.csr_matrix:
    """
    Sparse matrix of :func:`partial` along ``axis``.
    """
    grid.array_axis(axis)
    h = grid.spacing[axis]
    op = _periodic_stencil_1d(grid.counts[axis], {1: 0.5 / h, -1: -0.5 / h})
    return _embed(grid, axis, op)


def laplacian_matrix(grid: SpatialGrid) -> sp.csr_matrix:
    """
    Sparse matrix of :func:`laplacian`.
    """
    out = sp.csr_matrix((grid.n_dof, grid.n_dof))
    for axis, h in enumerate(grid.spacing):
        op = _periodic_stencil_1d(
            grid.counts[axis], {1: 1.0 / h**2, 0: -2.0 / h**2, -1: 1.0 / h**2}
        )
        out = out + _embed(grid, axis, op)
    return out.tocsr()


# ------------------------------------------------------------------------------
# Binary I/O
# ------------------------------------------------------------------------------
def header_size(grid: SpatialGrid) -> int:
    return 8 * (1 + 2 * grid.dim)


def encode_header(grid: SpatialGrid) -> bytes:
    return (
        np.array([grid.dim, *grid.counts], dtype=_INT).tobytes()
        + np.array(grid.spacing, dtype=_FLOAT).tobytes()
    )


def decode_header(buffer: bytes) -> T.Tuple[SpatialGrid, int]:
    """
    Parse a grid header.

    :return: the grid and the number of bytes consumed
    """
    if len(buffer) < 8:
        raise BinaryFormatError("malformed header: file shorter than 8 bytes")
    dim = int(np.frombuffer(buffer, dtype=_INT, count=1)[0])
    if dim not in (1, 2):
        raise BinaryFormatError(f"malformed header: dim = {dim}, expected 1 or 2")
    size = 8 * (1 + 2 * dim)
    if len(buffer) < size:
        raise BinaryFormatError("malformed header: truncated grid description")
    counts = np.frombuffer(buffer, dtype=_INT, count=dim, offset=8)
    spacing = np.frombuffer(buffer, dtype=_FLOAT, count=dim, offset=8 * (1 + dim))
    if np.any(counts < 2) or not np.all(spacing > 0):
        raise BinaryFormatError(
            f"malformed header: counts = {counts.tolist()}, spacing = {spacing.tolist()}"
        )
    grid = SpatialGrid(
        half_extents=tuple(_half_extent(float(h), int(n)) for n, h in zip(counts, spacing)),
        counts=tuple(int(n) for n in counts),
    )
    return grid, size


def write_grid_function(path: T.Union[str, Path], f: GridFunction) -> None:
    payload = np.concatenate([f.q, f.p]).astype(_FLOAT).tobytes()
    Path(path).write_bytes(encode_header(f.grid) + payload)


def read_grid_function(path: T.Union[str, Path]) -> GridFunction:
    buffer = Path(path).read_bytes()
    grid, offset = decode_header(buffer)
    n = grid.n_dof
    if len(buffer) != offset + 16 * n:
        raise BinaryFormatError(
            f"truncated file {path}: expected {offset + 16 * n} bytes, got {len(buffer)}"
        )
    values = np.frombuffer(buffer, dtype=_FLOAT, count=2 * n, offset=offset)
    return GridFunction(grid=grid, q=values[:n].copy(), p=values[n:].copy())


def as_basis_matrix(basis: T.Any, grid: SpatialGrid) -> np.ndarray:
    """
    Return the ``2N x k`` matrix of a basis.

    Accepts anything with a ``matrix`` attribute (e.g. an orthosymplectic
    basis) or a plain array whose columns are stacked ``[q; p]`` fields.
    """
    matrix = np.asarray(getattr(basis, "matrix", basis), dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.ndim != 2 or matrix.shape[0] != 2 * grid.n_dof:
        raise make_grid_mismatch_error("basis", f"{2 * grid.n_dof} rows", matrix.shape)
    return matrix
