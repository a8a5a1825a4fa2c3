# -*- coding: utf-8 -*-

import numpy as np
import pytest

from hamstate.discretization import (
    SpatialGrid,
    GridFunction,
    inner_product,
    norm,
    laplacian,
    partial,
    gradient,
    divergence,
    difference_matrix,
    laplacian_matrix,
    header_size,
    write_grid_function,
    read_grid_function,
    as_basis_matrix,
)
from hamstate.exc import BinaryFormatError, DimensionError, GridMismatchError


@pytest.fixture
def grid_1d() -> SpatialGrid:
    return SpatialGrid.uniform_1d(np.pi, 64)


@pytest.fixture
def grid_2d() -> SpatialGrid:
    return SpatialGrid.uniform_2d(np.pi, 2 * np.pi, 32, 24)


class TestSpatialGrid:
    def test_geometry(self, grid_1d, grid_2d):
        assert grid_1d.dim == 1
        assert grid_1d.n_dof == 64
        assert grid_1d.spacing == pytest.approx((2 * np.pi / 64,))
        assert grid_1d.weight == pytest.approx(2 * np.pi / 64)
        assert grid_1d.quadrature.weight == grid_1d.weight

        assert grid_2d.dim == 2
        assert grid_2d.n_dof == 32 * 24
        assert grid_2d.shape == (24, 32)
        assert grid_2d.weight == pytest.approx((2 * np.pi / 32) * (4 * np.pi / 24))

    def test_coordinates_exclude_periodic_endpoint(self, grid_1d):
        (x,) = grid_1d.coordinates()
        assert x[0] == pytest.approx(-np.pi)
        assert x[-1] == pytest.approx(np.pi - grid_1d.spacing[0])

    def test_coordinates_row_major_y_first(self, grid_2d):
        x, y = grid_2d.coordinates()
        # flat index j * N_x + i holds (x_i, y_j)
        i, j = 5, 7
        k = j * 32 + i
        assert x[k] == pytest.approx(grid_2d.axis_coordinates(0)[i])
        assert y[k] == pytest.approx(grid_2d.axis_coordinates(1)[j])

    def test_wrap_and_minimum_image(self, grid_1d):
        wrapped = grid_1d.wrap(np.array([[np.pi + 0.5], [-np.pi - 0.5], [0.25]]))
        np.testing.assert_allclose(wrapped[:, 0], [-np.pi + 0.5, np.pi - 0.5, 0.25])
        d = grid_1d.minimum_image(np.array([1.9 * np.pi, -1.9 * np.pi, 0.3]), 0)
        np.testing.assert_allclose(d, [-0.1 * np.pi, 0.1 * np.pi, 0.3], atol=1e-14)

    def test_invalid(self):
        with pytest.raises(DimensionError):
            SpatialGrid(half_extents=(1.0, 1.0, 1.0), counts=(4, 4, 4))
        with pytest.raises(ValueError):
            SpatialGrid.uniform_1d(-1.0, 10)
        with pytest.raises(ValueError):
            SpatialGrid.uniform_1d(1.0, 1)
        with pytest.raises(DimensionError):
            SpatialGrid.uniform_1d(1.0, 10).array_axis(1)


class TestGridFunction:
    def test_vector_layout(self, grid_1d):
        q = np.arange(64.0)
        p = -np.arange(64.0)
        u = GridFunction(grid_1d, q, p)
        np.testing.assert_array_equal(u.vector[:64], q)
        np.testing.assert_array_equal(u.vector[64:], p)
        v = GridFunction.from_vector(grid_1d, u.vector)
        np.testing.assert_array_equal(v.q, q)
        np.testing.assert_array_equal(v.p, p)

    def test_arithmetic(self, grid_1d):
        u = GridFunction(grid_1d, np.ones(64), np.zeros(64))
        v = GridFunction(grid_1d, np.zeros(64), np.ones(64))
        w = 2.0 * (u + v) - v
        np.testing.assert_array_equal(w.q, 2.0)
        np.testing.assert_array_equal(w.p, 1.0)

    def test_validation(self, grid_1d, grid_2d):
        with pytest.raises(GridMismatchError):
            GridFunction(grid_1d, np.zeros(63), np.zeros(64))
        with pytest.raises(ValueError):
            GridFunction(grid_1d, np.full(64, np.nan), np.zeros(64))
        with pytest.raises(GridMismatchError):
            GridFunction.zeros(grid_1d) + GridFunction.zeros(
                SpatialGrid.uniform_1d(np.pi, 32)
            )
        with pytest.raises(GridMismatchError):
            GridFunction.from_vector(grid_2d, np.zeros(10))


class TestInnerProduct:
    def test_trigonometric_orthogonality(self, grid_1d):
        (x,) = grid_1d.coordinates()
        f = GridFunction(grid_1d, np.sin(x), np.cos(2 * x))
        g = GridFunction(grid_1d, np.cos(x), np.sin(2 * x))
        assert abs(inner_product(f, g)) < 1e-13
        # ||sin||^2 + ||cos 2x||^2 = pi + pi on [-pi, pi)
        assert norm(f) ** 2 == pytest.approx(2 * np.pi, rel=1e-13)

    def test_symmetry_and_positivity(self, grid_2d):
        rng = np.random.default_rng(0)
        n = grid_2d.n_dof
        f = GridFunction(grid_2d, rng.standard_normal(n), rng.standard_normal(n))
        g = GridFunction(grid_2d, rng.standard_normal(n), rng.standard_normal(n))
        assert inner_product(f, g) == pytest.approx(inner_product(g, f), rel=1e-14)
        assert norm(f) > 0
        assert norm(GridFunction.zeros(grid_2d)) == 0.0


class TestDifferenceOperators:
    def test_second_order_accuracy(self):
        errors = []
        for n in (32, 64):
            grid = SpatialGrid.uniform_1d(np.pi, n)
            (x,) = grid.coordinates()
            f = np.sin(x)
            errors.append(
                (
                    np.abs(partial(f, grid, 0) - np.cos(x)).max(),
                    np.abs(laplacian(f, grid) + np.sin(x)).max(),
                )
            )
        for e_coarse, e_fine in zip(*errors):
            assert np.log2(e_coarse / e_fine) == pytest.approx(2.0, abs=0.1)

    def test_axes_in_2d(self, grid_2d):
        x, y = grid_2d.coordinates()
        f = np.sin(x) * np.cos(0.5 * y)
        gx, gy = gradient(f, grid_2d)
        assert np.abs(gx - np.cos(x) * np.cos(0.5 * y)).max() < 2e-2
        assert np.abs(gy + 0.5 * np.sin(x) * np.sin(0.5 * y)).max() < 2e-2
        # div grad is the wide 5-point stencil, consistent with the Laplacian
        lap = divergence([gx, gy], grid_2d)
        exact = -1.25 * f
        assert np.abs(lap - exact).max() < 5e-2

    def test_sparse_matrices_reproduce_stencils(self, grid_2d):
        rng = np.random.default_rng(1)
        f = rng.standard_normal(grid_2d.n_dof)
        for axis in (0, 1):
            np.testing.assert_allclose(
                difference_matrix(grid_2d, axis) @ f,
                partial(f, grid_2d, axis),
                rtol=0,
                atol=1e-10,
            )
        np.testing.assert_allclose(
            laplacian_matrix(grid_2d) @ f, laplacian(f, grid_2d), rtol=0, atol=1e-9
        )

    @pytest.mark.parametrize("name", ["grid_1d", "grid_2d"])
    def test_summation_by_parts(self, name, request):
        grid = request.getfixturevalue(name)
        rng = np.random.default_rng(4)
        f = rng.standard_normal(grid.n_dof)
        g = rng.standard_normal(grid.n_dof)
        w = grid.weight
        scale = w * np.abs(f).sum() * np.abs(g).sum() / min(grid.spacing)
        for axis in range(grid.dim):
            lhs = w * np.dot(partial(f, grid, axis), g)
            rhs = -w * np.dot(f, partial(g, grid, axis))
            assert abs(lhs - rhs) <= 1e-13 * scale
            D = difference_matrix(grid, axis)
            assert abs(D + D.T).max() < 1e-12 / min(grid.spacing)

    @pytest.mark.parametrize("name", ["grid_1d", "grid_2d"])
    def test_laplacian_self_adjoint(self, name, request):
        grid = request.getfixturevalue(name)
        rng = np.random.default_rng(5)
        f = rng.standard_normal(grid.n_dof)
        g = rng.standard_normal(grid.n_dof)
        w = grid.weight
        scale = w * np.abs(f).sum() * np.abs(g).sum() / min(grid.spacing) ** 2
        lhs = w * np.dot(laplacian(f, grid), g)
        rhs = w * np.dot(f, laplacian(g, grid))
        assert abs(lhs - rhs) <= 1e-13 * scale
        assert w * np.dot(laplacian(f, grid), f) < 0
        L = laplacian_matrix(grid)
        assert abs(L - L.T).max() < 1e-12 / min(grid.spacing) ** 2

    def test_multiple_columns(self, grid_1d):
        rng = np.random.default_rng(2)
        F = rng.standard_normal((64, 3))
        out = partial(F, grid_1d, 0)
        assert out.shape == (64, 3)
        np.testing.assert_allclose(out[:, 1], partial(F[:, 1], grid_1d, 0))

    def test_tiny_grid_duplicates(self):
        grid = SpatialGrid.uniform_1d(1.0, 2)
        f = np.array([1.0, 3.0])
        np.testing.assert_allclose(laplacian_matrix(grid) @ f, laplacian(f, grid))

    def test_wrong_size(self, grid_1d):
        with pytest.raises(GridMismatchError):
            laplacian(np.zeros(10), grid_1d)
        with pytest.raises(DimensionError):
            divergence([np.zeros(64)] * 2, grid_1d)


class TestBinaryIO:
    def test_write_read(self, tmp_path, grid_2d):
        rng = np.random.default_rng(3)
        n = grid_2d.n_dof
        f = GridFunction(grid_2d, rng.standard_normal(n), rng.standard_normal(n))
        path = tmp_path / "f.bin"
        write_grid_function(path, f)
        assert path.stat().st_size == header_size(grid_2d) + 16 * n
        g = read_grid_function(path)
        assert g.grid == grid_2d
        np.testing.assert_array_equal(g.q, f.q)
        np.testing.assert_array_equal(g.p, f.p)

    @pytest.mark.parametrize(
        "half_extent, n_x",
        [
            (20 * np.pi, 1000),
            (62.83185307179586, 256),
            (30.0, 1000),
            (5.0, 20),
        ],
    )
    def test_read_back_grid_is_identical(self, tmp_path, half_extent, n_x):
        grid = SpatialGrid.uniform_1d(half_extent, n_x)
        (x,) = grid.coordinates()
        f = GridFunction(grid, np.exp(-(x**2)), np.zeros(n_x))
        path = tmp_path / "f.bin"
        write_grid_function(path, f)
        g = read_grid_function(path)
        assert g.grid == grid
        assert g.grid.half_extents == grid.half_extents
        assert inner_product(f, g) == pytest.approx(norm(f) ** 2, rel=1e-14)

    def test_half_extent_is_kept_to_an_ulp(self):
        for L in (20 * np.pi, 30.0, np.pi):
            grid = SpatialGrid.uniform_1d(L, 1000)
            assert abs(grid.half_extents[0] - L) <= 4 * np.spacing(L)
            assert SpatialGrid.uniform_1d(grid.half_extents[0], 1000) == grid

    def test_malformed(self, tmp_path, grid_1d):
        path = tmp_path / "f.bin"
        write_grid_function(path, GridFunction.zeros(grid_1d))
        data = path.read_bytes()

        path.write_bytes(data[:-8])
        with pytest.raises(BinaryFormatError):
            read_grid_function(path)

        path.write_bytes(np.array([3], dtype="<i8").tobytes() + data[8:])
        with pytest.raises(BinaryFormatError):
            read_grid_function(path)

        path.write_bytes(data[:4])
        with pytest.raises(BinaryFormatError):
            read_grid_function(path)


def test_as_basis_matrix(grid_1d):
    assert as_basis_matrix(np.zeros(128), grid_1d).shape == (128, 1)
    with pytest.raises(GridMismatchError):
        as_basis_matrix(np.zeros((64, 2)), grid_1d)


if __name__ == "__main__":
    from hamstate.tests import run_cov_test

    run_cov_test(
        __file__,
        "hamstate.discretization",
        preview=False,
    )
