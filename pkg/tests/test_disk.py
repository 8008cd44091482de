"""Offset polar grid, quadrature, and finite-difference operators."""

import numpy as np
import pytest

from mlqg.disk import (
    Field,
    VectorField,
    build_grid,
    gradient,
    integrate,
    laplacian,
    perp_gradient,
)


def test_grid_geometry():
    g = build_grid(32, 64)
    assert g.dr == 1.0 / 32
    np.testing.assert_allclose(g.r, (np.arange(32) + 0.5) / 32, rtol=0, atol=0)
    np.testing.assert_allclose(g.theta, 2 * np.pi * np.arange(64) / 64, rtol=0, atol=0)
    assert g.r[0] == 0.5 * g.dr  # offset grid never samples the pole
    assert g.r[-1] == 1.0 - 0.5 * g.dr


@pytest.mark.parametrize("n_r,n_theta", [(8, 16), (32, 64), (64, 128), (33, 48)])
def test_quadrature_weights_sum_to_disk_area(n_r, n_theta):
    g = build_grid(n_r, n_theta)
    # midpoint rule in r integrates r exactly, so the total area is exact
    np.testing.assert_allclose(g.quad_weights.sum(), np.pi, rtol=0, atol=1e-13)


def test_integrate_polynomials():
    g = build_grid(64, 128)
    f = Field.from_function(g, lambda x, y: 1.0 - x * x - y * y)
    # int (1 - r^2) = pi/2 with O(dr^2) midpoint error
    assert abs(integrate(f)[0] - np.pi / 2) < 2e-4
    odd = Field.from_function(g, lambda x, y: x)
    np.testing.assert_allclose(integrate(odd)[0], 0.0, rtol=0, atol=1e-15)


def test_integrate_is_per_layer():
    g = build_grid(16, 32)
    data = np.stack([np.ones((16, 32)), 2.0 * np.ones((16, 32))])
    np.testing.assert_allclose(integrate(Field(g, data)), [np.pi, 2 * np.pi],
                               rtol=1e-14, atol=0)


@pytest.mark.parametrize("n_r,n_theta", [(8, 16), (16, 32), (64, 128)])
def test_grid_validation_accepts(n_r, n_theta):
    build_grid(n_r, n_theta)


@pytest.mark.parametrize("n_r,n_theta", [(4, 32), (16, 15), (16, 8), (0, 16)])
def test_grid_validation_rejects(n_r, n_theta):
    with pytest.raises(ValueError):
        build_grid(n_r, n_theta)


def test_field_from_function_shape_and_layers():
    g = build_grid(8, 16)
    f = Field.from_function(g, lambda x, y: x + y, n_layers=2)
    assert f.data.shape == (2, 8, 16)
    np.testing.assert_array_equal(f.data[0], f.data[1])


def test_field_rejects_nonfinite():
    g = build_grid(8, 16)
    bad = np.ones((1, 8, 16))
    bad[0, 3, 4] = np.nan
    with pytest.raises(ValueError):
        Field(g, bad)


def test_laplacian_of_quadratic_is_exact():
    g = build_grid(64, 128)
    f = Field.from_function(g, lambda x, y: 1.0 - x * x - y * y)
    lap = laplacian(f, boundary_values=np.array([0.0]))
    # closure and stencil are exact on quadratics; only roundoff remains,
    # amplified by 1/dr^2
    np.testing.assert_allclose(lap.data, -4.0, rtol=0, atol=1e-10)


def test_laplacian_of_harmonic_vanishes():
    g = build_grid(64, 128)
    f = Field.from_function(g, lambda x, y: x * x - y * y)
    np.testing.assert_allclose(laplacian(f).data, 0.0, rtol=0, atol=1e-10)


def test_laplacian_second_order_convergence():
    # pointwise in a fixed interior annulus; the innermost and outermost
    # rings carry the usual O(dr) local truncation of the polar stencil,
    # which the elliptic solve absorbs but a pointwise norm would not
    errs = []
    for n_r, n_theta in [(32, 64), (64, 128), (128, 256)]:
        g = build_grid(n_r, n_theta)
        f = Field.from_function(g, lambda x, y: np.cos(2 * x) * np.exp(y))
        exact = Field.from_function(g, lambda x, y: -3.0 * np.cos(2 * x) * np.exp(y))
        ann = (g.r > 0.2) & (g.r < 0.8)
        errs.append(np.abs(laplacian(f).data - exact.data)[0, ann, :].max())
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert orders.min() > 1.8


def test_gradient_of_linear_is_exact():
    g = build_grid(32, 64)
    f = Field.from_function(g, lambda x, y: 2.0 * x - 3.0 * y + 1.0)
    grad = gradient(f)
    np.testing.assert_allclose(grad.ux, 2.0, rtol=0, atol=1e-12)
    np.testing.assert_allclose(grad.uy, -3.0, rtol=0, atol=1e-12)


def test_gradient_azimuthal_symmetry():
    g = build_grid(32, 64)
    f = Field.from_function(g, lambda x, y: x)
    grad = gradient(f)
    # d/dtheta of r cos(theta) handled spectrally: no spurious radial part
    np.testing.assert_allclose(grad.ux, 1.0, rtol=0, atol=1e-12)
    np.testing.assert_allclose(grad.uy, 0.0, rtol=0, atol=1e-12)


def test_gradient_second_order_convergence():
    errs = []
    for n_r, n_theta in [(32, 64), (64, 128), (128, 256)]:
        g = build_grid(n_r, n_theta)
        f = Field.from_function(g, lambda x, y: np.sin(x + 2 * y))
        grad = gradient(f)
        ex = Field.from_function(g, lambda x, y: np.cos(x + 2 * y))
        err = max(
            np.abs(grad.ux - ex.data).max(),
            np.abs(grad.uy - 2.0 * ex.data).max(),
        )
        errs.append(err)
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert orders.min() > 1.8


def test_gradient_uses_boundary_value():
    g = build_grid(32, 64)
    # psi = r^2 - 1 has psi(1) = 0; passing the correct constant makes the
    # boundary rows second order too
    f = Field.from_function(g, lambda x, y: x * x + y * y - 1.0)
    grad = gradient(f, boundary_values=np.array([0.0]))
    np.testing.assert_allclose(grad.ux, 2.0 * g.xs[None], rtol=0, atol=1e-10)
    np.testing.assert_allclose(grad.uy, 2.0 * g.ys[None], rtol=0, atol=1e-10)


def test_perp_gradient_orthogonal_pointwise():
    g = build_grid(32, 64)
    f = Field.from_function(g, lambda x, y: np.exp(-3 * ((x - 0.2) ** 2 + y * y)))
    grad = gradient(f)
    perp = perp_gradient(f)
    dot = grad.ux * perp.ux + grad.uy * perp.uy
    np.testing.assert_allclose(dot, 0.0, rtol=0, atol=1e-12)
    # rotation by +90 degrees: (-dpsi/dy, dpsi/dx)
    np.testing.assert_array_equal(perp.ux, -grad.uy)
    np.testing.assert_array_equal(perp.uy, grad.ux)


def test_perp_gradient_of_radial_function_is_azimuthal():
    g = build_grid(32, 64)
    f = Field.from_function(g, lambda x, y: 1.0 - x * x - y * y)
    perp = perp_gradient(f, boundary_values=np.array([0.0]))
    # u = (2y, -2x): tangential, so u . x = 0
    normal = perp.ux * g.xs[None] + perp.uy * g.ys[None]
    np.testing.assert_allclose(normal, 0.0, rtol=0, atol=1e-11)


def test_vector_field_max_speed():
    g = build_grid(16, 32)
    v = VectorField(g, 3.0 * np.ones((1, 16, 32)), -4.0 * np.ones((1, 16, 32)))
    assert v.max_speed() == 5.0
    neg = v.negated()
    np.testing.assert_array_equal(neg.ux, -v.ux)
    np.testing.assert_array_equal(neg.uy, -v.uy)


def test_laplacian_integration_by_parts():
    # the flux-form stencil is self-adjoint under the midpoint quadrature,
    # so the defect sits at roundoff rather than merely decaying at O(dr^2)
    bc = np.zeros(1)
    for n_r, n_theta in [(32, 64), (64, 128)]:
        g = build_grid(n_r, n_theta)
        f = Field.from_function(g, lambda x, y: (1 - x * x - y * y) * np.sin(3 * x + y))
        h = Field.from_function(g, lambda x, y: (1 - (x * x + y * y) ** 2) * np.cos(2 * y))
        lhs = integrate(Field(g, laplacian(f, boundary_values=bc).data * h.data))[0]
        rhs = integrate(Field(g, laplacian(h, boundary_values=bc).data * f.data))[0]
        assert abs(lhs - rhs) < 1e-13


def test_pole_crossing_smoothness():
    # a smooth field must differentiate cleanly across r = 0 thanks to the
    # half-turn ghost continuation: the gradient stays second order right
    # up to the pole, and the laplacian's innermost rings still converge
    grad_errs, lap_errs = [], []
    for n_r, n_theta in [(32, 64), (64, 128), (128, 256)]:
        g = build_grid(n_r, n_theta)
        f = Field.from_function(g, lambda x, y: np.sin(2 * x) * np.cos(y))
        vel = gradient(f)
        gx = Field.from_function(g, lambda x, y: 2 * np.cos(2 * x) * np.cos(y))
        gy = Field.from_function(g, lambda x, y: -np.sin(2 * x) * np.sin(y))
        ge = np.maximum(np.abs(vel.ux - gx.data), np.abs(vel.uy - gy.data))
        grad_errs.append(ge[0, :4, :].max())
        lap = laplacian(f)
        exact = Field.from_function(g, lambda x, y: -5.0 * np.sin(2 * x) * np.cos(y))
        lap_errs.append(np.abs(lap.data - exact.data)[0, :4, :].max())
    grad_orders = np.log2(np.array(grad_errs[:-1]) / grad_errs[1:])
    lap_orders = np.log2(np.array(lap_errs[:-1]) / lap_errs[1:])
    assert grad_errs[1] < 1e-3
    assert grad_orders.min() > 1.8
    # 1/r amplification costs the laplacian one order on the first ring
    assert lap_orders.min() > 0.9


def test_non_power_of_two_theta_still_second_order():
    # centered theta symbols are used off the power-of-two fast path
    errs = []
    for n_theta in (48, 96):
        g = build_grid(n_theta // 2, n_theta)
        assert not g.spectral_theta
        f = Field.from_function(g, lambda x, y: np.sin(x + 2 * y))
        ex = Field.from_function(g, lambda x, y: np.cos(x + 2 * y))
        errs.append(np.abs(gradient(f).ux - ex.data).max())
    assert np.log2(errs[0] / errs[1]) > 1.8
