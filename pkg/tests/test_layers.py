"""Layer coupling matrix and its modal decomposition."""

import numpy as np
import pytest

from mlqg.layers import LayerStack, build_coupling_matrix, modal_decomposition

# 3-layer, F = 1 reference eigenstructure (interface-difference operator)
EIG3 = np.array([0.0, -1.0, -3.0])
MODES3 = np.column_stack(
    [
        np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0),
        np.array([1.0, 0.0, -1.0]) / np.sqrt(2.0),
        np.array([1.0, -2.0, 1.0]) / np.sqrt(6.0),
    ]
)


def path_eigenvalues(n, froude=1.0):
    """Closed-form spectrum of the n-layer coupling: F^2 (2 cos(k pi/n) - 2)."""
    k = np.arange(n)
    lam = froude**2 * (2.0 * np.cos(k * np.pi / n) - 2.0)
    return np.sort(lam)[::-1]


def test_coupling_matrix_three_layers():
    t = build_coupling_matrix(3)
    expected = np.array([[-1.0, 1.0, 0.0], [1.0, -2.0, 1.0], [0.0, 1.0, -1.0]])
    np.testing.assert_array_equal(t, expected)


def test_coupling_matrix_two_layers():
    t = build_coupling_matrix(2, froude=2.0)
    np.testing.assert_array_equal(t, np.array([[-4.0, 4.0], [4.0, -4.0]]))


def test_coupling_matrix_single_layer_is_zero():
    np.testing.assert_array_equal(build_coupling_matrix(1), np.zeros((1, 1)))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 8])
def test_coupling_symmetric_with_zero_row_sums(n):
    t = build_coupling_matrix(n, froude=1.3)
    np.testing.assert_array_equal(t, t.T)
    np.testing.assert_array_equal(t.sum(axis=1), np.zeros(n))


def test_froude_scaling_is_quadratic():
    base = build_coupling_matrix(5, froude=1.0)
    np.testing.assert_allclose(build_coupling_matrix(5, froude=2.5), 6.25 * base,
                               rtol=0, atol=1e-12)


@pytest.mark.parametrize("froude", [0.0, -1.0, np.nan])
def test_bad_froude_rejected(froude):
    with pytest.raises(ValueError):
        build_coupling_matrix(3, froude=froude)


def test_bad_layer_count_rejected():
    with pytest.raises(ValueError):
        build_coupling_matrix(0)


def test_three_layer_eigenvalues_match_reference():
    stack = LayerStack(3, 1.0)
    np.testing.assert_allclose(stack.eigenvalues, EIG3, rtol=0, atol=1e-12)


def test_three_layer_eigenvectors_match_reference():
    stack = LayerStack(3, 1.0)
    # sign convention pins each column up to nothing further
    np.testing.assert_allclose(stack.modes, MODES3, rtol=0, atol=1e-12)


def test_zero_eigenvalue_and_constant_mode_exact():
    for n in (1, 2, 3, 6):
        stack = LayerStack(n, 0.9)
        assert stack.eigenvalues[0] == 0.0
        np.testing.assert_array_equal(stack.modes[:, 0], np.full(n, 1.0 / np.sqrt(n)))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8])
def test_eigenvalues_match_closed_form(n):
    stack = LayerStack(n, 1.0)
    np.testing.assert_allclose(stack.eigenvalues, path_eigenvalues(n),
                               rtol=0, atol=1e-12)
    assert np.all(np.diff(stack.eigenvalues) <= 0)
    assert np.all(stack.eigenvalues[1:] < 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 8])
def test_modes_orthonormal_and_diagonalizing(n):
    stack = LayerStack(n, 1.1)
    p = stack.modes
    np.testing.assert_allclose(p.T @ p, np.eye(n), rtol=0, atol=1e-12)
    np.testing.assert_allclose(
        stack.coupling @ p, p @ np.diag(stack.eigenvalues), rtol=0, atol=1e-12
    )


def test_modal_decomposition_function_matches_stack():
    t = build_coupling_matrix(4, froude=0.7)
    lam, p = modal_decomposition(t)
    stack = LayerStack(4, 0.7)
    np.testing.assert_array_equal(lam, stack.eigenvalues)
    np.testing.assert_array_equal(p, stack.modes)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_modal_round_trip(n):
    rng = np.random.default_rng(42)
    stack = LayerStack(n, 1.3)
    data = rng.standard_normal((n, 6, 4))
    hat = stack.project(data, stack.modes.T)
    back = stack.project(hat, stack.modes)
    np.testing.assert_allclose(back, data, rtol=0, atol=1e-12)


def test_projection_of_layer_constant_is_barotropic():
    stack = LayerStack(3, 1.0)
    rng = np.random.default_rng(0)
    plane = rng.standard_normal((5, 5))
    data = np.repeat(plane[None], 3, axis=0)
    hat = stack.project(data, stack.modes.T)
    # constant-across-layers data lives entirely in the zero mode
    np.testing.assert_allclose(hat[1:], 0.0, rtol=0, atol=1e-12)
    np.testing.assert_allclose(hat[0], np.sqrt(3.0) * plane, rtol=0, atol=1e-12)
