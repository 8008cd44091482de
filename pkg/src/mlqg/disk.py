"""Polar grid on the unit disk and the discrete operators living on it.

Nodes sit at r_j = (j + 1/2) dr, theta_k = 2 pi k / n_theta, so no node
falls on the pole or on the boundary circle.  Stencils that reach across
the pole use the half-turn continuation f(-r, theta) = f(r, theta + pi);
stencils that reach past r = 1 use a one-sided ghost built either from a
supplied boundary value or by extrapolation from the last rings.  Theta
derivatives are Fourier-collocation when n_theta is a power of two and
centered differences otherwise; both are diagonal in the DFT basis, which
keeps the elliptic solver exactly consistent with laplacian().
"""

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "VectorField",
    "build_grid",
    "integrate",
    "gradient",
    "perp_gradient",
    "laplacian",
]


def _is_pow2(n):
    return n & (n - 1) == 0


class Grid:
    """Offset polar grid on the unit disk.  Build with build_grid()."""

    def __init__(self, n_r, n_theta):
        n_r = int(n_r)
        n_theta = int(n_theta)
        if n_r < 8:
            raise ValueError(f"n_r must be >= 8, got {n_r}")
        if n_theta < 16 or n_theta % 2 != 0:
            raise ValueError(f"n_theta must be even and >= 16, got {n_theta}")
        self.n_r = n_r
        self.n_theta = n_theta
        self.dr = 1.0 / n_r
        self.dtheta = 2.0 * np.pi / n_theta
        self.r = (np.arange(n_r) + 0.5) * self.dr
        self.theta = np.arange(n_theta) * self.dtheta
        self.spectral_theta = _is_pow2(n_theta)

        # midpoint-in-r, trapezoid-in-theta quadrature; weights sum to pi
        self.quad_weights = np.broadcast_to(
            (self.r * self.dr * self.dtheta)[:, None], (n_r, n_theta)
        )

        self.cos_theta = np.cos(self.theta)
        self.sin_theta = np.sin(self.theta)
        self.xs = self.r[:, None] * self.cos_theta[None, :]
        self.ys = self.r[:, None] * self.sin_theta[None, :]

        # DFT symbols of the theta derivative operators (length n_theta//2+1)
        m = np.arange(n_theta // 2 + 1, dtype=float)
        if self.spectral_theta:
            s1 = 1j * m
            s1[-1] = 0.0  # odd derivative has no Nyquist signal
            s2 = -(m**2)
        else:
            s1 = 1j * np.sin(m * self.dtheta) / self.dtheta
            s2 = -4.0 * np.sin(0.5 * m * self.dtheta) ** 2 / self.dtheta**2
        self.theta_symbol_d1 = s1
        self.theta_symbol_d2 = s2

    def __repr__(self):
        return f"Grid(n_r={self.n_r}, n_theta={self.n_theta})"

    def node_points(self):
        """All node coordinates as an (n_r * n_theta, 2) array."""
        return np.column_stack([self.xs.ravel(), self.ys.ravel()])


def build_grid(n_r, n_theta):
    return Grid(n_r, n_theta)


class Field:
    """Per-layer scalar values on grid nodes, shape (n_layers, n_r, n_theta)."""

    def __init__(self, grid, data):
        data = np.asarray(data, dtype=float)
        if data.ndim == 2:
            data = data[None]
        if data.ndim != 3 or data.shape[1:] != (grid.n_r, grid.n_theta):
            raise ValueError(
                f"field data shape {data.shape} does not match grid "
                f"({grid.n_r}, {grid.n_theta})"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("field contains non-finite values")
        self.grid = grid
        self.data = data

    @property
    def n_layers(self):
        return self.data.shape[0]

    def copy(self):
        return Field(self.grid, self.data.copy())

    @classmethod
    def zeros(cls, grid, n_layers=1):
        return cls(grid, np.zeros((n_layers, grid.n_r, grid.n_theta)))

    @classmethod
    def from_function(cls, grid, fn, n_layers=1):
        """Sample fn(x, y) on the nodes, replicated over layers."""
        vals = np.asarray(fn(grid.xs, grid.ys), dtype=float)
        if vals.shape == (grid.n_r, grid.n_theta):
            vals = np.repeat(vals[None], n_layers, axis=0)
        return cls(grid, vals)


class VectorField:
    """Per-layer Cartesian vector values on grid nodes."""

    def __init__(self, grid, ux, uy):
        self.grid = grid
        self.ux = np.asarray(ux, dtype=float)
        self.uy = np.asarray(uy, dtype=float)
        if self.ux.ndim == 2:
            self.ux = self.ux[None]
        if self.uy.ndim == 2:
            self.uy = self.uy[None]
        if self.ux.shape != self.uy.shape or self.ux.shape[1:] != (
            grid.n_r,
            grid.n_theta,
        ):
            raise ValueError("velocity component shapes do not match grid")

    @property
    def n_layers(self):
        return self.ux.shape[0]

    def max_speed(self):
        return float(np.sqrt(self.ux**2 + self.uy**2).max())

    def negated(self):
        return VectorField(self.grid, -self.ux, -self.uy)


def integrate(field):
    """Quadrature of each layer over the disk; returns an (n_layers,) array."""
    return np.einsum("ljk,jk->l", field.data, field.grid.quad_weights)


def _as_boundary_array(field, boundary_values):
    """Normalize per-layer boundary constants to shape (n_layers,) or None."""
    if boundary_values is None:
        return None
    b = np.atleast_1d(np.asarray(boundary_values, dtype=float))
    if b.shape == (1,) and field.n_layers > 1:
        b = np.repeat(b, field.n_layers)
    if b.shape != (field.n_layers,):
        raise ValueError(
            f"expected {field.n_layers} boundary values, got shape {b.shape}"
        )
    return b


def _pole_ghost(grid, data):
    # f(-r0, theta) = f(r0, theta + pi); n_theta is even so pi is a column roll
    return np.roll(data[:, 0, :], grid.n_theta // 2, axis=-1)


def _outer_ghost(data, boundary):
    """Value one half-cell past r = 1.

    With a boundary constant b: quadratic through (f_{N-2}, f_{N-1}, b).
    Without: quadratic extrapolation of the last three rings.
    """
    if boundary is not None:
        return (
            data[:, -2, :] / 3.0
            - 2.0 * data[:, -1, :]
            + (8.0 / 3.0) * boundary[:, None]
        )
    return data[:, -3, :] - 3.0 * data[:, -2, :] + 3.0 * data[:, -1, :]


def _dtheta1(grid, data):
    if grid.spectral_theta:
        return np.fft.irfft(
            grid.theta_symbol_d1 * np.fft.rfft(data, axis=-1),
            n=grid.n_theta,
            axis=-1,
        )
    return (np.roll(data, -1, axis=-1) - np.roll(data, 1, axis=-1)) / (
        2.0 * grid.dtheta
    )


def _dtheta2(grid, data):
    if grid.spectral_theta:
        return np.fft.irfft(
            grid.theta_symbol_d2 * np.fft.rfft(data, axis=-1),
            n=grid.n_theta,
            axis=-1,
        )
    return (
        np.roll(data, -1, axis=-1) - 2.0 * data + np.roll(data, 1, axis=-1)
    ) / grid.dtheta**2


def _radial_extended(grid, field, boundary_values):
    """Field data with one ghost ring below the pole and one past r = 1."""
    b = _as_boundary_array(field, boundary_values)
    data = field.data
    return np.concatenate(
        [
            _pole_ghost(grid, data)[:, None, :],
            data,
            _outer_ghost(data, b)[:, None, :],
        ],
        axis=1,
    )


def gradient(field, boundary_values=None):
    """Cartesian gradient of each layer as a VectorField.

    boundary_values, when given, are the known constant values of the field
    on r = 1 (one per layer) and sharpen the one-sided closure of the radial
    derivative on the outermost ring.
    """
    grid = field.grid
    ext = _radial_extended(grid, field, boundary_values)
    f_r = (ext[:, 2:, :] - ext[:, :-2, :]) / (2.0 * grid.dr)
    f_t = _dtheta1(grid, field.data) / grid.r[None, :, None]

    cos, sin = grid.cos_theta, grid.sin_theta
    ux = f_r * cos[None, None, :] - f_t * sin[None, None, :]
    uy = f_r * sin[None, None, :] + f_t * cos[None, None, :]
    return VectorField(grid, ux, uy)


def perp_gradient(field, boundary_values=None):
    """Rotated gradient (-d/dy, d/dx); the advecting velocity of a streamfunction."""
    g = gradient(field, boundary_values)
    return VectorField(field.grid, -g.uy, g.ux)


def laplacian(field, boundary_values=None):
    """Five-point polar Laplacian with the closures described in the module docstring."""
    grid = field.grid
    ext = _radial_extended(grid, field, boundary_values)
    r = grid.r[None, :, None]
    d2 = (ext[:, 2:, :] - 2.0 * ext[:, 1:-1, :] + ext[:, :-2, :]) / grid.dr**2
    d1 = (ext[:, 2:, :] - ext[:, :-2, :]) / (2.0 * grid.dr * r)
    tt = _dtheta2(grid, field.data) / r**2
    return Field(grid, d2 + d1 + tt)
