"""Initial-condition and forcing presets for configured runs."""

import numpy as np

from .disk import Field

__all__ = [
    "layer_weights",
    "gaussian_blob_pv",
    "radial_pv",
    "manufactured_state",
    "perturbation_field",
    "ConstantForcing",
    "RotatingDipoleForcing",
]


def layer_weights(weights, n_layers):
    if weights is None or len(weights) == 0:
        return np.ones(n_layers)
    w = np.asarray(weights, dtype=float)
    if w.shape != (n_layers,):
        raise ValueError(f"expected {n_layers} layer weights, got {w.shape}")
    return w


def gaussian_blob_pv(grid, n_layers, amplitude, center, width, weights=None):
    """PV blob exp(-|x - x0|^2 / (2 width^2)), scaled per layer."""
    if width <= 0.0:
        raise ValueError(f"width must be positive, got {width}")
    w = layer_weights(weights, n_layers)
    blob = np.exp(
        -((grid.xs - center[0]) ** 2 + (grid.ys - center[1]) ** 2)
        / (2.0 * width**2)
    )
    return Field(grid, amplitude * w[:, None, None] * blob[None])


def radial_pv(grid, n_layers, amplitude, power=2, weights=None):
    """Radially symmetric PV amplitude (1 - r^2)^power; a steady flow."""
    if power < 1:
        raise ValueError(f"power must be >= 1, got {power}")
    w = layer_weights(weights, n_layers)
    prof = (1.0 - grid.r**2) ** power
    vals = amplitude * w[:, None, None] * np.broadcast_to(
        prof[:, None], (grid.n_r, grid.n_theta)
    )[None]
    return Field(grid, vals.copy())


def manufactured_state(grid, stack, amplitude=1.0, weights=None):
    """A closed-form (psi, q, l) triple for exercising the coupled inversion.

    psi_i = a_i [(1-r^2)^2 - 1/3] + b_i (1-r^2) r cos(theta) has constant
    boundary value -a_i/3 and zero mean; its PV follows from
    lap((1-r^2)^2) = 16 r^2 - 8 and lap((1-r^2) r cos t) = -8 r cos(theta).
    Returns (psi, q, l).
    """
    w = layer_weights(weights, stack.n_layers)
    a = amplitude * w
    b = 0.5 * amplitude * w
    r2 = grid.xs**2 + grid.ys**2
    base = (1.0 - r2) ** 2 - 1.0 / 3.0
    tilt = (1.0 - r2) * grid.xs
    lap_base = 16.0 * r2 - 8.0
    lap_tilt = -8.0 * grid.xs

    psi = a[:, None, None] * base[None] + b[:, None, None] * tilt[None]
    lap = a[:, None, None] * lap_base[None] + b[:, None, None] * lap_tilt[None]
    q = lap + np.einsum("ij,jkl->ikl", stack.coupling, psi)
    l = -a / 3.0
    return Field(grid, psi), Field(grid, q), l


def perturbation_field(grid, n_layers, seed):
    """Smooth unit-scale perturbation vanishing on the boundary, from a seed."""
    rng = np.random.default_rng(seed)
    x, y = grid.xs, grid.ys
    shapes = [np.ones_like(x), x, y, x * y, x**2 - y**2]
    bump = 1.0 - x**2 - y**2
    data = np.empty((n_layers, grid.n_r, grid.n_theta))
    for i in range(n_layers):
        coef = rng.uniform(-1.0, 1.0, size=len(shapes))
        data[i] = bump * sum(c * s for c, s in zip(coef, shapes))
    return Field(grid, data)


class ConstantForcing:
    """Time-independent, space-independent PV source, one rate per layer."""

    def __init__(self, n_layers, amplitude, weights=None):
        self.rates = amplitude * layer_weights(weights, n_layers)

    def __call__(self, x, y, t, layer):
        return np.full(np.shape(x), self.rates[layer])

    def on_grid(self, grid, t):
        vals = np.broadcast_to(
            self.rates[:, None, None], (self.rates.size, grid.n_r, grid.n_theta)
        )
        return Field(grid, vals.copy())


class RotatingDipoleForcing:
    """Dipole source A (1 - r^2)(x cos(w t) + y sin(w t)), scaled per layer."""

    def __init__(self, n_layers, amplitude, frequency, weights=None):
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.weights = layer_weights(weights, n_layers)

    def __call__(self, x, y, t, layer):
        x = np.asarray(x)
        y = np.asarray(y)
        c = np.cos(self.frequency * t)
        s = np.sin(self.frequency * t)
        return (
            self.weights[layer]
            * self.amplitude
            * (1.0 - x**2 - y**2)
            * (x * c + y * s)
        )

    def on_grid(self, grid, t):
        x, y = grid.xs.ravel(), grid.ys.ravel()
        data = np.stack(
            [
                self(x, y, t, i).reshape(grid.n_r, grid.n_theta)
                for i in range(self.weights.size)
            ]
        )
        return Field(grid, data)
