"""Helmholtz and coupled inversion solvers on the disk grid.

Each scalar problem lap(u) + lambda u = rhs, u = b on r = 1, is solved by
a real FFT in theta followed by one tridiagonal radial solve per azimuthal
wavenumber.  The radial matrices use exactly the same stencil and boundary
closure as disk.laplacian(), and the DFT diagonalizes the theta operator
exactly in both the spectral and the centered-difference mode, so solving
and then applying laplacian() reproduces the right-hand side to roundoff.

On the half-offset grid the sub-diagonal coefficient of the first ring
vanishes identically, so the pole needs no special row.  The Dirichlet
closure folds the quadratic ghost into the last row, keeping the matrices
tridiagonal M-matrices; their Thomas factorizations are computed once per
(grid, lambda) and reused.

The physically relevant problem has an unknown constant boundary value
fixed by the zero-mean constraint.  It is recovered by superposition:
psi = w + c phi, where w solves the homogeneous-boundary problem, phi is
the profile with lap(phi) + lambda phi = 0 and phi = 1 on the boundary,
and c = -Int(w)/Int(phi).
"""

import weakref

import numpy as np

from .disk import Field, laplacian

__all__ = [
    "HelmholtzSolver",
    "get_solver",
    "solve_dirichlet",
    "solve_constant_boundary_zero_mean",
    "solve_coupled",
]


class HelmholtzSolver:
    """Factored radial systems for one (grid, lambda) pair.

    Attributes
    ----------
    lam : float
        The Helmholtz shift, required <= 0.
    homogeneous_profile : ndarray
        phi_lambda on the grid nodes, strictly positive.
    profile_mass : float
        Quadrature of the profile, strictly positive.
    """

    tol = 1e-10

    def __init__(self, grid, lam):
        lam = float(lam)
        if not np.isfinite(lam) or lam > 0.0:
            raise ValueError(
                f"lambda must be <= 0 (no decaying profile otherwise), got {lam}"
            )
        self.grid = grid
        self.lam = lam

        n_r = grid.n_r
        r = grid.r
        dr = grid.dr
        inv2 = 1.0 / dr**2
        sub = inv2 - 1.0 / (2.0 * dr * r)  # sub[0] == 0 on the offset grid
        sup = inv2 + 1.0 / (2.0 * dr * r)
        s2 = grid.theta_symbol_d2  # (n_m,)

        diag = np.empty((n_r, s2.size))
        diag[:] = -2.0 * inv2 + lam + s2[None, :] / (r**2)[:, None]
        # quadratic ghost through (f_{N-2}, f_{N-1}, b) folded into the last row
        sub = sub.copy()
        sub[-1] += sup[-1] / 3.0
        diag[-1, :] -= 2.0 * sup[-1]
        self._bc_coef = -(8.0 / 3.0) * sup[-1]  # multiplies b-hat in the rhs
        self._sup = sup

        # Thomas factorization, vectorized over wavenumbers
        w = np.zeros_like(diag)
        dp = np.empty_like(diag)
        dp[0] = diag[0]
        for j in range(1, n_r):
            w[j] = sub[j] / dp[j - 1]
            dp[j] = diag[j] - w[j] * sup[j - 1]
        self._w = w
        self._dp = dp

        self.homogeneous_profile = self._solve_hat(
            np.zeros((n_r, s2.size), dtype=complex), 1.0
        )
        self.profile_mass = float(
            np.einsum("jk,jk->", self.homogeneous_profile, grid.quad_weights)
        )
        if abs(self.profile_mass) < 1e-12:
            raise RuntimeError(f"degenerate homogeneous profile for lambda={lam}")
        res = (
            laplacian(Field(grid, self.homogeneous_profile), boundary_values=1.0).data[0]
            + lam * self.homogeneous_profile
        )
        # roundoff in the solve/residual pair scales with the matrix norm ~ n_r^2
        profile_tol = max(self.tol, 200.0 * np.finfo(float).eps * n_r**2)
        if np.abs(res).max() > profile_tol * (1.0 + abs(lam)):
            raise RuntimeError(
                f"homogeneous profile residual {np.abs(res).max():.3e} "
                f"exceeds tolerance for lambda={lam}"
            )

    def _solve_hat(self, rhs_hat, boundary_value):
        """Solve for all wavenumbers given the rfft of the right-hand side."""
        n_r = self.grid.n_r
        rhs_hat = rhs_hat.copy()
        if boundary_value != 0.0:
            # rfft of the constant boundary function: n_theta * b at m = 0
            rhs_hat[-1, 0] += self._bc_coef * self.grid.n_theta * boundary_value
        y = rhs_hat
        for j in range(1, n_r):
            y[j] -= self._w[j] * y[j - 1]
        x = y
        x[-1] /= self._dp[-1]
        for j in range(n_r - 2, -1, -1):
            x[j] = (x[j] - self._sup[j] * x[j + 1]) / self._dp[j]
        return np.fft.irfft(x, n=self.grid.n_theta, axis=-1)

    def solve_dirichlet_grid(self, rhs, boundary_value):
        """Solve with the given constant boundary value; rhs is (n_r, n_theta)."""
        rhs_hat = np.fft.rfft(np.asarray(rhs, dtype=float), axis=-1)
        return self._solve_hat(rhs_hat, float(boundary_value))

    def solve_zero_mean_grid(self, rhs):
        """Solve with unknown constant boundary value and zero disk mean."""
        w = self.solve_dirichlet_grid(rhs, 0.0)
        mass_w = float(np.einsum("jk,jk->", w, self.grid.quad_weights))
        c = -mass_w / self.profile_mass
        return w + c * self.homogeneous_profile, c


_cache = weakref.WeakKeyDictionary()


def get_solver(grid, lam):
    """Solver for (grid, lambda), built once and cached by the bit pattern of lambda."""
    per_grid = _cache.setdefault(grid, {})
    key = np.float64(lam).tobytes()
    solver = per_grid.get(key)
    if solver is None:
        solver = HelmholtzSolver(grid, lam)
        per_grid[key] = solver
    return solver


def _scalar_layer(field):
    if field.n_layers != 1:
        raise ValueError(f"expected a scalar (1-layer) field, got {field.n_layers}")
    return field.data[0]


def solve_dirichlet(lam, rhs, boundary_value):
    """Scalar Helmholtz solve with a known constant boundary value."""
    solver = get_solver(rhs.grid, lam)
    return Field(rhs.grid, solver.solve_dirichlet_grid(_scalar_layer(rhs), boundary_value))


def solve_constant_boundary_zero_mean(lam, rhs):
    """Scalar solve with the boundary constant fixed by the zero-mean constraint.

    Returns (psi, c) where c is the recovered boundary value.
    """
    solver = get_solver(rhs.grid, lam)
    psi, c = solver.solve_zero_mean_grid(_scalar_layer(rhs))
    return Field(rhs.grid, psi), c


def solve_coupled(stack, q):
    """Invert q = lap(psi) + L psi for the whole stack.

    Decouples through the modal basis, solves one zero-mean scalar problem
    per vertical mode, and transforms back.  Returns (psi, l) with l the
    per-layer boundary constants.
    """
    if q.n_layers != stack.n_layers:
        raise ValueError(
            f"field has {q.n_layers} layers but stack has {stack.n_layers}"
        )
    grid = q.grid
    q_hat = np.einsum("ij,j...->i...", stack.modes.T, q.data)
    psi_hat = np.empty_like(q_hat)
    c_hat = np.empty(stack.n_layers)
    for i, lam in enumerate(stack.eigenvalues):
        solver = get_solver(grid, lam)
        psi_hat[i], c_hat[i] = solver.solve_zero_mean_grid(q_hat[i])
    psi = np.einsum("ij,j...->i...", stack.modes, psi_hat)
    l = stack.modes @ c_hat
    return Field(grid, psi), l
