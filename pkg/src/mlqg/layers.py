"""Vertical structure of the layer stack.

The stretching term that couples the layers is L = F^2 T, with T the
symmetric tridiagonal matrix whose interior rows are (1, -2, 1) and whose
end rows are one-sided, (-1, 1) and (1, -1).  Row sums vanish, so the
barotropic (layer-mean) component carries no interface energy.  The
eigenvalues of L are nonpositive; diagonalizing L turns the coupled
inversion q = lap(psi) + L psi into independent scalar Helmholtz problems,
one per vertical mode.
"""

import numpy as np

__all__ = [
    "LayerStack",
    "build_coupling_matrix",
    "modal_decomposition",
    "to_modal",
    "from_modal",
]


def build_coupling_matrix(n_layers, froude=1.0):
    """Interface coupling matrix for ``n_layers`` equal layers.

    Parameters
    ----------
    n_layers : int
        Number of layers, at least 1.
    froude : float
        Common Froude number F.  A single scalar is required: per-layer
        values would break the symmetry of the matrix and with it the
        orthogonal modal decomposition.

    Returns
    -------
    ndarray
        The (n_layers, n_layers) matrix F^2 T described in the module
        docstring.  For one layer the matrix is simply [[0]].
    """
    n = int(n_layers)
    if n < 1:
        raise ValueError(f"n_layers must be >= 1, got {n_layers}")
    froude = float(froude)
    if not np.isfinite(froude) or froude <= 0.0:
        raise ValueError(f"froude must be a positive scalar, got {froude}")

    T = np.zeros((n, n))
    for i in range(n - 1):
        # each interface contributes a (-1, 1; 1, -1) block
        T[i, i] -= 1.0
        T[i + 1, i + 1] -= 1.0
        T[i, i + 1] += 1.0
        T[i + 1, i] += 1.0
    return froude**2 * T


def modal_decomposition(coupling):
    """Eigenvalues and orthonormal eigenvector basis of a coupling matrix.

    Returns ``(eigenvalues, modes)`` with eigenvalues sorted in descending
    order and ``modes[:, i]`` the eigenvector of ``eigenvalues[i]``.  The
    leading eigenvalue is the barotropic zero: it is pinned to exactly 0.0
    and its eigenvector to the constant column (1, ..., 1)/sqrt(n), rather
    than trusting the eigensolver's rounding.  Every column's sign is fixed
    so that its first significant entry is positive, which makes the basis
    deterministic.
    """
    L = np.asarray(coupling, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"coupling matrix must be square, got shape {L.shape}")
    if not np.allclose(L, L.T, rtol=0.0, atol=1e-12 * (1.0 + np.abs(L).max())):
        raise ValueError("coupling matrix must be symmetric")
    n = L.shape[0]

    lam, vecs = np.linalg.eigh(L)  # ascending
    lam = lam[::-1].copy()
    vecs = vecs[:, ::-1].copy()

    if abs(lam[0]) > 1e-10 * max(1.0, np.abs(L).max()):
        raise ValueError("leading eigenvalue is not the expected zero mode")
    lam[0] = 0.0
    vecs[:, 0] = 1.0 / np.sqrt(n)

    for i in range(1, n):
        col = vecs[:, i]
        lead = col[np.abs(col) > 1e-8 * np.abs(col).max()][0]
        if lead < 0.0:
            vecs[:, i] = -col
    return lam, vecs


def to_modal(stack, field):
    """Project per-layer values onto modal coefficients (P^T applied layerwise)."""
    return stack.project(field, stack.modes.T)


def from_modal(stack, field):
    """Rebuild per-layer values from modal coefficients (P applied modewise)."""
    return stack.project(field, stack.modes)


class LayerStack:
    """A stack of equal-depth layers with a common Froude number.

    Attributes
    ----------
    n_layers : int
    froude : float
    coupling : ndarray
        The coupling matrix L = F^2 T.
    eigenvalues : ndarray
        Descending, eigenvalues[0] == 0 exactly.
    modes : ndarray
        Orthonormal eigenvector basis, one mode per column; modes[:, 0] is
        the constant barotropic column.
    """

    def __init__(self, n_layers, froude=1.0):
        self.n_layers = int(n_layers)
        self.froude = float(froude)
        self.coupling = build_coupling_matrix(n_layers, froude)
        self.eigenvalues, self.modes = modal_decomposition(self.coupling)

    def __repr__(self):
        return f"LayerStack(n_layers={self.n_layers}, froude={self.froude})"

    def project(self, field, matrix):
        """Apply ``matrix`` along the layer axis of ``field``.

        ``field`` may be an ndarray whose leading axis has length n_layers,
        or a domain Field; the result has the type of the input.
        """
        # bare ndarrays also have a .data attribute (the buffer), so the
        # domain Field is recognized by its grid instead
        is_field = hasattr(field, "grid")
        data = field.data if is_field else np.asarray(field)
        if data.shape[0] != self.n_layers:
            raise ValueError(
                f"leading axis {data.shape[0]} does not match "
                f"n_layers={self.n_layers}"
            )
        out = np.einsum("ij,j...->i...", matrix, data)
        if is_field:
            return type(field)(field.grid, out)
        return out
