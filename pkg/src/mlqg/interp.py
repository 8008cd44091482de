"""Bicubic interpolation on the offset polar grid.

The interpolant is a tensor-product cubic Lagrange stencil in (r, theta).
Radially the data is padded with two ghost rings on each side: below the
pole the rings are half-turn copies of the first two rings (real data, since
f(-r, theta) = f(r, theta + pi)), past r = 1 they are cubic extensions.
When the constant boundary value b is known the extension is the unique
cubic through (f_{N-3}, f_{N-2}, f_{N-1}, b); the evaluation stencil at
r = 1 then reproduces that same cubic, so interpolating exactly on the
boundary circle returns b to roundoff.  Without b the extension
extrapolates the last four rings.

The monotone variant clamps each value to the range of the four
surrounding nodes, substituting the outermost real ring for extrapolated
ghosts, so clamped values never leave the range of the actual data.
"""

import numpy as np

__all__ = ["DiskInterpolator", "interpolate"]

# cubic extension weights past r = 1, s = (r - 1)/dr
# rows: evaluation at s = 0.5 and s = 1.5
_EXT_WITH_B = np.array(
    [  # on (f_{N-3}, f_{N-2}, f_{N-1}, b)
        [-0.2, 1.0, -3.0, 3.2],
        [-1.8, 8.0, -18.0, 12.8],
    ]
)
_EXT_FREE = np.array(
    [  # on (f_{N-4}, f_{N-3}, f_{N-2}, f_{N-1})
        [-1.0, 4.0, -6.0, 4.0],
        [-4.0, 15.0, -20.0, 10.0],
    ]
)


def _cubic_weights(t):
    """Lagrange weights on offsets (-1, 0, 1, 2) at local coordinate t."""
    tm = t - 1.0
    tp = t + 1.0
    t2 = t - 2.0
    out = np.empty(t.shape + (4,))
    out[..., 0] = -t * tm * t2 / 6.0
    out[..., 1] = tp * tm * t2 / 2.0
    out[..., 2] = -tp * t * t2 / 2.0
    out[..., 3] = tp * t * tm / 6.0
    return out


class DiskInterpolator:
    """Reusable interpolator for a stack of node-value channels."""

    def __init__(self, grid, values, boundary_values=None, monotone=False):
        values = np.asarray(values, dtype=float)
        if values.ndim == 2:
            values = values[None]
        if values.shape[1:] != (grid.n_r, grid.n_theta):
            raise ValueError(
                f"values shape {values.shape} does not match grid "
                f"({grid.n_r}, {grid.n_theta})"
            )
        self.grid = grid
        self.monotone = bool(monotone)
        n_r, n_theta = grid.n_r, grid.n_theta
        half = n_theta // 2

        # padded in theta as well (one column before, two after) so stencil
        # column lookups need no modulo in the hot path
        padded = np.empty((values.shape[0], n_r + 4, n_theta + 3))
        core = padded[:, :, 1 : n_theta + 1]
        core[:, 2:-2, :] = values
        core[:, 1, :] = np.roll(values[:, 0, :], half, axis=-1)
        core[:, 0, :] = np.roll(values[:, 1, :], half, axis=-1)
        if boundary_values is not None:
            b = np.atleast_1d(np.asarray(boundary_values, dtype=float))
            if b.shape == (1,) and values.shape[0] > 1:
                b = np.repeat(b, values.shape[0])
            if b.shape != (values.shape[0],):
                raise ValueError("one boundary value per channel required")
            stack = np.stack(
                [values[:, -3, :], values[:, -2, :], values[:, -1, :],
                 np.broadcast_to(b[:, None], values[:, -1, :].shape)],
                axis=1,
            )
            ext = np.einsum("si,cik->csk", _EXT_WITH_B, stack)
        else:
            ext = np.einsum("si,cik->csk", _EXT_FREE, values[:, -4:, :])
        core[:, -2:, :] = ext
        padded[:, :, 0] = core[:, :, -1]
        padded[:, :, n_theta + 1 :] = core[:, :, :2]
        self._padded = padded
        self._flat = padded.reshape(padded.shape[0], -1)
        stride = n_theta + 3
        # flat offsets of the 4x4 stencil around (row j0, theta cell k0)
        self._stencil = (
            np.arange(-1, 3, dtype=np.intp)[:, None] * stride
            + np.arange(0, 4, dtype=np.intp)[None, :]
        ).ravel()
        self._row_stride = stride
        self._last_real_row = n_r + 1  # in padded indexing

    def __call__(self, x, y):
        """Evaluate all channels at the given points; returns (channels, N)."""
        grid = self.grid
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        rho2 = x * x + y * y
        if np.any(rho2 > 1.0 + 1e-12):
            raise ValueError(
                "interpolation point outside the closed disk "
                f"(max x^2+y^2 = {float(rho2.max())})"
            )
        rho = np.sqrt(np.minimum(rho2, 1.0))
        theta = np.arctan2(y, x)
        theta[theta < 0.0] += 2.0 * np.pi

        u = rho * (1.0 / grid.dr) + 1.5  # padded-row coordinate
        j0 = np.floor(u).astype(np.intp)
        np.clip(j0, 1, grid.n_r + 1, out=j0)
        tr = u - j0
        v = theta * (1.0 / grid.dtheta)
        k0 = np.floor(v).astype(np.intp)
        np.clip(k0, 0, grid.n_theta - 1, out=k0)
        tt = v - k0

        # stencil columns k0-1..k0+2 sit at k0..k0+3 in the theta-padded array
        base = j0 * self._row_stride + k0
        block = np.take(self._flat, base[:, None] + self._stencil, axis=1)
        wr = _cubic_weights(tr)
        wt = _cubic_weights(tt)
        w = (wr[:, :, None] * wt[:, None, :]).reshape(x.size, 16)
        out = np.einsum("cnk,nk->cn", block, w)

        if self.monotone:
            flat = self._flat
            stride = self._row_stride
            r2 = np.minimum(j0 + 1, self._last_real_row) * stride
            r1 = j0 * stride
            k1 = k0 + 1
            k2 = k0 + 2
            lo = np.minimum(
                np.minimum(np.take(flat, r1 + k1, axis=1), np.take(flat, r1 + k2, axis=1)),
                np.minimum(np.take(flat, r2 + k1, axis=1), np.take(flat, r2 + k2, axis=1)),
            )
            hi = np.maximum(
                np.maximum(np.take(flat, r1 + k1, axis=1), np.take(flat, r1 + k2, axis=1)),
                np.maximum(np.take(flat, r2 + k1, axis=1), np.take(flat, r2 + k2, axis=1)),
            )
            np.clip(out, lo, hi, out=out)
        return out


def interpolate(field, points, boundary_values=None, monotone=False):
    """Evaluate a Field at Cartesian points inside the closed disk.

    Points must satisfy x^2 + y^2 <= 1 + 1e-12; the tolerance ring is
    snapped onto the boundary circle.  Returns an (n_layers, N) array.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != 2:
        raise ValueError(f"points must have trailing dimension 2, got {pts.shape}")
    itp = DiskInterpolator(
        field.grid, field.data, boundary_values=boundary_values, monotone=monotone
    )
    return itp(pts[..., 0], pts[..., 1])
