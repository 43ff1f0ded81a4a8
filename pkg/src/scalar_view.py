# src/scalar_view.py
"""The cube code seen as one long scalar code.

Row (z, l) of H_scalar is the parity check h(z, l) evaluated directly on the
stored symbols A; column (j, z') is symbol A of node j in plane z'.  Entries
are kept as sparse triplets; ``dense`` materialises a galois matrix for small
instances.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf_field import FieldTable


@dataclass
class ScalarView:
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    shape: tuple
    field: FieldTable

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    def row_weights(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.shape[0])

    def col_weights(self) -> np.ndarray:
        return np.bincount(self.cols, minlength=self.shape[1])

    def dense(self):
        GF = self.field.gf
        H = np.zeros(self.shape, dtype=np.int64)
        H[self.rows, self.cols] = self.vals
        return GF(H)

    def syndrome(self, flat: np.ndarray) -> np.ndarray:
        """H_scalar @ flat for flat of shape (n * alpha, S)."""
        flat = np.asarray(flat)
        prod = self.field.mul_arrays(self.vals[:, None], flat[self.cols].astype(np.int64))
        out = np.zeros((self.shape[0], flat.shape[1]), dtype=prod.dtype)
        np.bitwise_xor.at(out, self.rows, prod)
        return out


def scalar_parity_check(codec) -> ScalarView:
    """Triplets of H_scalar for a field instance of the cube code."""
    g = codec.geom
    theta = codec.theta.matrix
    f = codec.field
    u = codec.coupler.u
    q, t, alpha = g.q, g.t, g.alpha
    r, n = theta.shape

    ell = np.arange(r, dtype=np.int64)
    z = np.arange(alpha, dtype=np.int64)
    j = np.arange(n, dtype=np.int64)

    # theta_{l,(x,y)} on A(x, y; z)
    rows1 = (z[:, None, None] * r + ell[None, :, None]) + 0 * j[None, None, :]
    cols1 = j[None, None, :] * alpha + z[:, None, None] + 0 * ell[None, :, None]
    vals1 = np.broadcast_to(theta[None, :, :], rows1.shape)

    # u * theta_{l,(x,y)} on A(z_y, y; x, z_{~y}) for x != z_y
    x_of = j % q
    yi_of = j // q
    partner_col = yi_of[None, :] * q + g.digits[:, yi_of]            # (alpha, n)
    comp = g.companion_plane[x_of, yi_of, :].T                        # (alpha, n)
    paired = ~g.fixed[x_of, yi_of, :].T                               # (alpha, n)
    utheta = np.array([[f.mul(u, int(v)) for v in row] for row in theta], dtype=np.int64)
    rows2 = z[:, None, None] * r + ell[None, :, None] + 0 * j[None, None, :]
    cols2 = (partner_col * alpha + comp)[:, None, :] + 0 * ell[None, :, None]
    vals2 = np.broadcast_to(utheta[None, :, :], rows2.shape)
    mask2 = np.broadcast_to(paired[:, None, :], rows2.shape)

    rows = np.concatenate([rows1.ravel(), rows2[mask2]])
    cols = np.concatenate([cols1.ravel(), cols2[mask2]])
    vals = np.concatenate([vals1.ravel(), vals2[mask2]])
    keep = vals != 0
    return ScalarView(rows=rows[keep], cols=cols[keep], vals=vals[keep],
                      shape=(alpha * r, alpha * n), field=f)
