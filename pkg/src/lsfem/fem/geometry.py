"""Affine element geometry and basis tables on physical elements.

Scalar bases ride the affine map (values unchanged, gradients through
J^{-T}); vector bases ride the contravariant Piola map, whose divergence
is the reference divergence divided by det J.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mesh import Mesh
from . import basis


@dataclass(frozen=True)
class ElementGeometry:
    v0: np.ndarray      # (T, 2) first vertex of each element
    jac: np.ndarray     # (T, 2, 2) affine map Jacobian, columns are edge vectors
    det: np.ndarray     # (T,) determinant, positive for CCW elements
    inv_t: np.ndarray   # (T, 2, 2) inverse transpose, maps reference gradients

    def map_points(self, ref_pts: np.ndarray) -> np.ndarray:
        """Physical images of reference points, shape (T, npts, 2)."""
        return self.v0[:, None, :] + np.einsum("tdr,qr->tqd", self.jac, ref_pts)


def element_geometry(mesh: Mesh) -> ElementGeometry:
    p = mesh.vertices[mesh.triangles]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1]
    inv[:, 0, 1] = -jac[:, 0, 1]
    inv[:, 1, 0] = -jac[:, 1, 0]
    inv[:, 1, 1] = jac[:, 0, 0]
    inv /= det[:, None, None]
    return ElementGeometry(v0=p[:, 0], jac=jac, det=det, inv_t=np.swapaxes(inv, 1, 2))


def w_tables(degree: int, ref_pts: np.ndarray, geo: ElementGeometry):
    """Scalar basis values (nloc, nq) and physical gradients (T, nloc, nq, 2)."""
    vals, ref_grads = basis.lagrange_basis(degree, ref_pts)
    grads = np.einsum("tdr,iqr->tiqd", geo.inv_t, ref_grads)
    return vals, grads


def q_tables(order: int, ref_pts: np.ndarray, geo: ElementGeometry):
    """Piola-mapped vector basis values (T, nloc, nq, 2) and divergences
    (T, nloc, nq). Orientation signs are not applied here."""
    ref_vals, ref_divs = basis.rt_basis(order, ref_pts)
    vals = np.einsum("tdr,iqr->tiqd", geo.jac, ref_vals) / geo.det[:, None, None, None]
    divs = ref_divs[None, :, :] / geo.det[:, None, None]
    return vals, divs


def edge_ref_points(local_edge: int, t: np.ndarray) -> np.ndarray:
    """Reference coordinates along a directed local edge at parameters t."""
    a, b = basis.LOCAL_EDGES[local_edge]
    pa, pb = basis.REF_VERTS[a], basis.REF_VERTS[b]
    return pa[None, :] + t[:, None] * (pb - pa)[None, :]
