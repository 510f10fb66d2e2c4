"""Assembly of the symmetric least-squares systems.

The bilinear form pairs the two first-order residuals (vector residual
q + sqrt(eps) grad u, scalar residual sqrt(eps) div q + beta.grad u + c u)
with themselves and adds a boundary penalty whose weight is

    weak:     (eps + max(-beta.n, 0)) / h_F
    alt-weak: eps / h_F + max(-beta.n, 0)

so outflow faces are constrained only at O(eps). Strong mode drops the
penalty and eliminates boundary scalar DOFs symmetrically instead. The
pure-transport specialization keeps only the scalar residual and the
inflow part of the penalty.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.sparse import coo_matrix, diags

from . import fem
from .mesh import Mesh, Topology
from .solver import SparseSym

BC_MODES = ("weak", "strong", "alt-weak")


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients and data of -eps*lap(u) + beta.grad(u) + c*u = f.

    All coefficient callables take numpy arrays (x, y) and broadcast;
    ``beta`` and ``exact_grad`` return arrays with a trailing axis of 2.
    ``epsilon == 0`` marks pure transport. ``slit_g`` holds data prescribed
    on flagged interior edges, where applicable.
    """

    name: str
    epsilon: float
    beta: Callable
    div_beta: Callable
    c: Callable
    f: Callable
    g: Callable
    exact_u: Optional[Callable] = None
    exact_grad: Optional[Callable] = None
    exact_lap: Optional[Callable] = None
    slit_g: Optional[Callable] = None
    notes: tuple = ()

    def residual(self, x, y):
        """PDE residual of the exact solution; zero for manufactured f."""
        if self.exact_u is None or self.exact_grad is None or self.exact_lap is None:
            raise ValueError(f"problem {self.name!r} has no exact solution")
        grad = self.exact_grad(x, y)
        conv = (self.beta(x, y) * grad).sum(axis=-1)
        return (
            -self.epsilon * self.exact_lap(x, y)
            + conv
            + self.c(x, y) * self.exact_u(x, y)
            - self.f(x, y)
        )

    def reaction_margin(self, x, y):
        """c - div(beta)/2, nonnegative under the coercivity assumption."""
        return self.c(x, y) - 0.5 * self.div_beta(x, y)


@dataclass
class LinearSystem:
    """Sparse SPD system with optional record of eliminated scalar DOFs.

    ``dirichlet`` lists (W-block index, value) pairs fixed by strong
    boundary imposition; indices are offset by ``n_q`` in the matrix.
    """

    matrix: SparseSym
    rhs: np.ndarray
    n_q: int
    n_w: int
    dirichlet: list = field(default_factory=list)


def _scalar_field(fn, x, y) -> np.ndarray:
    """Evaluate a scalar coefficient, broadcasting constants to x's shape."""
    return np.broadcast_to(np.asarray(fn(x, y), dtype=float), np.shape(x))


def face_weight(bc_mode: str, eps: float, beta_n: np.ndarray, h_f: float) -> np.ndarray:
    """Boundary penalty weight at face quadrature points."""
    inflow = np.maximum(-beta_n, 0.0)
    if bc_mode == "weak":
        return (eps + inflow) / h_f
    if bc_mode == "alt-weak":
        return eps / h_f + inflow
    raise ValueError(f"no boundary weight in mode {bc_mode!r}")


def assemble_ls(
    problem: ProblemSpec,
    mesh: Mesh,
    topo: Topology,
    dofmap: fem.DofMap,
    bc_mode: str = "weak",
) -> LinearSystem:
    """Assemble the least-squares system for the diffusive problem."""
    if bc_mode not in BC_MODES:
        raise ValueError(f"bc_mode must be one of {BC_MODES}, got {bc_mode!r}")
    if problem.epsilon <= 0.0:
        raise ValueError("epsilon must be positive; use assemble_transport for epsilon == 0")
    if dofmap.q_index.shape[0] != mesh.num_triangles:
        raise ValueError("dofmap was built for a different mesh")

    eps = problem.epsilon
    se = np.sqrt(eps)
    m = dofmap.degree
    geo = fem.element_geometry(mesh)
    rule = fem.triangle_rule(fem.assembly_degree(dofmap.k))
    wvals, wgrads = fem.w_tables(m, rule.xy, geo)
    qvals, qdivs = fem.q_tables(m, rule.xy, geo)
    X = geo.map_points(rule.xy)
    wq = rule.weights[None, :] * geo.det[:, None]

    beta = problem.beta(X[..., 0], X[..., 1])
    cval = _scalar_field(problem.c, X[..., 0], X[..., 1])
    fval = _scalar_field(problem.f, X[..., 0], X[..., 1])

    T = mesh.num_triangles
    nq_loc, nw_loc = dofmap.nloc_q, dofmap.nloc_w
    nloc = nq_loc + nw_loc
    nq_pts = len(rule.weights)

    rvec = np.empty((T, nloc, nq_pts, 2))
    rvec[:, :nq_loc] = qvals
    rvec[:, nq_loc:] = se * wgrads
    rscal = np.empty((T, nloc, nq_pts))
    rscal[:, :nq_loc] = se * qdivs
    rscal[:, nq_loc:] = (
        np.einsum("tiqd,tqd->tiq", wgrads, beta) + cval[:, None, :] * wvals[None, :, :]
    )

    a_loc = np.einsum("tiqd,tjqd,tq->tij", rvec, rvec, wq)
    a_loc += np.einsum("tiq,tjq,tq->tij", rscal, rscal, wq)
    b_loc = np.einsum("tq,tiq,tq->ti", fval, rscal, wq)

    signs = np.concatenate([dofmap.q_sign, np.ones((T, nw_loc))], axis=1)
    a_loc *= signs[:, :, None] * signs[:, None, :]
    b_loc *= signs

    gidx = np.concatenate([dofmap.q_index, dofmap.n_q + dofmap.w_index], axis=1)
    n = dofmap.n_total
    rows = np.repeat(gidx, nloc, axis=1)
    cols = np.tile(gidx, (1, nloc))
    mat = coo_matrix((a_loc.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n)).tocsr()
    rhs = np.zeros(n)
    np.add.at(rhs, gidx.ravel(), b_loc.ravel())

    if bc_mode in ("weak", "alt-weak"):
        pen, pen_rhs = _boundary_penalty(problem, mesh, topo, dofmap, geo, bc_mode)
        mat = (mat + pen).tocsr()
        rhs += pen_rhs
        system = LinearSystem(SparseSym.from_csr(mat), rhs, dofmap.n_q, dofmap.n_w)
    else:
        system = LinearSystem(SparseSym.from_csr(mat), rhs, dofmap.n_q, dofmap.n_w)
        _eliminate_strong(system, problem, mesh, topo, dofmap)

    if topo.slit_edges.size and problem.slit_g is not None:
        system = apply_slit(system, problem, mesh, topo, dofmap)
    return system


def assemble_transport(
    problem: ProblemSpec,
    mesh: Mesh,
    topo: Topology,
    dofmap: fem.DofMap,
) -> LinearSystem:
    """Assemble the scalar-only transport-reaction system on W_h."""
    if problem.epsilon != 0.0:
        raise ValueError("transport assembly requires epsilon == 0")
    m = dofmap.degree
    geo = fem.element_geometry(mesh)
    rule = fem.triangle_rule(fem.assembly_degree(dofmap.k))
    wvals, wgrads = fem.w_tables(m, rule.xy, geo)
    X = geo.map_points(rule.xy)
    wq = rule.weights[None, :] * geo.det[:, None]

    beta = problem.beta(X[..., 0], X[..., 1])
    cval = _scalar_field(problem.c, X[..., 0], X[..., 1])
    fval = _scalar_field(problem.f, X[..., 0], X[..., 1])

    rscal = np.einsum("tiqd,tqd->tiq", wgrads, beta) + cval[:, None, :] * wvals[None, :, :]
    a_loc = np.einsum("tiq,tjq,tq->tij", rscal, rscal, wq)
    b_loc = np.einsum("tq,tiq,tq->ti", fval, rscal, wq)

    n = dofmap.n_w
    gidx = dofmap.w_index
    nloc = dofmap.nloc_w
    rows = np.repeat(gidx, nloc, axis=1)
    cols = np.tile(gidx, (1, nloc))
    mat = coo_matrix((a_loc.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n)).tocsr()
    rhs = np.zeros(n)
    np.add.at(rhs, gidx.ravel(), b_loc.ravel())

    pen, pen_rhs = _boundary_penalty(
        problem, mesh, topo, dofmap, geo, mode="transport", w_only=True
    )
    mat = (mat + pen).tocsr()
    rhs += pen_rhs
    return LinearSystem(SparseSym.from_csr(mat), rhs, 0, dofmap.n_w)


def apply_slit(
    system: LinearSystem,
    problem: ProblemSpec,
    mesh: Mesh,
    topo: Topology,
    dofmap: fem.DofMap,
) -> LinearSystem:
    """Add the interior-face penalty enforcing data on flagged slit edges.

    The weight is (eps + |beta . n_F|) / h_F with n_F the stored oriented
    normal; the absolute value keeps the term symmetric and side-agnostic.
    """
    if topo.slit_edges.size == 0:
        return system
    if problem.slit_g is None:
        raise ValueError(f"problem {problem.name!r} carries no slit data")
    geo = fem.element_geometry(mesh)
    n = system.matrix.n
    offset = system.n_q
    erule = fem.edge_rule(fem.assembly_degree(dofmap.k))
    t = erule.points[:, 0]
    m = dofmap.degree
    trace = [fem.lagrange_basis(m, fem.edge_ref_points(le, t))[0] for le in range(3)]

    rows, cols, vals = [], [], []
    rhs_add = np.zeros(n)
    for e in topo.slit_edges:
        tri = topo.edge_to_tri[e, 0]
        le = int(np.flatnonzero(topo.tri_to_edge[tri] == e)[0])
        pts = geo.v0[tri] + fem.edge_ref_points(le, t) @ geo.jac[tri].T
        beta_n = problem.beta(pts[:, 0], pts[:, 1]) @ topo.normals[e]
        weight = (problem.epsilon + np.abs(beta_n)) / topo.h_F[e]
        scale = weight * erule.weights * topo.h_F[e]
        tv = trace[le]
        local = np.einsum("aq,bq,q->ab", tv, tv, scale)
        gdofs = offset + dofmap.w_index[tri]
        rows.append(np.repeat(gdofs, len(gdofs)))
        cols.append(np.tile(gdofs, len(gdofs)))
        vals.append(local.ravel())
        gslit = _scalar_field(problem.slit_g, pts[:, 0], pts[:, 1])
        np.add.at(rhs_add, gdofs, tv @ (scale * gslit))
    pen = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    mat = (system.matrix.to_scipy() + pen).tocsr()
    return LinearSystem(
        SparseSym.from_csr(mat),
        system.rhs + rhs_add,
        system.n_q,
        system.n_w,
        system.dirichlet,
    )


def boundary_w_dofs(mesh: Mesh, topo: Topology, dofmap: fem.DofMap) -> np.ndarray:
    """W-block indices of all Lagrange nodes lying on the boundary."""
    m = dofmap.degree
    b = topo.boundary_edges
    verts = np.unique(topo.edges[b].ravel())
    if m == 1:
        return verts
    V = mesh.num_vertices
    edge_nodes = (V + b[:, None] * (m - 1) + np.arange(m - 1)[None, :]).ravel()
    return np.concatenate([verts, edge_nodes])


def mass_diagonal(mesh: Mesh, dofmap: fem.DofMap, w_only: bool = False) -> np.ndarray:
    """Squared L2 norms of the global basis functions, blockwise [Q | W].

    Used to rescale assembled systems so matrix Rayleigh quotients mirror
    the function-space ones when estimating condition numbers.
    """
    geo = fem.element_geometry(mesh)
    m = dofmap.degree
    rule = fem.triangle_rule(2 * m + 2)
    wq = rule.weights[None, :] * geo.det[:, None]
    wvals, _ = fem.w_tables(m, rule.xy, geo)
    diag = np.zeros(dofmap.n_w if w_only else dofmap.n_total)
    offset = 0 if w_only else dofmap.n_q
    w_sq = np.einsum("iq,iq,tq->ti", wvals, wvals, wq)
    np.add.at(diag, offset + dofmap.w_index.ravel(), w_sq.ravel())
    if not w_only:
        qvals, _ = fem.q_tables(m, rule.xy, geo)
        q_sq = np.einsum("tiqd,tiqd,tq->ti", qvals, qvals, wq)
        np.add.at(diag, dofmap.q_index.ravel(), q_sq.ravel())
    return diag


def _boundary_penalty(problem, mesh, topo, dofmap, geo, mode, w_only=False):
    """Boundary face terms; returns (sparse matrix, rhs vector)."""
    n = dofmap.n_w if w_only else dofmap.n_total
    offset = 0 if w_only else dofmap.n_q
    erule = fem.edge_rule(fem.assembly_degree(dofmap.k))
    t = erule.points[:, 0]
    m = dofmap.degree
    trace = [fem.lagrange_basis(m, fem.edge_ref_points(le, t))[0] for le in range(3)]
    ref_edge = [fem.edge_ref_points(le, t) for le in range(3)]

    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    bedges = topo.boundary_edges
    tris = topo.edge_to_tri[bedges, 0]
    local = np.argmax(topo.tri_to_edge[tris] == bedges[:, None], axis=1)
    outward = topo.outward_normals(bedges)
    for le in range(3):
        sel = np.flatnonzero(local == le)
        if sel.size == 0:
            continue
        e_ids = bedges[sel]
        tri_ids = tris[sel]
        pts = geo.v0[tri_ids][:, None, :] + np.einsum(
            "tdr,qr->tqd", geo.jac[tri_ids], ref_edge[le]
        )
        beta_n = np.einsum(
            "eqd,ed->eq", problem.beta(pts[..., 0], pts[..., 1]), outward[sel]
        )
        h = topo.h_F[e_ids]
        if mode == "transport":
            weight = np.maximum(-beta_n, 0.0) / h[:, None]
        else:
            weight = face_weight(mode, problem.epsilon, beta_n, h[:, None])
        scale = weight * erule.weights[None, :] * h[:, None]
        tv = trace[le]
        block = np.einsum("aq,bq,eq->eab", tv, tv, scale)
        gval = _scalar_field(problem.g, pts[..., 0], pts[..., 1])
        rhs_block = np.einsum("aq,eq->ea", tv, scale * gval)
        gdofs = offset + dofmap.w_index[tri_ids]
        nw = gdofs.shape[1]
        rows.append(np.repeat(gdofs, nw, axis=1).ravel())
        cols.append(np.tile(gdofs, (1, nw)).ravel())
        vals.append(block.ravel())
        np.add.at(rhs, gdofs.ravel(), rhs_block.ravel())
    if rows:
        pen = coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )
    else:
        pen = coo_matrix((n, n))
    return pen, rhs


def _eliminate_strong(system, problem, mesh, topo, dofmap):
    """Interpolate g at boundary scalar nodes and eliminate symmetrically."""
    wdofs = boundary_w_dofs(mesh, topo, dofmap)
    coords = dofmap.w_coords[wdofs]
    values = _scalar_field(problem.g, coords[:, 0], coords[:, 1]).copy()
    idx = system.n_q + wdofs

    A = system.matrix.to_scipy()
    n = A.shape[0]
    xk = np.zeros(n)
    xk[idx] = values
    rhs = system.rhs - A @ xk
    keep = np.ones(n)
    keep[idx] = 0.0
    D = diags(keep)
    A = (D @ A @ D + diags(1.0 - keep)).tocsr()
    rhs[idx] = values
    system.matrix = SparseSym.from_csr(A)
    system.rhs = rhs
    system.dirichlet = list(zip(wdofs.tolist(), values.tolist()))
