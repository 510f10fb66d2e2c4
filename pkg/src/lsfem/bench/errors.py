"""Error norms of discrete solutions against catalog exact solutions,
with optional restriction to a subdomain, plus the nodal/moment
interpolation operator used by exactness and sanity tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import fem
from ..assembly import ProblemSpec, _scalar_field
from ..mesh import Mesh, Topology


@dataclass
class ErrorReport:
    """Norm components of the discrete error on one mesh level.

    ``e_grad`` is scaled by sqrt(eps); ``e_bdry`` uses the boundary weight
    (eps + max(-beta.n, 0))^(1/2) with the face-size factor h_F^(-1/2).
    EOC fields are filled by convergence_study once a previous level exists.
    """

    level: int
    h: float
    n_dofs: int
    e_L2: float
    e_grad: float
    e_q: float
    e_stream: float
    e_bdry: float
    region: str = "full"
    eoc_L2: Optional[float] = None
    eoc_grad: Optional[float] = None
    eoc_q: Optional[float] = None
    eoc_stream: Optional[float] = None


def region_elements(mesh: Mesh, region, tol: float = 1e-12) -> np.ndarray:
    """Elements whose every vertex lies inside the closed box region."""
    if region is None:
        return np.arange(mesh.num_triangles)
    xmin, xmax, ymin, ymax = region
    p = mesh.vertices[mesh.triangles]
    inside = (
        (p[..., 0] >= xmin - tol)
        & (p[..., 0] <= xmax + tol)
        & (p[..., 1] >= ymin - tol)
        & (p[..., 1] <= ymax + tol)
    )
    return np.flatnonzero(inside.all(axis=1))


def error_norms(
    solution: np.ndarray,
    mesh: Mesh,
    topo: Topology,
    dofmap: fem.DofMap,
    problem: ProblemSpec,
    region=None,
    level: int = 0,
) -> ErrorReport:
    """Evaluate the error norm components with elevated quadrature.

    ``solution`` is the full [Q | W] coefficient vector, or a W-only vector
    of length n_w for transport solves (then e_q and e_grad drop out of the
    vector part naturally since eps = 0).
    """
    if problem.exact_u is None or problem.exact_grad is None:
        raise ValueError(f"problem {problem.name!r} has no exact solution")
    transport = len(solution) == dofmap.n_w
    coef_w = solution if transport else solution[dofmap.n_q:]
    eps = problem.epsilon
    se = np.sqrt(eps)

    sel = region_elements(mesh, region)
    geo = fem.element_geometry(mesh)
    rule = fem.triangle_rule(fem.error_degree(dofmap.k))
    m = dofmap.degree
    wvals, wgrads = fem.w_tables(m, rule.xy, geo)
    X = geo.map_points(rule.xy)
    wq = rule.weights[None, :] * geo.det[:, None]

    cw = coef_w[dofmap.w_index]                      # (T, nloc_w)
    u_h = np.einsum("iq,ti->tq", wvals, cw)
    grad_h = np.einsum("tiqd,ti->tqd", wgrads, cw)

    u_ex = _scalar_field(problem.exact_u, X[..., 0], X[..., 1])
    grad_ex = problem.exact_grad(X[..., 0], X[..., 1])
    beta = problem.beta(X[..., 0], X[..., 1])

    du = (u_ex - u_h)[sel]
    dgrad = (grad_ex - grad_h)[sel]
    w_sel = wq[sel]
    e_l2 = np.sqrt(np.einsum("tq,tq->", du**2, w_sel))
    e_grad = se * np.sqrt(np.einsum("tqd,tqd,tq->", dgrad, dgrad, w_sel))
    e_stream = np.sqrt(
        np.einsum("tq,tq->", np.einsum("tqd,tqd->tq", beta[sel], dgrad) ** 2, w_sel)
    )

    if transport:
        e_q = 0.0
    else:
        qvals, _ = fem.q_tables(m, rule.xy, geo)
        cq = (dofmap.q_sign * solution[dofmap.q_index])
        q_h = np.einsum("tiqd,ti->tqd", qvals, cq)
        dq = (-se * grad_ex - q_h)[sel]
        e_q = np.sqrt(np.einsum("tqd,tqd,tq->", dq, dq, w_sel))

    e_bdry = _boundary_error(coef_w, mesh, topo, dofmap, problem, sel)

    return ErrorReport(
        level=level,
        h=float(topo.h_K.max()),
        n_dofs=dofmap.n_w if transport else dofmap.n_total,
        e_L2=float(e_l2),
        e_grad=float(e_grad),
        e_q=float(e_q),
        e_stream=float(e_stream),
        e_bdry=float(e_bdry),
        region="full" if region is None else _region_label(region),
    )


def interpolate_solution(problem: ProblemSpec, mesh: Mesh, topo: Topology, dofmap: fem.DofMap):
    """Nodal/moment interpolant of (q, u) = (-sqrt(eps) grad u, u).

    Returns the full [Q | W] coefficient vector; for transport problems the
    Q block carries the interpolant of the zero field.
    """
    if problem.exact_u is None or problem.exact_grad is None:
        raise ValueError(f"problem {problem.name!r} has no exact solution")
    se = np.sqrt(problem.epsilon)
    coef = np.zeros(dofmap.n_total)
    xw = dofmap.w_coords
    coef[dofmap.n_q:] = _scalar_field(problem.exact_u, xw[:, 0], xw[:, 1])
    if se > 0.0:
        coef[: dofmap.n_q] = _q_moments(
            lambda x, y: -se * problem.exact_grad(x, y), mesh, topo, dofmap
        )
    return coef


def interpolate_scalar(fn, dofmap: fem.DofMap) -> np.ndarray:
    """Lagrange interpolant coefficients of a scalar callable (W block only)."""
    xw = dofmap.w_coords
    return _scalar_field(fn, xw[:, 0], xw[:, 1]).copy()


def sample_solution(solution: np.ndarray, mesh: Mesh, dofmap: fem.DofMap):
    """Vertex values of u_h and cell-center values of q_h for plotting.

    Vertex Lagrange coefficients are nodal values directly; q_h is
    evaluated at the element centroid. Returns (u_vertices, q_cells) with
    q_cells None for W-only (transport) vectors.
    """
    transport = len(solution) == dofmap.n_w
    coef_w = solution if transport else solution[dofmap.n_q:]
    u_vertices = coef_w[: mesh.num_vertices].copy()
    if transport:
        return u_vertices, None
    geo = fem.element_geometry(mesh)
    center = np.array([[1.0 / 3.0, 1.0 / 3.0]])
    qvals, _ = fem.q_tables(dofmap.degree, center, geo)
    cq = dofmap.q_sign * solution[dofmap.q_index]
    q_cells = np.einsum("tiqd,ti->tqd", qvals, cq)[:, 0, :]
    return u_vertices, q_cells


def _q_moments(field, mesh: Mesh, topo: Topology, dofmap: fem.DofMap) -> np.ndarray:
    """Global vector DOFs of a smooth field: Legendre edge moments along the
    global edge direction plus reference interior moments."""
    m = dofmap.degree
    n_edge = fem.rt_edge_dofs(m)
    out = np.zeros(dofmap.n_q)
    erule = fem.edge_rule(2 * m + 4)
    t = erule.points[:, 0]
    lo = mesh.vertices[topo.edges[:, 0]]
    hi = mesh.vertices[topo.edges[:, 1]]
    pts = lo[:, None, :] + t[None, :, None] * (hi - lo)[:, None, :]
    fvals = field(pts[..., 0], pts[..., 1])          # (E, nq, 2)
    fn = np.einsum("eqd,ed->eq", fvals, topo.normals)
    for j in range(n_edge):
        leg = fem.basis.edge_moment_weight(j, t)
        out[np.arange(topo.num_edges) * n_edge + j] = np.einsum(
            "eq,q,e->e", fn, leg * erule.weights, topo.h_F
        )

    n_int = m * (m + 1)
    if n_int:
        geo = fem.element_geometry(mesh)
        rule = fem.triangle_rule(2 * m + 4)
        X = geo.map_points(rule.xy)
        fvals = field(X[..., 0], X[..., 1])          # (T, nq, 2)
        # reference pullback det(J) J^{-1} f keeps the interior moments affine-invariant
        inv = np.swapaxes(geo.inv_t, 1, 2)           # J^{-1}
        fhat = np.einsum("trd,tqd->tqr", inv, fvals) * geo.det[:, None, None]
        tests = fem.basis.rt_interior_tests(m, rule.xy)
        moments = np.einsum("tqd,iqd,q->ti", fhat, tests, rule.weights)
        base = topo.num_edges * n_edge
        out[base:] = moments.ravel()
    return out


def _boundary_error(coef_w, mesh, topo, dofmap, problem, sel):
    eps = problem.epsilon
    m = dofmap.degree
    erule = fem.edge_rule(fem.error_degree(dofmap.k))
    t = erule.points[:, 0]
    trace = [fem.lagrange_basis(m, fem.edge_ref_points(le, t))[0] for le in range(3)]
    geo = fem.element_geometry(mesh)
    selmask = np.zeros(mesh.num_triangles, dtype=bool)
    selmask[sel] = True

    total = 0.0
    for e in topo.boundary_edges:
        tri = topo.edge_to_tri[e, 0]
        if not selmask[tri]:
            continue
        le = int(np.flatnonzero(topo.tri_to_edge[tri] == e)[0])
        pts = geo.v0[tri] + fem.edge_ref_points(le, t) @ geo.jac[tri].T
        u_h = trace[le].T @ coef_w[dofmap.w_index[tri]]
        du = _scalar_field(problem.exact_u, pts[:, 0], pts[:, 1]) - u_h
        n_out = topo.outward_normals([e])[0]
        beta_n = problem.beta(pts[:, 0], pts[:, 1]) @ n_out
        weight = (eps + np.maximum(-beta_n, 0.0)) / topo.h_F[e]
        total += float(np.sum(weight * du**2 * erule.weights) * topo.h_F[e])
    return np.sqrt(total)


def _region_label(region) -> str:
    return f"[{region[0]:g},{region[1]:g}]x[{region[2]:g},{region[3]:g}]"
