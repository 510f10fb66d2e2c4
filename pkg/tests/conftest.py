"""Shared fixtures and evaluation helpers for the test suite."""
import numpy as np
import pytest

from lsfem import fem
from lsfem.assembly import ProblemSpec
from lsfem.mesh import build_topology, generate_structured


@pytest.fixture(scope="session")
def two_triangle():
    mesh = generate_structured(1, 0.0)
    topo = build_topology(mesh)
    return mesh, topo


def make_case(n, k, perturb=0.0, slit=None):
    mesh = generate_structured(n, perturb)
    topo = build_topology(mesh, slit=slit)
    dofmap = fem.build_dofmap(mesh, topo, k)
    return mesh, topo, dofmap


def polynomial_problem(eps, k, c_coeff=1.0):
    """Manufactured problem whose solution has degree exactly k+1, so the
    pair (q, u) lies in the discrete space and the residual minimum is 0."""
    if k == 0:
        u = lambda x, y: 1.0 + 2.0 * x - 3.0 * y
        grad = lambda x, y: np.stack(
            [np.full(np.shape(x), 2.0), np.full(np.shape(x), -3.0)], axis=-1
        )
        lap = lambda x, y: np.zeros(np.shape(x))
    elif k == 1:
        u = lambda x, y: x * x - 2.0 * x * y + 3.0 * y * y + x - y + 1.0
        grad = lambda x, y: np.stack(
            [2.0 * x - 2.0 * y + 1.0, -2.0 * x + 6.0 * y - 1.0], axis=-1
        )
        lap = lambda x, y: np.full(np.shape(x), 8.0)
    else:
        u = lambda x, y: x**3 - y**3 + 2.0 * x * y * y - x * x + y + 2.0
        grad = lambda x, y: np.stack(
            [3.0 * x * x + 2.0 * y * y - 2.0 * x, -3.0 * y * y + 4.0 * x * y + 1.0], axis=-1
        )
        lap = lambda x, y: 10.0 * x - 6.0 * y - 2.0
    c = lambda x, y: np.full(np.shape(x), c_coeff)
    zero = lambda x, y: np.zeros(np.shape(x))
    beta = lambda x, y: np.stack([np.ones(np.shape(x)), np.ones(np.shape(x))], axis=-1)

    def f(x, y):
        g = grad(x, y)
        return -eps * lap(x, y) + g[..., 0] + g[..., 1] + c_coeff * u(x, y)

    return ProblemSpec(
        name=f"poly-k{k}",
        epsilon=eps,
        beta=beta,
        div_beta=zero,
        c=c,
        f=f,
        g=u,
        exact_u=u,
        exact_grad=grad,
        exact_lap=lap,
    )


def edge_traces(mesh, topo, dofmap, edge, t):
    """Normal traces of every supported global vector dof on one edge,
    evaluated from each incident element against the edge's oriented normal
    at physical points lo + t (hi - lo). Returns {tri: {global: trace}}."""
    geo = fem.element_geometry(mesh)
    n_f = topo.normals[edge]
    out = {}
    for tri in topo.edge_to_tri[edge]:
        if tri < 0:
            continue
        le = int(np.flatnonzero(topo.tri_to_edge[tri] == edge)[0])
        a, b = fem.LOCAL_EDGES[le]
        ga, gb = mesh.triangles[tri, a], mesh.triangles[tri, b]
        t_local = t if ga < gb else 1.0 - t
        ref = fem.edge_ref_points(le, t_local)
        vals, _ = fem.q_tables(dofmap.degree, ref, geo)
        trace = vals[tri] @ n_f  # (nloc, npts)
        per_dof = {}
        for i in range(dofmap.nloc_q):
            g = int(dofmap.q_index[tri, i])
            per_dof[g] = per_dof.get(g, 0.0) + dofmap.q_sign[tri, i] * trace[i]
        out[int(tri)] = per_dof
    return out


def edge_w_values(mesh, topo, dofmap, edge, t):
    """Scalar basis traces per incident element, keyed by global W dof."""
    m = dofmap.degree
    out = {}
    for tri in topo.edge_to_tri[edge]:
        if tri < 0:
            continue
        le = int(np.flatnonzero(topo.tri_to_edge[tri] == edge)[0])
        a, b = fem.LOCAL_EDGES[le]
        ga, gb = mesh.triangles[tri, a], mesh.triangles[tri, b]
        t_local = t if ga < gb else 1.0 - t
        vals, _ = fem.lagrange_basis(m, fem.edge_ref_points(le, t_local))
        per_dof = {}
        for i in range(dofmap.nloc_w):
            g = int(dofmap.w_index[tri, i])
            per_dof[g] = per_dof.get(g, 0.0) + vals[i]
        out[int(tri)] = per_dof
    return out
