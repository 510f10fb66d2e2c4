import numpy as np
import pytest

from conftest import make_case, polynomial_problem
from lsfem.bench import error_norms, get_problem, interpolate_solution, sample_solution
from lsfem.bench.errors import region_elements


@pytest.mark.parametrize("k", [0, 1, 2])
def test_interpolant_of_polynomial_has_zero_error(k):
    problem = polynomial_problem(0.2, k)
    mesh, topo, dm = make_case(3, k, perturb=0.2)
    coef = interpolate_solution(problem, mesh, topo, dm)
    report = error_norms(coef, mesh, topo, dm, problem)
    for field in ("e_L2", "e_grad", "e_q", "e_stream", "e_bdry"):
        assert getattr(report, field) <= 1e-10


def test_zero_solution_gives_exact_norm():
    # || sin(2 pi x) sin(2 pi y) ||_L2 = 1/2 by the closed-form integral
    problem = get_problem("smooth", 1e-3)
    mesh, topo, dm = make_case(16, 0, perturb=0.0)
    zero = np.zeros(dm.n_total)
    report = error_norms(zero, mesh, topo, dm, problem)
    assert report.e_L2 == pytest.approx(0.5, abs=1e-9)


def test_region_filter_excludes_touching_elements():
    mesh, topo, dm = make_case(10, 0, perturb=0.0)
    sel = region_elements(mesh, (0.0, 0.9, 0.0, 0.9))
    outside = np.setdiff1d(np.arange(mesh.num_triangles), sel)
    pts = mesh.vertices[mesh.triangles]
    assert (pts[sel].max() <= 0.9 + 1e-12)
    # every excluded element touches the strip beyond 0.9
    assert (pts[outside].reshape(len(outside), -1, 2).max(axis=1) > 0.9 - 1e-12).any(axis=1).all()


def test_subdomain_error_never_exceeds_full():
    problem = get_problem("smooth", 1e-3)
    mesh, topo, dm = make_case(8, 0, perturb=0.1)
    coef = interpolate_solution(problem, mesh, topo, dm)
    coef += 1e-3 * np.sin(np.arange(dm.n_total))  # perturb to get nonzero error
    full = error_norms(coef, mesh, topo, dm, problem)
    sub = error_norms(coef, mesh, topo, dm, problem, region=(0.0, 0.9, 0.0, 0.9))
    assert sub.e_L2 <= full.e_L2
    assert sub.region == "[0,0.9]x[0,0.9]"


def test_missing_exact_solution_rejected():
    problem = get_problem("interior-layer", 1e-3)
    mesh, topo, dm = make_case(2, 0)
    with pytest.raises(ValueError, match="exact"):
        error_norms(np.zeros(dm.n_total), mesh, topo, dm, problem)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_interpolant_error_decays_at_optimal_rate(k):
    # isolates the discrete spaces from the solver: nodal interpolation of
    # the smooth solution must converge at least at rate k+1.8 in L2
    problem = get_problem("smooth", 1e-3)
    errors = []
    for n in (8, 16, 32):
        mesh, topo, dm = make_case(n, k, perturb=0.15)
        coef = interpolate_solution(problem, mesh, topo, dm)
        errors.append(error_norms(coef, mesh, topo, dm, problem).e_L2)
    eoc = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert eoc[-1] >= k + 1.8


def test_transport_vector_accepted():
    problem = get_problem("transport")
    mesh, topo, dm = make_case(4, 0, perturb=0.1)
    coef = np.zeros(dm.n_w)
    report = error_norms(coef, mesh, topo, dm, problem)
    assert report.e_q == 0.0
    assert report.n_dofs == dm.n_w
    assert report.e_L2 == pytest.approx(0.5, abs=1e-6)


def test_sample_solution_shapes():
    problem = polynomial_problem(0.3, 0)
    mesh, topo, dm = make_case(3, 0, perturb=0.1)
    coef = interpolate_solution(problem, mesh, topo, dm)
    u_v, q_c = sample_solution(coef, mesh, dm)
    assert u_v.shape == (mesh.num_vertices,)
    assert q_c.shape == (mesh.num_triangles, 2)
    # vertex values equal the exact solution there; centroid flux matches
    assert np.allclose(u_v, problem.exact_u(mesh.vertices[:, 0], mesh.vertices[:, 1]))
    centers = mesh.vertices[mesh.triangles].mean(axis=1)
    expect = -np.sqrt(problem.epsilon) * problem.exact_grad(centers[:, 0], centers[:, 1])
    assert np.abs(q_c - expect).max() < 1e-10
