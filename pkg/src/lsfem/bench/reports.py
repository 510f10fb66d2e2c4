"""CSV and VTK emission. Output bytes are deterministic for fixed inputs:
fixed float formatting, fixed row order, no timestamps.
"""
from __future__ import annotations

import os

import numpy as np

from ..mesh import Mesh

CONVERGENCE_HEADER = "level,h,ndofs,e_L2,eoc_L2,e_grad,eoc_grad,e_stream,e_bdry"
CONDITION_HEADER = "level,n,eps,ndofs,h,lambda_min,lambda_max,kappa,kappa_ratio,method"


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.12e}"


def write_convergence_csv(reports, path: str) -> None:
    """One row per mesh level; EOC columns empty on the first level."""
    _ensure_dir(path)
    lines = [CONVERGENCE_HEADER]
    for r in reports:
        lines.append(
            ",".join(
                [
                    str(r.level),
                    _fmt(r.h),
                    str(r.n_dofs),
                    _fmt(r.e_L2),
                    _fmt(r.eoc_L2),
                    _fmt(r.e_grad),
                    _fmt(r.eoc_grad),
                    _fmt(r.e_stream),
                    _fmt(r.e_bdry),
                ]
            )
        )
    _write_text(path, lines)


def write_condition_csv(rows, path: str) -> None:
    _ensure_dir(path)
    lines = [CONDITION_HEADER]
    for r in rows:
        est = r.estimate
        lines.append(
            ",".join(
                [
                    str(r.level),
                    str(r.n),
                    _fmt(r.epsilon),
                    str(r.n_dofs),
                    _fmt(r.h),
                    _fmt(est.lambda_min),
                    _fmt(est.lambda_max),
                    _fmt(est.kappa),
                    _fmt(r.kappa_ratio),
                    est.method,
                ]
            )
        )
    _write_text(path, lines)


def write_vtk(
    mesh: Mesh,
    u_at_vertices: np.ndarray,
    q_at_cells,
    path: str,
    title: str = "lsfem solution",
) -> None:
    """Legacy ASCII unstructured grid: scalar "u" on points, vector "q" on cells."""
    _ensure_dir(path)
    V, T = mesh.num_vertices, mesh.num_triangles
    lines = [
        "# vtk DataFile Version 2.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {V} double",
    ]
    for x, y in mesh.vertices:
        lines.append(f"{x:.12e} {y:.12e} 0.0")
    lines.append(f"CELLS {T} {4 * T}")
    for i, j, k in mesh.triangles:
        lines.append(f"3 {i} {j} {k}")
    lines.append(f"CELL_TYPES {T}")
    lines.extend(["5"] * T)
    lines.append(f"POINT_DATA {V}")
    lines.append("SCALARS u double")
    lines.append("LOOKUP_TABLE default")
    for v in u_at_vertices:
        lines.append(f"{v:.12e}")
    if q_at_cells is not None:
        lines.append(f"CELL_DATA {T}")
        lines.append("VECTORS q double")
        for qx, qy in q_at_cells:
            lines.append(f"{qx:.12e} {qy:.12e} 0.0")
    _write_text(path, lines)


def _ensure_dir(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _write_text(path: str, lines) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
