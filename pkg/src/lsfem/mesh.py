"""Conforming triangulations of planar domains: generation, file I/O,
uniform refinement, and edge topology with the geometric quantities the
assembly loops need (element sizes, face sizes, boundary normals).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

_JITTER_SEED = 20470


class MeshError(ValueError):
    """Invalid mesh data (parse failure, inverted or non-conforming element)."""


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh with counterclockwise elements.

    Attributes
    ----------
    vertices : (V, 2) float array
    triangles : (T, 3) int array of vertex indices, CCW after construction
    region_id : (T,) int array of element labels
    """

    vertices: np.ndarray
    triangles: np.ndarray
    region_id: np.ndarray

    def __post_init__(self):
        verts = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        tris = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise MeshError("vertices must be a (V, 2) array")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise MeshError("triangles must be a (T, 3) array")
        if tris.size and (tris.min() < 0 or tris.max() >= len(verts)):
            rows = (tris < 0).any(axis=1) | (tris >= len(verts)).any(axis=1)
            bad = int(np.argmax(rows))
            culprit = tris[bad][(tris[bad] < 0) | (tris[bad] >= len(verts))][0]
            raise MeshError(
                f"triangle {bad} references vertex {culprit} outside 0..{len(verts) - 1}"
            )
        # canonical orientation: flip clockwise triangles, then reject degenerates
        areas = _signed_areas(verts, tris)
        flip = areas < 0
        if flip.any():
            tris = tris.copy()
            tris[flip] = tris[flip][:, [0, 2, 1]]
            areas = np.abs(areas)
        if (areas <= 0).any():
            bad = int(np.argmax(areas <= 0))
            raise MeshError(f"triangle {bad} has non-positive area {areas[bad]:.3e}")
        key = np.sort(tris, axis=1)
        if len(np.unique(key, axis=0)) != len(tris):
            _, first = np.unique(key, axis=0, return_index=True)
            dup = sorted(set(range(len(tris))) - set(first.tolist()))[0]
            raise MeshError(f"duplicate triangle at index {dup}")
        region = np.asarray(self.region_id, dtype=np.int64)
        if region.shape != (len(tris),):
            raise MeshError("region_id must have one entry per triangle")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "region_id", np.ascontiguousarray(region))

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def areas(self) -> np.ndarray:
        return _signed_areas(self.vertices, self.triangles)

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in radians."""
        p = self.vertices[self.triangles]
        angles = []
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            cosv = (a * b).sum(axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            angles.append(np.arccos(np.clip(cosv, -1.0, 1.0)))
        return float(np.min(angles))


@dataclass(frozen=True)
class Topology:
    """Edge-level connectivity derived from a Mesh.

    Edges are stored with global orientation: lower vertex index first.
    ``normals[e]`` is the unit normal obtained by rotating the oriented edge
    tangent by -90 degrees; ``outward_sign`` is +-1 on boundary edges (so
    that sign * normal points out of the incident triangle) and 0 inside.
    """

    edges: np.ndarray            # (E, 2) int, edges[e, 0] < edges[e, 1]
    edge_to_tri: np.ndarray      # (E, 2) int, second entry -1 on the boundary
    tri_to_edge: np.ndarray      # (T, 3) int, local edge i opposite vertex i
    is_boundary: np.ndarray      # (E,) bool
    normals: np.ndarray          # (E, 2) float, oriented-tangent rotated by -90
    outward_sign: np.ndarray     # (E,) float
    h_K: np.ndarray              # (T,) float, sqrt of triangle area
    h_F: np.ndarray              # (E,) float, edge length
    slit_edges: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.is_boundary)

    def outward_normals(self, edge_ids) -> np.ndarray:
        """Outward unit normals for the given boundary edge ids."""
        sign = self.outward_sign[edge_ids]
        if (sign == 0).any():
            raise ValueError("outward normal requested for an interior edge")
        return self.normals[edge_ids] * sign[:, None]


def generate_structured(n: int, perturb: float = 0.0) -> Mesh:
    """Crisscross triangulation of the unit square with 2*n*n triangles.

    Cells are split along alternating diagonals. With ``perturb`` > 0 the
    interior vertices are displaced by at most ``perturb / n`` per coordinate
    using a fixed pseudo-random sequence, emulating an unstructured
    quasi-uniform family; boundary vertices stay put.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= perturb < 0.3:
        raise ValueError("perturb must lie in [0, 0.3)")
    ii, jj = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    verts = np.column_stack([ii.ravel() / n, jj.ravel() / n]).astype(float)
    if perturb > 0.0 and n > 1:
        # coordinate-hashed draws: a vertex shared between refinement levels
        # gets the same unit displacement (scaled by 1/n), which keeps the
        # mesh family correlated across levels
        shift = _coordinate_noise(verts) * (perturb / n)
        interior = (ii.ravel() != 0) & (ii.ravel() != n) & (jj.ravel() != 0) & (jj.ravel() != n)
        verts[interior] += shift[interior]
    tris = []
    vid = lambda i, j: i * (n + 1) + j
    for i in range(n):
        for j in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            if (i + j) % 2 == 0:
                tris.append((v00, v10, v11))
                tris.append((v00, v11, v01))
            else:
                tris.append((v00, v10, v01))
                tris.append((v10, v11, v01))
    tris = np.asarray(tris, dtype=np.int64)
    areas = _signed_areas(verts, tris)
    if (areas <= 0).any():
        raise MeshError(
            f"perturb={perturb} inverted triangle {int(np.argmax(areas <= 0))}; reduce the jitter"
        )
    return Mesh(verts, tris, np.zeros(len(tris), dtype=np.int64))


def refine_uniform(mesh: Mesh) -> Mesh:
    """Split every triangle into 4 congruent children through edge midpoints."""
    topo = build_topology(mesh)
    mids = 0.5 * (mesh.vertices[topo.edges[:, 0]] + mesh.vertices[topo.edges[:, 1]])
    verts = np.vstack([mesh.vertices, mids])
    V = mesh.num_vertices
    t = mesh.triangles
    m = V + topo.tri_to_edge  # midpoint vertex of local edge i (opposite vertex i)
    children = np.concatenate(
        [
            np.stack([t[:, 0], m[:, 2], m[:, 1]], axis=1),
            np.stack([t[:, 1], m[:, 0], m[:, 2]], axis=1),
            np.stack([t[:, 2], m[:, 1], m[:, 0]], axis=1),
            np.stack([m[:, 0], m[:, 1], m[:, 2]], axis=1),
        ]
    )
    region = np.concatenate([mesh.region_id] * 4)
    return Mesh(verts, children, region)


def build_topology(mesh: Mesh, slit=None) -> Topology:
    """Deduplicate edges, orient them low->high, and attach geometry.

    ``slit`` is an optional segment ((x0, y0), (x1, y1)) that must be a union
    of interior mesh edges; those edges are flagged as constraint faces.
    """
    t = mesh.triangles
    # local edge i is opposite local vertex i
    raw = np.concatenate([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]])
    ordered = np.sort(raw, axis=1)
    edges, inverse = np.unique(ordered, axis=0, return_inverse=True)
    E = len(edges)
    T = mesh.num_triangles
    tri_to_edge = inverse.reshape(3, T).T.copy()

    edge_to_tri = np.full((E, 2), -1, dtype=np.int64)
    count = np.zeros(E, dtype=np.int64)
    for local in range(3):
        for tri, e in enumerate(tri_to_edge[:, local]):
            if count[e] >= 2:
                raise MeshError(f"edge {edges[e].tolist()} is shared by more than 2 triangles")
            edge_to_tri[e, count[e]] = tri
            count[e] += 1
    is_boundary = count == 1

    vec = mesh.vertices[edges[:, 1]] - mesh.vertices[edges[:, 0]]
    h_F = np.linalg.norm(vec, axis=1)
    if (h_F <= 0).any():
        raise MeshError("zero-length edge")
    tang = vec / h_F[:, None]
    normals = np.column_stack([tang[:, 1], -tang[:, 0]])

    centroids = mesh.vertices[t].mean(axis=1)
    midpoints = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    outward_sign = np.zeros(E)
    b = np.flatnonzero(is_boundary)
    toward = midpoints[b] - centroids[edge_to_tri[b, 0]]
    outward_sign[b] = np.where((normals[b] * toward).sum(axis=1) > 0, 1.0, -1.0)

    # hanging-node guard: an edge midpoint coinciding with a mesh vertex
    # (other than its endpoints) means the neighbour was refined
    mids = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    lookup = {}
    for idx, v in enumerate(np.round(mesh.vertices, 12)):
        lookup[(v[0], v[1])] = idx
    for e, m in enumerate(np.round(mids, 12)):
        hit = lookup.get((m[0], m[1]))
        if hit is not None and hit not in (edges[e, 0], edges[e, 1]):
            tri = edge_to_tri[e, 0]
            raise MeshError(f"non-conforming mesh: vertex {hit} hangs on an edge of triangle {tri}")

    areas = _signed_areas(mesh.vertices, t)
    h_K = np.sqrt(areas)

    slit_edges = np.empty(0, dtype=np.int64)
    if slit is not None:
        slit_edges = _resolve_slit(mesh, edges, is_boundary, slit)

    return Topology(
        edges=edges,
        edge_to_tri=edge_to_tri,
        tri_to_edge=tri_to_edge,
        is_boundary=is_boundary,
        normals=normals,
        outward_sign=outward_sign,
        h_K=h_K,
        h_F=h_F,
        slit_edges=slit_edges,
    )


def load_mesh(path: str, format: str = "native") -> Mesh:
    """Read a mesh file.

    ``format`` is "native" (lsfem-mesh text, 0-based) or "triangle"
    (a .node/.ele pair, 1-based; pass either file of the pair).
    """
    if format == "native":
        return _load_native(path)
    if format == "triangle":
        return _load_triangle(path)
    raise ValueError(f"unknown mesh format {format!r}")


def save_mesh(mesh: Mesh, path: str, format: str = "native") -> None:
    """Write a mesh file in the native or triangle format (see load_mesh)."""
    if format == "native":
        with open(path, "w") as f:
            f.write("lsfem-mesh 1\n")
            f.write(f"{mesh.num_vertices} {mesh.num_triangles}\n")
            for x, y in mesh.vertices:
                f.write(f"{x:.17g} {y:.17g}\n")
            for (i, j, k), r in zip(mesh.triangles, mesh.region_id):
                f.write(f"{i} {j} {k} {r}\n")
    elif format == "triangle":
        base = path[:-5] if path.endswith((".node", ".ele")) else path
        with open(base + ".node", "w") as f:
            f.write(f"{mesh.num_vertices} 2 0 0\n")
            for idx, (x, y) in enumerate(mesh.vertices, start=1):
                f.write(f"{idx} {x:.17g} {y:.17g}\n")
        with open(base + ".ele", "w") as f:
            f.write(f"{mesh.num_triangles} 3 0\n")
            for idx, (i, j, k) in enumerate(mesh.triangles, start=1):
                f.write(f"{idx} {i + 1} {j + 1} {k + 1}\n")
    else:
        raise ValueError(f"unknown mesh format {format!r}")


def _coordinate_noise(pts: np.ndarray) -> np.ndarray:
    """Deterministic pseudo-random values in [-1, 1] hashed from coordinates."""
    x, y = pts[:, 0], pts[:, 1]
    u = np.modf(np.sin(127.1 * x + 311.7 * y + 0.137) * 43758.5453)[0]
    v = np.modf(np.sin(269.5 * x + 183.3 * y + 0.731) * 19173.1927)[0]
    return np.column_stack([2.0 * np.abs(u) - 1.0, 2.0 * np.abs(v) - 1.0])


def _signed_areas(verts, tris):
    p = verts[tris]
    return 0.5 * (
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    )


def _tokens(path):
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            body = line.split("#", 1)[0].strip()
            if body:
                yield lineno, body.split()


def _load_native(path: str) -> Mesh:
    rows = _tokens(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise MeshError(f"{path}:1: empty mesh file") from None
    if header[:2] != ["lsfem-mesh", "1"]:
        raise MeshError(f"{path}:{lineno}: expected header 'lsfem-mesh 1'")
    try:
        lineno, counts = next(rows)
        nv, nt = int(counts[0]), int(counts[1])
    except (StopIteration, ValueError, IndexError):
        raise MeshError(f"{path}: missing or malformed 'V T' count line") from None
    verts = np.empty((nv, 2))
    tris = np.empty((nt, 3), dtype=np.int64)
    region = np.zeros(nt, dtype=np.int64)
    for i in range(nv):
        try:
            lineno, tok = next(rows)
            verts[i] = float(tok[0]), float(tok[1])
        except (StopIteration, ValueError, IndexError):
            raise MeshError(f"{path}:{lineno}: bad vertex line {i}") from None
    for i in range(nt):
        try:
            lineno, tok = next(rows)
            tris[i] = int(tok[0]), int(tok[1]), int(tok[2])
            if len(tok) > 3:
                region[i] = int(tok[3])
        except (StopIteration, ValueError, IndexError):
            raise MeshError(f"{path}:{lineno}: bad triangle line {i}") from None
    try:
        return Mesh(verts, tris, region)
    except MeshError as exc:
        raise MeshError(f"{path}: {exc}") from None


def _load_triangle(path: str) -> Mesh:
    base = path[:-5] if path.endswith(".node") else path[:-4] if path.endswith(".ele") else path
    node_path, ele_path = base + ".node", base + ".ele"
    for p in (node_path, ele_path):
        if not os.path.exists(p):
            raise MeshError(f"missing file {p}")
    rows = _tokens(node_path)
    lineno, head = next(rows)
    nv = int(head[0])
    verts = np.empty((nv, 2))
    ids = {}
    for i in range(nv):
        lineno, tok = next(rows)
        ids[int(tok[0])] = i
        verts[i] = float(tok[1]), float(tok[2])
    rows = _tokens(ele_path)
    lineno, head = next(rows)
    nt = int(head[0])
    tris = np.empty((nt, 3), dtype=np.int64)
    region = np.zeros(nt, dtype=np.int64)
    for i in range(nt):
        lineno, tok = next(rows)
        try:
            tris[i] = ids[int(tok[1])], ids[int(tok[2])], ids[int(tok[3])]
        except KeyError as exc:
            raise MeshError(f"{ele_path}:{lineno}: element {tok[0]} references unknown node {exc}") from None
        # trailing attribute columns are ignored
    try:
        return Mesh(verts, tris, region)
    except MeshError as exc:
        raise MeshError(f"{ele_path}: {exc}") from None


def _resolve_slit(mesh, edges, is_boundary, slit, tol=1e-12):
    (x0, y0), (x1, y1) = slit
    a = np.array([x0, y0], dtype=float)
    d = np.array([x1, y1], dtype=float) - a
    length = np.linalg.norm(d)
    if length <= 0:
        raise ValueError("slit segment has zero length")
    d = d / length

    def param(p):
        rel = p - a
        off = abs(rel[0] * d[1] - rel[1] * d[0])
        s = rel @ d
        if off > tol or s < -tol or s > length + tol:
            return None
        return s

    found = []
    for e in range(len(edges)):
        s0 = param(mesh.vertices[edges[e, 0]])
        s1 = param(mesh.vertices[edges[e, 1]])
        if s0 is not None and s1 is not None:
            if is_boundary[e]:
                raise MeshError("slit segment touches a boundary edge; interior edges required")
            found.append((min(s0, s1), max(s0, s1), e))
    found.sort()
    cursor = 0.0
    for lo, hi, _ in found:
        if lo > cursor + tol:
            raise MeshError(
                f"slit not resolved by the mesh: no edge covers "
                f"[{cursor / length:.6g}, {lo / length:.6g}] of the segment"
            )
        cursor = max(cursor, hi)
    if cursor < length - tol:
        raise MeshError(
            f"slit not resolved by the mesh: no edge covers "
            f"[{cursor / length:.6g}, 1] of the segment"
        )
    return np.array(sorted(e for _, _, e in found), dtype=np.int64)
