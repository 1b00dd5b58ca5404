"""Planar triangulations of the disk and the square.

Quadratic meshes store the six-node connectivity ``(v0, v1, v2, m01, m12, m20)``.
On the disk, midside nodes of boundary edges are placed on the circle, so
the quadratic geometry follows the curved boundary (isoparametric elements).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

from ..errors import MeshError

LINEAR = "linear"
QUADRATIC = "quadratic"
ELEMENT_ORDERS = (LINEAR, QUADRATIC)


@dataclass
class Mesh:
    nodes: np.ndarray  # (N, 2)
    triangles: np.ndarray  # (T, 3) linear, (T, 6) quadratic
    boundary_edges: np.ndarray  # (B, 2) vertex pairs
    boundary_markers: np.ndarray = field(default=None)  # (B,)
    element_order: str = LINEAR

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        self.boundary_edges = np.asarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        if self.boundary_markers is None:
            self.boundary_markers = np.ones(len(self.boundary_edges), dtype=np.int64)
        self.boundary_markers = np.asarray(self.boundary_markers, dtype=np.int64)
        if self.element_order not in ELEMENT_ORDERS:
            raise MeshError(f"unknown element order {self.element_order!r}")
        width = 3 if self.element_order == LINEAR else 6
        if self.triangles.ndim != 2 or self.triangles.shape[1] != width:
            raise MeshError(f"{self.element_order} triangles need {width} node indices")

    @property
    def vertices(self) -> np.ndarray:
        return self.triangles[:, :3]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def boundary_nodes(self) -> np.ndarray:
        """All nodes on the boundary, midside nodes included."""
        nodes = set(self.boundary_edges.ravel().tolist())
        if self.element_order == QUADRATIC:
            mids = _edge_midsides(self)
            for i, j in self.boundary_edges:
                nodes.add(mids[(min(i, j), max(i, j))])
        return np.array(sorted(nodes), dtype=np.int64)

    def scaled(self, factor: float) -> "Mesh":
        return Mesh(self.nodes * factor, self.triangles.copy(), self.boundary_edges.copy(),
                    self.boundary_markers.copy(), self.element_order)

    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        p = self.nodes
        return np.concatenate([np.linalg.norm(p[v[:, i]] - p[v[:, (i + 1) % 3]], axis=1) for i in range(3)])

    def area(self) -> float:
        """Area covered by the mesh, using the quadratic geometry when present."""
        if self.element_order == LINEAR:
            return float(0.5 * _signed_area2(self.nodes, self.vertices).sum())
        from .assemble import _geometry  # local import avoids a cycle

        _, detj, w = _geometry(self)
        return float(np.sum(detj * w[None, :]))

    def bounding_box_area(self) -> float:
        span = self.nodes.max(axis=0) - self.nodes.min(axis=0)
        return float(span[0] * span[1])

    def validate(self) -> None:
        """Raise MeshError unless orientation, non-degeneracy and boundary loops hold."""
        p = self.nodes
        v = self.vertices
        if v.min() < 0 or v.max() >= len(p):
            raise MeshError("triangle references a missing node")
        area2 = _signed_area2(p, v)
        tol = 2e-14 * self.bounding_box_area()
        bad = np.nonzero(area2 <= tol)[0]
        if bad.size:
            raise MeshError(f"triangle {int(bad[0])} is degenerate or negatively oriented")
        topo = _topological_boundary(v)
        given = {(min(i, j), max(i, j)) for i, j in self.boundary_edges.tolist()}
        if given != topo:
            raise MeshError("boundary_edges do not match the topological boundary")
        deg = np.bincount(self.boundary_edges.ravel(), minlength=len(p))
        if np.any((deg != 0) & (deg != 2)):
            raise MeshError("boundary edges do not form closed loops")
        if self.element_order == QUADRATIC:
            mids = _edge_midsides(self)
            for t, tri in enumerate(self.triangles):
                for k, (a, b) in enumerate(((0, 1), (1, 2), (2, 0))):
                    key = (min(tri[a], tri[b]), max(tri[a], tri[b]))
                    if mids.get(key) != tri[3 + k]:
                        raise MeshError(f"triangle {t} midside node inconsistent with edge {key}")

    def boundary_loops(self) -> list:
        """Closed loops of boundary vertex indices."""
        adj = {}
        for i, j in self.boundary_edges.tolist():
            adj.setdefault(i, []).append(j)
            adj.setdefault(j, []).append(i)
        seen, loops = set(), []
        for start in sorted(adj):
            if start in seen:
                continue
            loop, prev, cur = [start], None, start
            seen.add(start)
            while True:
                nxt = [k for k in adj[cur] if k != prev]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                if cur == start:
                    break
                loop.append(cur)
                seen.add(cur)
            loops.append(loop)
        return loops

    def boundary_length(self) -> float:
        e = self.boundary_edges
        return float(np.linalg.norm(self.nodes[e[:, 0]] - self.nodes[e[:, 1]], axis=1).sum())


def _signed_area2(p, v):
    a, b, c = p[v[:, 0]], p[v[:, 1]], p[v[:, 2]]
    return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])


def _topological_boundary(v):
    edges = np.sort(np.concatenate([v[:, [0, 1]], v[:, [1, 2]], v[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    return {tuple(e) for e in uniq[counts == 1].tolist()}


def _edge_midsides(mesh: Mesh) -> dict:
    out = {}
    for tri in mesh.triangles:
        for k, (a, b) in enumerate(((0, 1), (1, 2), (2, 0))):
            out[(min(tri[a], tri[b]), max(tri[a], tri[b]))] = tri[3 + k]
    return out


def _orient(p, tris):
    flip = _signed_area2(p, tris) < 0
    tris = tris.copy()
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def _to_quadratic(p, tris, boundary_edges, snap=None):
    """Add midside nodes; ``snap(points, edges)`` repositions boundary ones."""
    edges = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    uniq, inverse = np.unique(edges, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    mid = 0.5 * (p[uniq[:, 0]] + p[uniq[:, 1]])
    if snap is not None:
        bset = {(min(i, j), max(i, j)) for i, j in boundary_edges.tolist()}
        on_b = np.array([tuple(e) in bset for e in uniq.tolist()])
        mid[on_b] = snap(p[uniq[on_b, 0]], p[uniq[on_b, 1]])
    ids = len(p) + inverse.reshape(3, -1).T
    return np.vstack([p, mid]), np.hstack([tris, ids])


def generate_disk_mesh(radius: float, target_h: float, element_order: str = QUADRATIC) -> Mesh:
    """Quasi-uniform triangulation of the disk from concentric node rings.

    Connectivity depends only on ``radius / target_h``; it is computed on the
    unit disk and scaled, so meshes with equal ratio differ by a dilation.
    """
    if element_order not in ELEMENT_ORDERS:
        raise MeshError(f"unknown element order {element_order!r}")
    if not (radius > 0 and target_h > 0):
        raise MeshError("radius and target_h must be positive")
    if not target_h < radius:
        raise MeshError(f"target_h={target_h:g} too coarse to resolve a circle of radius {radius:g}")
    rings = int(math.ceil(radius / target_h - 1e-9))
    pts = [np.zeros((1, 2))]
    for k in range(1, rings + 1):
        count = max(6, int(round(2 * math.pi * k)))
        theta = 2 * math.pi * (np.arange(count) + 0.5 * (k % 2)) / count
        r = k / rings
        pts.append(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))
    unit = np.vstack(pts)
    tris = _orient(unit, Delaunay(unit).simplices.astype(np.int64))
    nb = len(pts[-1])
    first = len(unit) - nb
    bedges = np.column_stack([np.arange(first, first + nb), first + (np.arange(nb) + 1) % nb])
    if element_order == QUADRATIC:
        def snap(a, b):
            m = 0.5 * (a + b)
            return m / np.linalg.norm(m, axis=1)[:, None]
        unit, tris = _to_quadratic(unit, tris, bedges, snap)
    nodes = radius * unit
    # boundary ring exactly on the circle
    bnodes = np.unique(bedges)
    ang = np.arctan2(unit[bnodes, 1], unit[bnodes, 0])
    nodes[bnodes] = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    mesh = Mesh(nodes, tris, bedges, np.ones(nb, dtype=np.int64), element_order)
    return mesh


def generate_square_mesh(side: float, target_h: float, element_order: str = QUADRATIC) -> Mesh:
    """Structured mesh of ``[0, side]^2``: two triangles per cell, diagonals alternating.

    The diagonal direction flips between neighbouring cells, so a 4x4 grid
    gives 32 triangles.  Boundary markers 1..4 label bottom, right, top, left.
    """
    if element_order not in ELEMENT_ORDERS:
        raise MeshError(f"unknown element order {element_order!r}")
    if not (side > 0 and target_h > 0):
        raise MeshError("side and target_h must be positive")
    if not target_h <= side:
        raise MeshError(f"target_h={target_h:g} exceeds the square side {side:g}")
    n = int(math.ceil(side / target_h - 1e-9))
    coords = side * np.arange(n + 1) / n
    X, Y = np.meshgrid(coords, coords, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def idx(i, j):
        return j * (n + 1) + i

    tris = []
    for j in range(n):
        for i in range(n):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            if (i + j) % 2 == 0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    tris = np.array(tris, dtype=np.int64)
    loop = ([idx(i, 0) for i in range(n)] + [idx(n, j) for j in range(n)]
            + [idx(i, n) for i in range(n, 0, -1)] + [idx(0, j) for j in range(n, 0, -1)])
    bedges = np.column_stack([loop, np.roll(loop, -1)])
    markers = np.repeat(np.arange(1, 5), n)
    if element_order == QUADRATIC:
        nodes, tris = _to_quadratic(nodes, tris, bedges)
    return Mesh(nodes, tris, bedges, markers, element_order)


def refine(mesh: Mesh) -> Mesh:
    """Uniform red refinement (each triangle into four); nested for polygonal domains."""
    lin = mesh.vertices
    vert_ids = np.unique(lin)
    remap = -np.ones(len(mesh.nodes), dtype=np.int64)
    remap[vert_ids] = np.arange(len(vert_ids))
    p = mesh.nodes[vert_ids]
    v = remap[lin]
    be = remap[mesh.boundary_edges]
    edges = np.sort(np.concatenate([v[:, [0, 1]], v[:, [1, 2]], v[:, [2, 0]]]), axis=1)
    uniq, inverse = np.unique(edges, axis=0, return_inverse=True)
    inverse = inverse.ravel().reshape(3, -1).T + len(p)
    newp = np.vstack([p, 0.5 * (p[uniq[:, 0]] + p[uniq[:, 1]])])
    m01, m12, m20 = inverse[:, 0], inverse[:, 1], inverse[:, 2]
    tris = np.vstack([
        np.column_stack([v[:, 0], m01, m20]),
        np.column_stack([m01, v[:, 1], m12]),
        np.column_stack([m20, m12, v[:, 2]]),
        np.column_stack([m01, m12, m20]),
    ])
    emap = {tuple(e): k + len(p) for k, e in enumerate(uniq.tolist())}
    nb, nm = [], []
    for (i, j), mk in zip(be.tolist(), mesh.boundary_markers.tolist()):
        m = emap[(min(i, j), max(i, j))]
        nb += [(i, m), (m, j)]
        nm += [mk, mk]
    out = Mesh(newp, tris, np.array(nb), np.array(nm), LINEAR)
    if mesh.element_order == QUADRATIC:
        nodes, t6 = _to_quadratic(out.nodes, out.triangles, out.boundary_edges)
        out = Mesh(nodes, t6, out.boundary_edges, out.boundary_markers, QUADRATIC)
    return out


# ---------------------------------------------------------------------------
# text format: header "N T B order", then N node lines "x y", T triangle
# lines (3 or 6 indices), B boundary lines "i j marker"


def write_mesh(mesh: Mesh) -> str:
    lines = [f"{mesh.n_nodes} {len(mesh.triangles)} {len(mesh.boundary_edges)} {mesh.element_order}"]
    lines += [f"{x:.12e} {y:.12e}" for x, y in mesh.nodes]
    lines += [" ".join(str(int(i)) for i in tri) for tri in mesh.triangles]
    lines += [f"{int(i)} {int(j)} {int(m)}" for (i, j), m in zip(mesh.boundary_edges, mesh.boundary_markers)]
    return "\n".join(lines) + "\n"


def read_mesh(text: str) -> Mesh:
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    try:
        n, t, b = (int(x) for x in rows[0][:3])
        order = rows[0][3]
        nodes = np.array([[float(x) for x in r] for r in rows[1: 1 + n]])
        tris = np.array([[int(x) for x in r] for r in rows[1 + n: 1 + n + t]])
        bl = np.array([[int(x) for x in r] for r in rows[1 + n + t: 1 + n + t + b]])
    except (IndexError, ValueError) as exc:
        raise MeshError(f"malformed mesh file: {exc}") from exc
    if len(nodes) != n or len(tris) != t or len(bl) != b:
        raise MeshError("mesh file section sizes do not match the header")
    return Mesh(nodes, tris, bl[:, :2], bl[:, 2], order)
