"""Convex polygonal elements and meshes of the unit square.

A :class:`Mesh` stores a shared vertex table, one :class:`ConvexPolygon` per
element (counterclockwise) and the skeleton as a list of :class:`Edge`.
Every edge carries the outward unit normal of its ``left`` element; interior
edges also name the ``right`` neighbour, whose outward normal is ``-normal``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial import Voronoi

__all__ = [
    "ConvexPolygon",
    "Edge",
    "Mesh",
    "regular_polygon",
    "aniso_rectangle",
    "polygon_metrics",
    "single_element_mesh",
    "mesh_from_cells",
    "unit_square_mesh",
    "write_mesh",
    "read_mesh",
]

MESH_KINDS = ("quad", "tri", "poly")
DEFAULT_POLY_SEED = 20170515
LLOYD_ITERATIONS = 20
EDGE_TOL = 1e-12


def _shoelace(v: np.ndarray) -> tuple[float, np.ndarray]:
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return float(area), np.array([cx, cy])


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """A strictly convex polygon with counterclockwise vertices.

    Parameters
    ----------
    vertices : array_like, shape (n, 2)
        Vertex coordinates in counterclockwise order, n >= 3.
    id : int
        Element index inside its mesh (0 for standalone polygons).
    """

    vertices: np.ndarray
    id: int = 0
    area: float = field(init=False, repr=False)
    centroid: np.ndarray = field(init=False, repr=False)
    diameter: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError(f"polygon needs at least 3 points of shape (n, 2), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite vertex coordinates")
        e = np.roll(v, -1, axis=0) - v
        if np.any(np.hypot(e[:, 0], e[:, 1]) == 0.0):
            raise ValueError("repeated consecutive vertices")
        cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
        if np.any(cross <= 0.0):
            raise ValueError("polygon is not strictly convex and counterclockwise")
        area, centroid = _shoelace(v)
        if area <= 0.0:
            raise ValueError("polygon has non-positive signed area")
        diff = v[:, None, :] - v[None, :, :]
        v.setflags(write=False)
        centroid.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "area", area)
        object.__setattr__(self, "centroid", centroid)
        object.__setattr__(self, "diameter", float(np.sqrt((diff**2).sum(-1)).max()))

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def segments(self) -> Iterable[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Yield ``(a, b, outward_normal)`` for each edge, counterclockwise."""
        v = self.vertices
        for i in range(v.shape[0]):
            a, b = v[i], v[(i + 1) % v.shape[0]]
            t = b - a
            yield a, b, np.array([t[1], -t[0]]) / math.hypot(t[0], t[1])

    def translated(self, shift: Sequence[float]) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices + np.asarray(shift, dtype=float), self.id)

    def rotated(self, angle: float) -> "ConvexPolygon":
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        return ConvexPolygon(self.vertices @ rot.T, self.id)


def polygon_metrics(P: ConvexPolygon) -> tuple[float, np.ndarray, float]:
    """Return ``(area, centroid, diameter)`` of a polygon."""
    return P.area, P.centroid.copy(), P.diameter


POLYGON_SIZES = ("diameter", "circumdiameter")


def regular_polygon(n: int, h: float, size: str = "diameter") -> ConvexPolygon:
    """Regular n-gon centred at the origin with a vertex on the positive x-axis.

    With ``size='diameter'`` the largest vertex distance is exactly ``h``: for
    even n that is twice the circumradius, for odd n the longest diagonal
    ``2 R sin(pi (n - 1) / (2 n))``. With ``size='circumdiameter'`` the
    circumradius is ``h / 2`` for every n, i.e. all polygons are inscribed in
    the same circle.
    """
    if int(n) != n or n < 3:
        raise ValueError(f"need n >= 3 sides, got {n}")
    if not h > 0:
        raise ValueError(f"need h > 0, got {h}")
    if size not in POLYGON_SIZES:
        raise ValueError(f"size must be one of {POLYGON_SIZES}, got {size!r}")
    n = int(n)
    if n % 2 == 0 or size == "circumdiameter":
        radius = h / 2.0
    else:
        radius = h / (2.0 * math.sin(math.pi * (n - 1) / (2 * n)))
    t = 2.0 * math.pi * np.arange(n) / n
    v = radius * np.column_stack([np.cos(t), np.sin(t)])
    # symmetric rounding noise would otherwise leave the centroid at ~1e-17
    v -= _shoelace(v)[1]
    return ConvexPolygon(v)


def aniso_rectangle(aspect: float, h: float) -> ConvexPolygon:
    """Axis-aligned rectangle with side ratio ``aspect`` and diagonal ``h``."""
    if not aspect >= 1:
        raise ValueError(f"need aspect >= 1, got {aspect}")
    if not h > 0:
        raise ValueError(f"need h > 0, got {h}")
    short = h / math.sqrt(1.0 + aspect * aspect)
    a, b = 0.5 * aspect * short, 0.5 * short
    return ConvexPolygon(np.array([[-a, -b], [a, -b], [a, b], [-a, b]]))


@dataclass(frozen=True)
class Edge:
    """A skeleton segment.

    ``right`` is ``None`` on the domain boundary. ``normal`` points out of
    ``left``. ``vertices`` holds the two indices into :attr:`Mesh.vertices`.
    """

    a: np.ndarray
    b: np.ndarray
    left: int
    right: Optional[int]
    normal: np.ndarray
    vertices: tuple[int, int] = (-1, -1)

    @property
    def is_boundary(self) -> bool:
        return self.right is None

    @property
    def length(self) -> float:
        return float(math.hypot(*(self.b - self.a)))


@dataclass(frozen=True, eq=False)
class Mesh:
    """Polygonal partition with full skeleton topology."""

    vertices: np.ndarray
    cells: tuple[tuple[int, ...], ...]
    elements: tuple[ConvexPolygon, ...]
    edges: tuple[Edge, ...]
    kind: str = "poly"

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def interior_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.right is not None]

    @property
    def boundary_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.right is None]

    @property
    def h(self) -> float:
        """Largest element diameter."""
        return max(P.diameter for P in self.elements)

    def element_edges(self, K: int) -> list[Edge]:
        return [e for e in self.edges if e.left == K or e.right == K]

    def neighbours(self, K: int) -> set[int]:
        out = set()
        for e in self.edges:
            if e.right is None:
                continue
            if e.left == K:
                out.add(e.right)
            elif e.right == K:
                out.add(e.left)
        return out


def mesh_from_cells(vertices: np.ndarray, cells: Sequence[Sequence[int]], kind: str = "poly") -> Mesh:
    """Build elements and skeleton from a vertex table and CCW cell lists.

    Edges are matched on their sorted vertex-index pair; vertices closer than
    ``EDGE_TOL`` are merged first so that coordinate-identical corners coming
    from different cells share one index.
    """
    vertices = np.asarray(vertices, dtype=float)
    vertices, remap = _merge_vertices(vertices, EDGE_TOL)
    clean_cells = []
    for c in cells:
        c = [int(remap[i]) for i in c]
        c = [v for i, v in enumerate(c) if v != c[i - 1]]
        clean_cells.append(tuple(c))

    elements = tuple(ConvexPolygon(vertices[list(c)], id=K) for K, c in enumerate(clean_cells))

    seen: dict[tuple[int, int], list] = {}
    order: list[tuple[int, int]] = []
    for K, c in enumerate(clean_cells):
        for i in range(len(c)):
            ia, ib = c[i], c[(i + 1) % len(c)]
            key = (min(ia, ib), max(ia, ib))
            if key in seen:
                entry = seen[key]
                if entry[1] is not None:
                    raise ValueError(f"edge {key} shared by more than two cells")
                if entry[2] != (ib, ia):
                    raise ValueError(f"edge {key} has matching orientation in two cells")
                entry[1] = K
            else:
                seen[key] = [K, None, (ia, ib)]
                order.append(key)

    edges = []
    for key in order:
        left, right, (ia, ib) = seen[key]
        a, b = vertices[ia], vertices[ib]
        t = b - a
        normal = np.array([t[1], -t[0]]) / math.hypot(t[0], t[1])
        edges.append(Edge(a.copy(), b.copy(), left, right, normal, (ia, ib)))
    vertices.setflags(write=False)
    return Mesh(vertices, tuple(clean_cells), elements, tuple(edges), kind)


def _merge_vertices(vertices: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    n = vertices.shape[0]
    remap = np.arange(n)
    order = np.lexsort((vertices[:, 1], vertices[:, 0]))
    kept: list[int] = []
    for i in order:
        for j in reversed(kept[-8:]):
            if np.all(np.abs(vertices[i] - vertices[j]) <= tol):
                remap[i] = remap[j]
                break
        else:
            kept.append(i)
    used = np.unique(remap)
    new_index = -np.ones(n, dtype=int)
    new_index[used] = np.arange(used.size)
    return vertices[used].copy(), new_index[remap]


def single_element_mesh(P: ConvexPolygon) -> Mesh:
    """Wrap one polygon as a mesh whose skeleton is entirely boundary."""
    n = P.n_vertices
    return mesh_from_cells(P.vertices, [tuple(range(n))], kind="poly")


def unit_square_mesh(kind: str, m: int, seed: int = DEFAULT_POLY_SEED) -> Mesh:
    """Conforming partition of (0, 1)^2.

    Parameters
    ----------
    kind : {'quad', 'tri', 'poly'}
        ``quad``: m x m squares. ``tri``: each square split along the
        diagonal from its lower-left corner (2 m^2 triangles). ``poly``:
        centroidal Voronoi cells of m^2 random seeds after Lloyd relaxation.
    m : int
        Resolution, m >= 1.
    seed : int
        RNG seed for the ``poly`` seeds; ignored otherwise.
    """
    if kind not in MESH_KINDS:
        raise ValueError(f"unknown mesh kind {kind!r}; expected one of {MESH_KINDS}")
    if int(m) != m or m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    m = int(m)
    if kind == "poly":
        return _voronoi_mesh(m, seed)

    t = np.arange(m + 1) / m
    X, Y = np.meshgrid(t, t, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i: int, j: int) -> int:
        return j * (m + 1) + i

    cells = []
    for j in range(m):
        for i in range(m):
            v00, v10, v11, v01 = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            if kind == "quad":
                cells.append((v00, v10, v11, v01))
            else:
                cells.append((v00, v10, v11))
                cells.append((v00, v11, v01))
    return mesh_from_cells(vertices, cells, kind=kind)


def _mirror(points: np.ndarray) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    return np.vstack(
        [
            points,
            np.column_stack([-x, y]),
            np.column_stack([2.0 - x, y]),
            np.column_stack([x, -y]),
            np.column_stack([x, 2.0 - y]),
        ]
    )


def _bounded_voronoi(seeds: np.ndarray) -> tuple[np.ndarray, list[list[int]]]:
    # reflecting the seeds across the four sides makes the square boundary a
    # union of Voronoi facets, so no clipping is needed
    vor = Voronoi(_mirror(seeds))
    verts = vor.vertices.copy()
    snap = 1e-10
    for c in (0, 1):
        verts[np.abs(verts[:, c]) < snap, c] = 0.0
        verts[np.abs(verts[:, c] - 1.0) < snap, c] = 1.0
    cells = []
    for i in range(seeds.shape[0]):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or len(region) < 3:
            raise RuntimeError("unbounded Voronoi region for an interior seed")
        pts = verts[region]
        c = pts.mean(axis=0)
        ang = np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0])
        cells.append([region[j] for j in np.argsort(ang)])
    return verts, cells


def _voronoi_mesh(m: int, seed: int) -> Mesh:
    rng = np.random.default_rng(seed)
    seeds = rng.uniform(0.05, 0.95, size=(m * m, 2))
    for _ in range(LLOYD_ITERATIONS):
        verts, cells = _bounded_voronoi(seeds)
        seeds = np.array([_shoelace(verts[c])[1] for c in cells])
    verts, cells = _bounded_voronoi(seeds)
    cells = [_drop_collinear(verts, c) for c in cells]
    used = sorted({v for c in cells for v in c})
    index = {v: i for i, v in enumerate(used)}
    cells = [[index[v] for v in c] for c in cells]
    return mesh_from_cells(verts[used], cells, kind="poly")


def _drop_collinear(verts: np.ndarray, cell: list[int], tol: float = 1e-13) -> list[int]:
    """Remove vertices at (numerically) straight angles and duplicate points."""
    out = list(cell)
    changed = True
    while changed and len(out) > 3:
        changed = False
        for i in range(len(out)):
            a = verts[out[i - 1]]
            b = verts[out[i]]
            c = verts[out[(i + 1) % len(out)]]
            e1, e2 = b - a, c - b
            cross = e1[0] * e2[1] - e1[1] * e2[0]
            if cross <= tol * (np.linalg.norm(e1) * np.linalg.norm(e2) + tol):
                out.pop(i)
                changed = True
                break
    return out


def write_mesh(mesh: Mesh, path) -> None:
    """Write the plain-text mesh format.

    Header ``NV NE NEDGE``, then ``x y`` per vertex, ``nverts v1 ... vk`` per
    element and ``a b left right`` per edge (``right`` is -1 on the boundary).
    """
    lines = [f"{mesh.vertices.shape[0]} {mesh.n_elements} {len(mesh.edges)}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [" ".join(str(v) for v in (len(c),) + tuple(c)) for c in mesh.cells]
    for e in mesh.edges:
        right = -1 if e.right is None else e.right
        lines.append(f"{e.vertices[0]} {e.vertices[1]} {e.left} {right}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path, kind: str = "poly") -> Mesh:
    """Read a mesh written by :func:`write_mesh`.

    The skeleton is rebuilt from the cells and checked against the edge
    lines in the file.
    """
    with open(path) as fh:
        tokens = [line.split() for line in fh if line.strip()]
    nv, ne, nedge = (int(t) for t in tokens[0])
    if len(tokens) != 1 + nv + ne + nedge:
        raise ValueError("mesh file line count does not match its header")
    vertices = np.array([[float(t[0]), float(t[1])] for t in tokens[1 : 1 + nv]])
    cells = []
    for t in tokens[1 + nv : 1 + nv + ne]:
        count = int(t[0])
        if len(t) != count + 1:
            raise ValueError(f"element line {' '.join(t)!r} has wrong vertex count")
        cells.append(tuple(int(v) for v in t[1:]))
    mesh = mesh_from_cells(vertices, cells, kind=kind)
    declared = set()
    for t in tokens[1 + nv + ne :]:
        a, b, left, right = (int(v) for v in t)
        declared.add((min(a, b), max(a, b), left, None if right < 0 else right))
    built = {(min(e.vertices), max(e.vertices), e.left, e.right) for e in mesh.edges}
    if declared != built:
        raise ValueError("edge lines in mesh file disagree with the cell connectivity")
    return mesh
