import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import shoelace_area
from pwdgcond.mesh import (
    ConvexPolygon,
    aniso_rectangle,
    polygon_metrics,
    read_mesh,
    regular_polygon,
    single_element_mesh,
    unit_square_mesh,
    write_mesh,
)


def test_square_from_diagonal():
    P = regular_polygon(4, math.sqrt(2))
    assert P.area == pytest.approx(1.0, abs=1e-15)
    sides = np.linalg.norm(np.roll(P.vertices, -1, axis=0) - P.vertices, axis=1)
    np.testing.assert_allclose(sides, 1.0, atol=1e-15)


def test_triangle_area_by_convention():
    # longest vertex distance 1 => side 1
    P = regular_polygon(3, 1.0)
    assert shoelace_area(P.vertices) == pytest.approx(math.sqrt(3) / 4, rel=1e-14)
    # inscribed in a circle of diameter 1 => side sqrt(3)/2
    Q = regular_polygon(3, 1.0, size="circumdiameter")
    assert shoelace_area(Q.vertices) == pytest.approx(math.sqrt(3) / 4 * 0.75, rel=1e-14)


def test_hexagon_area():
    P = regular_polygon(6, 2.0)
    assert P.area == pytest.approx(2.598076211353316, rel=1e-14)
    assert shoelace_area(P.vertices) == pytest.approx(3 * math.sqrt(3) / 2, rel=1e-14)


@pytest.mark.parametrize("n", range(3, 65))
def test_regular_polygon_diameter_and_centroid(n):
    P = regular_polygon(n, 0.7)
    assert abs(P.diameter - 0.7) <= 1e-14
    assert np.all(np.abs(P.centroid) < 1e-15)


@pytest.mark.parametrize("bad", [(2, 1.0), (4, 0.0), (5, -1.0)])
def test_regular_polygon_rejects(bad):
    with pytest.raises(ValueError):
        regular_polygon(*bad)


@pytest.mark.parametrize(
    "aspect, h, area",
    [(1, math.sqrt(2), 1.0), (2, math.sqrt(5), 2.0), (8, 1.0, 8 / 65)],
)
def test_aniso_rectangle(aspect, h, area):
    P = aniso_rectangle(aspect, h)
    assert P.area == pytest.approx(area, rel=1e-14)
    assert P.diameter == pytest.approx(h, rel=1e-14)
    xs, ys = np.ptp(P.vertices[:, 0]), np.ptp(P.vertices[:, 1])
    assert xs / ys == pytest.approx(aspect, rel=1e-14)


def test_aniso_rectangle_rejects_aspect_below_one():
    with pytest.raises(ValueError):
        aniso_rectangle(0.5, 1.0)


def test_polygon_metrics_examples():
    area, c, d = polygon_metrics(ConvexPolygon([[0, 0], [1, 0], [1, 1], [0, 1]]))
    assert (area, d) == (1.0, pytest.approx(math.sqrt(2)))
    np.testing.assert_allclose(c, [0.5, 0.5])
    area, c, d = polygon_metrics(ConvexPolygon([[0, 0], [1, 0], [0, 1]]))
    assert area == 0.5
    np.testing.assert_allclose(c, [1 / 3, 1 / 3], atol=1e-16)
    assert d == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize(
    "verts",
    [
        [[0, 0], [0, 1], [1, 0]],  # clockwise
        [[0, 0], [1, 0], [2, 0], [1, 1]],  # collinear vertex
        [[0, 0], [2, 0], [1, 0.2], [1, 1], [0, 1]],  # reflex vertex
        [[0, 0], [1, 0]],
    ],
)
def test_polygon_rejects_invalid(verts):
    with pytest.raises(ValueError):
        ConvexPolygon(verts)


def test_quad_mesh_counts():
    M = unit_square_mesh("quad", 2)
    assert (M.n_elements, len(M.edges), len(M.interior_edges), len(M.boundary_edges)) == (4, 12, 4, 8)


def test_tri_mesh_counts():
    M = unit_square_mesh("tri", 1)
    assert (M.n_elements, len(M.interior_edges), len(M.boundary_edges)) == (2, 1, 4)


def test_poly_mesh_area():
    M = unit_square_mesh("poly", 4)
    assert abs(sum(shoelace_area(P.vertices) for P in M.elements) - 1.0) <= 1e-12


def test_mesh_rejects_bad_input():
    with pytest.raises(ValueError):
        unit_square_mesh("quad", 0)
    with pytest.raises(ValueError):
        unit_square_mesh("hex", 2)


def test_poly_mesh_deterministic():
    a = unit_square_mesh("poly", 5, seed=3)
    b = unit_square_mesh("poly", 5, seed=3)
    np.testing.assert_array_equal(a.vertices, b.vertices)
    assert a.cells == b.cells


@pytest.mark.parametrize("kind", ["quad", "tri", "poly"])
@pytest.mark.parametrize("m", [1, 2, 3, 5, 8, 16])
def test_mesh_invariants(kind, m):
    M = unit_square_mesh(kind, m)
    assert abs(sum(P.area for P in M.elements) - 1.0) <= 1e-12
    refs = {}
    for K, cell in enumerate(M.cells):
        for i in range(len(cell)):
            refs.setdefault(frozenset((cell[i], cell[i - 1])), []).append((K, (cell[i - 1], cell[i])))
    for e in M.edges:
        t = e.b - e.a
        assert abs(np.linalg.norm(e.normal) - 1.0) <= 1e-14
        assert abs(e.normal @ t) <= 1e-14 * np.linalg.norm(t)
        users = refs[frozenset(e.vertices)]
        if e.right is None:
            assert len(users) == 1
            mid = 0.5 * (e.a + e.b)
            # boundary edges lie on the square's boundary
            assert min(abs(mid[0]), abs(mid[1]), abs(1 - mid[0]), abs(1 - mid[1])) < 1e-12
        else:
            assert len(users) == 2
            # the two cells traverse the shared edge in opposite directions
            assert users[0][1] == users[1][1][::-1]
        # the normal points away from the left element's centroid
        assert e.normal @ (0.5 * (e.a + e.b) - M.elements[e.left].centroid) > 0
        if e.right is not None:
            assert -e.normal @ (0.5 * (e.a + e.b) - M.elements[e.right].centroid) > 0
    assert len(refs) == len(M.edges)


def test_single_element_mesh_is_all_boundary():
    M = single_element_mesh(regular_polygon(5, 1.0))
    assert M.n_elements == 1 and len(M.boundary_edges) == 5 and not M.interior_edges


@pytest.mark.parametrize("kind", ["quad", "tri", "poly"])
def test_mesh_file_roundtrip(tmp_path, kind):
    M = unit_square_mesh(kind, 3)
    path = tmp_path / "mesh.txt"
    write_mesh(M, path)
    header = path.read_text().splitlines()[0].split()
    assert [int(v) for v in header] == [M.vertices.shape[0], M.n_elements, len(M.edges)]
    M2 = read_mesh(path, kind=kind)
    np.testing.assert_array_equal(M.vertices, M2.vertices)
    assert M.cells == M2.cells
    assert [(e.vertices, e.left, e.right) for e in M.edges] == [(e.vertices, e.left, e.right) for e in M2.edges]


def test_mesh_file_detects_inconsistent_edges(tmp_path):
    M = unit_square_mesh("quad", 2)
    path = tmp_path / "mesh.txt"
    write_mesh(M, path)
    lines = path.read_text().splitlines()
    a, b, left, right = lines[-1].split()
    lines[-1] = f"{a} {b} {left} 3"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError):
        read_mesh(path)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(3, 64), h=st.floats(1e-3, 1e3))
def test_generated_polygons_are_convex(n, h):
    for size in ("diameter", "circumdiameter"):
        P = regular_polygon(n, h, size=size)
        e = np.roll(P.vertices, -1, axis=0) - P.vertices
        cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
        assert np.all(cross > 0)
