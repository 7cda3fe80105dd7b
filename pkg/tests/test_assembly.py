import numpy as np
import pytest
import scipy.linalg as sla

from oracles import edge_form_literal, penalty_terms_quadrature
from pwdgcond.analytic import ExactSolution, PlaneWaveSolution, l2_error
from pwdgcond.assembly import (
    BoundarySource,
    assemble,
    dump_system,
    edge_blocks,
    impedance_data_from_exact,
    load_system,
    local_block,
)
from pwdgcond.mesh import regular_polygon, single_element_mesh, unit_square_mesh
from pwdgcond.planewave import make_directions


@pytest.mark.parametrize("kind", ["quad", "tri", "poly"])
def test_edge_blocks_match_literal_form(kind):
    M = unit_square_mesh(kind, 3)
    k = 7.0
    d = make_directions(5, 0.1).directions
    for e in M.edges:
        got = edge_blocks(M, e, k, d)
        ref = edge_form_literal(M, e, k, d)
        assert set(got) == set(ref)
        for key in got:
            assert np.max(np.abs(got[key] - ref[key])) <= 1e-10 * np.max(np.abs(ref[key]))


def test_block_sparsity_follows_adjacency():
    M = unit_square_mesh("poly", 4)
    p = 3
    S = assemble(M, 5.0, p)
    for K in range(M.n_elements):
        for L in range(M.n_elements):
            nz = np.any(S.block(K, L) != 0)
            assert nz == (K == L or (K, L) in S.adjacency)


@pytest.mark.parametrize("kind", ["quad", "tri"])
def test_real_part_is_penalty(kind, rng):
    M = unit_square_mesh(kind, 2)
    k, p = 6.0, 5
    S = assemble(M, k, p)
    v = rng.normal(size=S.n) + 1j * rng.normal(size=S.n)
    # A[(K',l),(K,j)] = A_h(phi_j, phi_l), so A_h(v, v) = v^H A v
    form = np.vdot(v, S.matrix @ v)
    ref = penalty_terms_quadrature(M, k, make_directions(p).directions, v)
    assert abs(form.real - ref) <= 1e-10 * ref


def test_diagonal_blocks_hermitian_pd():
    M = unit_square_mesh("poly", 3)
    S = assemble(M, 10.0, 7)
    for K in range(M.n_elements):
        H = 0.5 * (S.block(K, K) + S.block(K, K).conj().T)
        assert np.linalg.eigvalsh(H)[0] > 0


def test_single_element_matrix_is_boundary_only():
    P = regular_polygon(4, 1.0)
    S = assemble(single_element_mesh(P), 3.0, 4)
    assert S.n == 4
    # only boundary terms: (k/2)(1 - d_j.n)(1 - d_l.n) times the edge integral
    H = 0.5 * (S.matrix + S.matrix.conj().T)
    assert np.linalg.eigvalsh(H)[0] > 0


@pytest.mark.parametrize("kind", ["quad", "tri", "poly"])
@pytest.mark.parametrize("m", [1, 2, 4])
def test_trefftz_recovers_plane_wave(kind, m):
    k, p, j = 8.0, 7, 2
    M = unit_square_mesh(kind, m)
    sol = PlaneWaveSolution.from_directions(k, p, j)
    S = assemble(M, k, p, g=impedance_data_from_exact(sol))
    x = sla.solve(S.matrix, S.rhs)
    assert l2_error(M, x, k, p, sol) <= 1e-8


def test_impedance_data_matches_finite_differences(rng):
    sol = ExactSolution(12.0)
    g = impedance_data_from_exact(sol)
    n = np.array([0.6, 0.8])
    x = rng.uniform(0, 1, size=(10, 2))
    eps = 1e-6
    dn = (sol.u(x + eps * n) - sol.u(x - eps * n)) / (2 * eps)
    np.testing.assert_allclose(g(x, n), dn + 1j * 12.0 * sol.u(x), atol=1e-6 * np.max(np.abs(dn)))


def test_boundary_source_sees_the_edge_normal():
    src = BoundarySource(lambda x, n: np.full(x.shape[0], n[0] + 2j * n[1]))
    out = src(np.zeros((3, 2)), (0.0, 1.0))
    np.testing.assert_array_equal(out, 2j)


def test_local_block_copy_and_range():
    S = assemble(unit_square_mesh("quad", 2), 4.0, 3)
    B = local_block(S, 1)
    np.testing.assert_array_equal(B, S.matrix[3:6, 3:6])
    B[0, 0] = 99
    assert S.matrix[3, 3] != 99
    with pytest.raises(IndexError):
        local_block(S, 4)


def test_assemble_rejects_bad_parameters():
    M = unit_square_mesh("quad", 1)
    with pytest.raises(ValueError):
        assemble(M, 0.0, 3)
    with pytest.raises(ValueError):
        assemble(M, 1.0, 0)


def test_dump_load_roundtrip(tmp_path):
    M = unit_square_mesh("tri", 1)
    S = assemble(M, 5.0, 3, g=impedance_data_from_exact(ExactSolution(5.0)))
    path = tmp_path / "sys.txt"
    dump_system(S, path)
    lines = path.read_text().splitlines()
    assert lines[0] == str(S.n) and len(lines) == 1 + 2 * S.n
    A, b = load_system(path)
    np.testing.assert_array_equal(A, S.matrix)
    np.testing.assert_array_equal(b, S.rhs)


def test_load_rejects_truncated(tmp_path):
    path = tmp_path / "sys.txt"
    path.write_text("2\n1 0 0 0\n0 0 1 0\n1 0\n")
    with pytest.raises(ValueError):
        load_system(path)
