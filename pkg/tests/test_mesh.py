import numpy as np
import pytest

from mmfem.errors import BadIndex, DegenerateCell, InvalidParam, ParseError
from mmfem.mesh import build, generate_box, generate_disk, io_read, io_write


def test_single_reference_triangle():
    mesh = build([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], [[0, 1, 2]])
    assert abs(abs(mesh.dets[0]) - 1.0) < 1e-14
    assert mesh.n_edges == 3
    assert len(mesh.boundary_facets) == 3


def test_unit_tetrahedron():
    mesh = build([[0, 0, 0], [0, 0, 1], [0, 1, 0], [1, 0, 0]], [[0, 1, 2, 3]])
    assert abs(abs(mesh.dets[0]) - 1.0) < 1e-14
    assert mesh.n_faces == 4 and mesh.n_edges == 6


def test_two_triangles_shared_edge():
    mesh = build([[0, 0], [1, 0], [0, 1], [1, 1]], [[0, 1, 2], [1, 3, 2]])
    assert mesh.n_edges == 5
    assert len(mesh.boundary_facets) == 4
    counts = np.bincount(mesh.cell_edges.ravel(), minlength=5)
    assert sorted(counts) == [1, 1, 1, 1, 2]


def test_cells_stored_sorted():
    mesh = build([[0, 0], [1, 0], [0, 1]], [[2, 0, 1]])
    np.testing.assert_array_equal(mesh.cells[0], [0, 1, 2])


def test_degenerate_cell_rejected():
    with pytest.raises(DegenerateCell):
        build([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]])


def test_bad_vertex_index():
    with pytest.raises(BadIndex):
        build([[0, 0], [1, 0], [0, 1]], [[0, 1, 7]])


class TestBox:
    def test_cube_counts(self):
        mesh = generate_box(((-1, 1), (-1, 1), (-1, 1)), 2)
        assert mesh.n_cells == 48
        mesh = generate_box(((-1, 1), (-1, 1), (-1, 1)), 4)
        assert mesh.n_cells == 384

    def test_volumes(self):
        mesh = generate_box(((-1, 1), (-1, 1), (-1, 1)), 3)
        assert abs(mesh.volume() - 8.0) < 1e-10
        mesh = generate_box(((0, 2), (0, 1)), (4, 2))
        assert abs(mesh.volume() - 2.0) < 1e-12
        assert mesh.n_cells == 16

    def test_side_tags(self):
        mesh = generate_box(((-1, 1), (-1, 1), (-1, 1)), 2)
        for tag in ("x-", "x+", "y-", "y+", "z-", "z+"):
            facets = mesh.tagged_facets(tag)
            assert len(facets) == 8  # 4 quads split into 2 triangles
        total = sum(len(mesh.tagged_facets(t)) for t in mesh.boundary_tags)
        assert total == len(mesh.boundary_facets)

    def test_axis_breakpoints(self):
        mesh = generate_box(((0, 1), (0, 1), (0, 1)), (1, 1, [0.0, 0.7, 1.0]))
        assert mesh.n_cells == 12
        assert abs(mesh.volume() - 1.0) < 1e-12

    def test_invalid_params(self):
        with pytest.raises(InvalidParam):
            generate_box(((1, 0), (0, 1)), 2)
        with pytest.raises(InvalidParam):
            generate_box(((0, 1), (0, 1)), 0)
        with pytest.raises(InvalidParam):
            generate_box(((0, 1), (0, 1)), (2, [0.0, 0.5, 0.9]))


class TestDisk:
    def test_boundary_on_circle(self):
        mesh = generate_disk(10.0, n_rings=3)
        for f in mesh.tagged_facets("boundary"):
            for v in mesh.facet_vertices(f):
                assert abs(np.linalg.norm(mesh.vertices[v]) - 10.0) < 1e-12

    def test_cell_count(self):
        for n in (1, 2, 4):
            mesh = generate_disk(1.0, n_rings=n)
            assert mesh.n_cells == 6 * n * n

    def test_area_converges(self):
        # polygonal area deficit shrinks under refinement
        areas = [generate_disk(1.0, n_rings=n).volume() for n in (4, 8, 16)]
        errs = [abs(a - np.pi) for a in areas]
        assert errs[1] < errs[0] / 3 and errs[2] < errs[1] / 3

    def test_target_h(self):
        mesh = generate_disk(10.0, target_h=2.5)
        assert mesh.n_cells == 6 * 4 * 4

    def test_invalid(self):
        with pytest.raises(InvalidParam):
            generate_disk(-1.0, 1.0)
        with pytest.raises(InvalidParam):
            generate_disk(1.0)


class TestOrientation:
    def test_shared_edges_ascend(self):
        mesh = generate_box(((-1, 1), (-1, 1), (-1, 1)), 2)
        # every stored edge and face is ascending; every cell row too
        assert np.all(np.diff(mesh.edges, axis=1) > 0)
        assert np.all(np.diff(mesh.faces, axis=1) > 0)
        assert np.all(np.diff(mesh.cells, axis=1) > 0)

    def test_volume_additivity(self):
        mesh = generate_box(((0, 1), (0, 2), (0, 3)), (2, 3, 2))
        assert abs(mesh.volume() - 6.0) < 1e-10


class TestIO:
    def test_round_trip(self, tmp_path):
        mesh = generate_box(((-1, 1), (-1, 1), (-1, 1)), 2)
        path = tmp_path / "cube.json"
        io_write(mesh, path)
        back = io_read(path)
        np.testing.assert_array_equal(back.cells, mesh.cells)
        np.testing.assert_allclose(back.vertices, mesh.vertices)
        assert set(back.boundary_tags) == set(mesh.boundary_tags)
        for tag in mesh.boundary_tags:
            got = {tuple(back.facet_vertices(f)) for f in back.tagged_facets(tag)}
            want = {tuple(mesh.facet_vertices(f)) for f in mesh.tagged_facets(tag)}
            assert got == want

    def test_disk_round_trip_counts(self, tmp_path):
        mesh = generate_disk(10.0, n_rings=2)
        path = tmp_path / "disk.json"
        io_write(mesh, path)
        back = io_read(path)
        assert back.n_cells == mesh.n_cells and back.n_edges == mesh.n_edges

    def test_missing_key(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"dim": 2, "vertices": [[0,0],[1,0],[0,1]]}')
        with pytest.raises(ParseError, match="cells"):
            io_read(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"dim": 2,,}')
        with pytest.raises(ParseError, match="line"):
            io_read(path)
