import numpy as np
import pytest

import fecc
from fecc import io as fio
from fecc.cli import main
from fecc.spaces import DisplacementField, PressureField

from conftest import build_chain, make_mesh, shoelace


class TestMeshFile:
    def test_roundtrip_bit_exact(self, tmp_path):
        mesh = fecc.generate_structured_quads(3, 2, 0.27, seed=13)
        path = tmp_path / "m.txt"
        fio.write_mesh(mesh, path)
        back = fio.read_mesh(path)
        assert np.array_equal(back.vertices, mesh.vertices)
        assert np.array_equal(back.cell_points, mesh.cell_points)
        assert all(np.array_equal(a, b) for a, b in zip(back.cells, mesh.cells))
        assert np.array_equal(back.boundary_edges, mesh.boundary_edges)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("FECCMESH 2\n1\n0 0\n")
        with pytest.raises(fio.MeshFileError, match="line 1"):
            fio.read_mesh(path)

    def test_vertex_index_out_of_range(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text(
            "FECCMESH 1\n4\n0 0\n1 0\n1 1\n0 1\n1\n4 0 1 2 7\n")
        with pytest.raises(fio.MeshFileError, match="line 8") as err:
            fio.read_mesh(path)
        assert err.value.line == 8

    def test_clockwise_polygon_reversed_with_warning(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("FECCMESH 1\n4\n0 0\n1 0\n1 1\n0 1\n1\n4 0 3 2 1\n")
        with pytest.warns(UserWarning, match="clockwise"):
            mesh = fio.read_mesh(path)
        assert shoelace(mesh.vertices[mesh.cells[0]]) > 0.0

    def test_non_simple_polygon_rejected(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("FECCMESH 1\n4\n0 0\n1 1\n1 0\n0 1\n1\n4 0 1 2 3\n")
        with pytest.raises(fio.MeshFileError, match="non-simple"):
            fio.read_mesh(path)

    def test_cellpoints_override(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text(
            "FECCMESH 1\n4\n0 0\n1 0\n1 1\n0 1\n1\n4 0 1 2 3\n"
            "CELLPOINTS\n0.25 0.75\n")
        mesh = fio.read_mesh(path)
        assert mesh.cell_points[0] == pytest.approx([0.25, 0.75])

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("FECCMESH 1\n4\n0 0\n1 0\n")
        with pytest.raises(fio.MeshFileError, match="unexpected end"):
            fio.read_mesh(path)


class TestVtk:
    def _parse_vtk(self, path):
        """Independent minimal reader of the legacy text layout."""
        lines = path.read_text().splitlines()
        i = lines.index(next(l for l in lines if l.startswith("POINTS")))
        n = int(lines[i].split()[1])
        pts = np.array([[float(v) for v in lines[i + 1 + k].split()] for k in range(n)])
        j = next(k for k, l in enumerate(lines) if l.startswith("CELLS"))
        nt = int(lines[j].split()[1])
        tris = np.array([[int(v) for v in lines[j + 1 + k].split()[1:]] for k in range(nt)])
        v = lines.index("VECTORS displacement double")
        vec = np.array([[float(x) for x in lines[v + 1 + k].split()] for k in range(n)])
        s = lines.index("LOOKUP_TABLE default")
        press = np.array([float(lines[s + 1 + k]) for k in range(nt)])
        return pts, tris, vec, press

    def test_zero_fields_counts(self, quads2, tmp_path):
        _, _, third, dofs = quads2
        u = DisplacementField(third, np.zeros((len(third.nodes), 2)))
        p = PressureField(third, np.zeros(dofs.n_p))
        path = tmp_path / "f.vtk"
        fio.export_vtk(third, u, p, path)
        pts, tris, vec, press = self._parse_vtk(path)
        assert len(pts) == 21 and len(tris) == 24
        assert (vec == 0.0).all() and (press == 0.0).all()

    def test_field_values_roundtrip(self, quads2, tmp_path):
        _, _, third, dofs = quads2
        rng = np.random.default_rng(9)
        u = DisplacementField(third, rng.random((len(third.nodes), 2)))
        p = PressureField(third, rng.random(dofs.n_p))
        path = tmp_path / "f.vtk"
        fio.export_vtk(third, u, p, path)
        pts, tris, vec, press = self._parse_vtk(path)
        assert np.array_equal(pts[:, :2], third.nodes)
        assert np.array_equal(tris, third.triangles)
        assert np.array_equal(vec[:, :2], u.values)
        assert np.array_equal(press, p.values[third.owner])


class TestCsv:
    def test_schema_header_and_precision(self, tmp_path):
        rows = [(1, 0.5, 1.0 / 3.0)]
        path = tmp_path / "r.csv"
        fio.write_csv("demo", ("a", "b", "c"), rows, path)
        text = path.read_text().splitlines()
        assert text[0] == "# fecc-csv v1 demo"
        assert text[1] == "a,b,c"
        assert text[2] == "1,0.5,0.333333333333"

    def test_byte_identical_reruns(self, tmp_path):
        rep1 = fecc.convergence_study([4, 8], [0.3])
        rep2 = fecc.convergence_study([4, 8], [0.3])
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        fio.convergence_csv(rep1, p1)
        fio.convergence_csv(rep2, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestCli:
    def test_mesh_gen_and_solve_condensed(self, tmp_path, capsys):
        mesh_path = tmp_path / "m.txt"
        assert main(["mesh-gen", "--nx", "3", "--ny", "3", "--out", str(mesh_path)]) == 0
        vtk_path = tmp_path / "m.vtk"
        rc = main(["solve", "--mesh", str(mesh_path), "--E", "1", "--nu", "0.4999",
                   "--form", "grad", "--condensed", "--out", str(vtk_path)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "n_u=18" in out          # 2 * 9 cells
        assert "residual=" in out and "pressure_mean=" in out
        assert vtk_path.exists()

    def test_poisson_half_rejected(self, capsys):
        rc = main(["solve", "--nu", "0.5"])
        err = capsys.readouterr().err
        assert rc == 2
        assert err.startswith("fecc-error: usage:")
        assert "0.5" in err

    def test_missing_mesh_is_usage_error(self, capsys):
        rc = main(["solve", "--E", "1", "--nu", "0.3"])
        assert rc == 2
        assert "--mesh" in capsys.readouterr().err

    def test_both_parametrizations_rejected(self, tmp_path, capsys):
        rc = main(["solve", "--mesh", "x", "--E", "1", "--nu", "0.3",
                   "--lambda", "1", "--mu", "1"])
        assert rc == 2

    def test_convergence_csv_rows_and_footer(self, tmp_path):
        path = tmp_path / "c.csv"
        rc = main(["convergence", "--levels", "4,8,16", "--nu", "0.3,0.4999",
                   "--out", str(path)])
        assert rc == 0
        lines = path.read_text().splitlines()
        data = [l for l in lines if not l.startswith("#") and not l.startswith("nu,")]
        assert len(data) == 6
        footer = [l for l in lines if l.startswith("# rates")]
        assert len(footer) == 2

    def test_infsup_and_locking_csv(self, tmp_path):
        ipath = tmp_path / "i.csv"
        assert main(["infsup", "--levels", "4,8", "--out", str(ipath)]) == 0
        lines = ipath.read_text().splitlines()
        assert lines[0] == "# fecc-csv v1 infsup"
        assert len(lines) == 4

        lpath = tmp_path / "l.csv"
        assert main(["locking", "--level", "8", "--nu", "0.3", "--out", str(lpath)]) == 0
        assert lpath.read_text().startswith("# fecc-csv v1 locking")

    def test_cli_reruns_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["convergence", "--levels", "4,8", "--nu", "0.3", "--out"]
        assert main(argv + [str(a)]) == 0
        assert main(argv + [str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_unreadable_mesh_file(self, tmp_path, capsys):
        rc = main(["solve", "--mesh", str(tmp_path / "nope.txt"), "--E", "1", "--nu", "0.3"])
        assert rc == 2
