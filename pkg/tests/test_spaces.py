import numpy as np
import pytest

import fecc
from fecc.spaces import (
    DisplacementField,
    NodeClass,
    PressureField,
    classify_nodes,
    eval_fields,
    locate_triangle,
    p1_shape,
)

from conftest import build_chain, make_mesh


class TestClassifyNodes:
    def test_counts_2x2(self, quads2):
        _, _, _, dofs = quads2
        assert dofs.n_u_cell == 4
        assert dofs.n_u_dualcenter == 1
        assert dofs.n_p == 9
        assert dofs.n_u == 10

    def test_counts_1x1(self, quads1):
        _, _, _, dofs = quads1
        assert dofs.n_u_cell == 1
        assert dofs.n_u_dualcenter == 0
        assert dofs.n_p == 4

    def test_boundary_midpoints_are_boundary(self, quads2):
        _, _, third, dofs = quads2
        n_v, n_c = third.n_primal_vertices, third.n_primal_cells
        assert (dofs.node_class[n_v + n_c:] == NodeClass.BOUNDARY).all()
        assert (dofs.u_scalar[n_v + n_c:] == -1).all()

    def test_numbering_cell_points_first(self, quads2):
        _, _, third, dofs = quads2
        n_v = third.n_primal_vertices
        assert list(dofs.u_scalar[n_v:n_v + 4]) == [0, 1, 2, 3]
        assert dofs.u_scalar[4] == 4  # the single interior vertex
        assert dofs.u_dof(4, 1) == dofs.n_u_scalar + 4

    @pytest.mark.parametrize("generator,n", [("quads", 3), ("perturbed", 4), ("triangles", 3)])
    def test_dof_count_identity(self, generator, n):
        primal, dual, _, dofs = build_chain(make_mesh(generator, n))
        assert dofs.n_u_cell == primal.n_cells
        assert dofs.n_u_dualcenter == int((~dual.is_boundary).sum())
        assert dofs.n_p == primal.n_vertices


class TestP1Shape:
    def test_reference_gradients(self):
        tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        vals, grads = p1_shape(tri, np.array([0.0, 0.0]))
        assert grads == pytest.approx(np.array([[-1, -1], [1, 0], [0, 1]]))
        assert vals == pytest.approx([1.0, 0.0, 0.0])

    def test_kronecker_at_vertices(self):
        tri = np.array([[0.2, 0.1], [0.9, 0.3], [0.4, 1.1]])
        vals, _ = p1_shape(tri, tri)
        assert vals == pytest.approx(np.eye(3), abs=1e-14)

    def test_partition_of_unity(self):
        tri = np.array([[0.0, 0.0], [2.0, 0.5], [0.3, 1.7]])
        rng = np.random.default_rng(5)
        bary = rng.dirichlet(np.ones(3), size=50)
        pts = bary @ tri
        vals, _ = p1_shape(tri, pts)
        assert vals.sum(axis=1) == pytest.approx(np.ones(50), abs=1e-13)

    def test_gradients_halve_when_scaled(self):
        tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        _, g1 = p1_shape(tri, np.zeros(2))
        _, g2 = p1_shape(2.0 * tri, np.zeros(2))
        assert g2 == pytest.approx(0.5 * g1)

    def test_degenerate_rejected(self):
        tri = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        with pytest.raises(ValueError, match="degenerate"):
            p1_shape(tri, np.zeros(2))


class TestEvalFields:
    def test_zero_and_constant(self, quads2):
        _, _, third, dofs = quads2
        u = DisplacementField(third, np.zeros((len(third.nodes), 2)))
        p = PressureField(third, np.full(dofs.n_p, 3.25))
        uh, ph = eval_fields(u, p, np.array([0.4, 0.6]))
        assert uh == pytest.approx([0.0, 0.0])
        assert ph == 3.25

    def test_linear_exactness(self, quads2):
        _, _, third, dofs = quads2

        def lin(pts):
            return np.column_stack([1.0 + 2.0 * pts[:, 0] - pts[:, 1],
                                    -0.5 + pts[:, 0] + 3.0 * pts[:, 1]])

        u = DisplacementField(third, lin(third.nodes))
        p = PressureField(third, np.zeros(dofs.n_p))
        rng = np.random.default_rng(2)
        pts = 0.05 + 0.9 * rng.random((100, 2))
        for x in pts:
            uh, _ = eval_fields(u, p, x)
            assert uh == pytest.approx(lin(x[None])[0], abs=1e-13)

    def test_interface_tie_lowest_owner(self, quads2):
        _, _, third, dofs = quads2
        # point on the interface between volume 0 (corner) and volume 1
        x = np.array([0.25, 0.1])
        t = locate_triangle(third, x)
        owners_containing = set()
        for ti in range(len(third.triangles)):
            tri = third.nodes[third.triangles[ti]]
            vals, _ = p1_shape(tri, x)
            if vals.min() >= -1e-12:
                owners_containing.add(int(third.owner[ti]))
        assert len(owners_containing) > 1
        assert third.owner[t] == min(owners_containing)

        p = PressureField(third, np.arange(dofs.n_p, dtype=float))
        u = DisplacementField(third, np.zeros((len(third.nodes), 2)))
        _, ph = eval_fields(u, p, x)
        assert ph == float(min(owners_containing))

    def test_outside_domain_raises(self, quads2):
        _, _, third, dofs = quads2
        u = DisplacementField(third, np.zeros((len(third.nodes), 2)))
        p = PressureField(third, np.zeros(dofs.n_p))
        with pytest.raises(ValueError, match="outside"):
            eval_fields(u, p, np.array([1.5, 0.5]))


def test_dof_vector_roundtrip(quads2):
    _, _, third, dofs = quads2
    rng = np.random.default_rng(8)
    u = rng.random(dofs.n_u)
    field = DisplacementField.from_dof_vector(dofs, u)
    assert field.dof_vector(dofs) == pytest.approx(u, abs=0)
    # boundary nodes stay zero
    assert (field.values[dofs.u_scalar == -1] == 0.0).all()
