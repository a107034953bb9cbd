import numpy as np
import pytest
import scipy.sparse as sp

import fecc
from fecc.assembly import (
    apply_divergence,
    apply_first_block,
    assemble_A,
    assemble_B,
    assemble_C,
    assemble_F,
    load_integrals,
    scalar_stiffness,
)
from fecc.mesh import ThirdMesh
from fecc.spaces import DofMap

from conftest import build_chain, f_const, f_zero, make_mesh


def single_triangle_setup():
    """Reference triangle as its own 'third mesh' with all nodes unknown-carrying."""
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    third = ThirdMesh(nodes=nodes, triangles=np.array([[0, 1, 2]]),
                      owner=np.array([0]), n_primal_vertices=0, n_primal_cells=3)
    dofs = DofMap(third=third, dual=None,
                  node_class=np.ones(3, dtype=np.int8),
                  u_scalar=np.arange(3), scalar_node=np.arange(3),
                  p_dof=np.arange(1), n_u_cell=3, n_u_dualcenter=0, n_p=1)
    return third, dofs


class TestLocalMatrices:
    def test_grad_reference_stiffness(self):
        # hand integration of constant gradients over area 1/2
        third, dofs = single_triangle_setup()
        A = assemble_A(third, dofs, mu=1.0, form="grad").toarray()
        expected = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
        assert A[:3, :3] == pytest.approx(expected, abs=1e-15)
        assert A[3:, 3:] == pytest.approx(expected, abs=1e-15)

    def test_b_entry_reference_hat(self):
        # hat at (0,0), x component: constant gradient -1 times area 1/2
        third, dofs = single_triangle_setup()
        B = assemble_B(third, None, dofs).toarray()
        assert B[0, 0] == pytest.approx(-0.5, abs=1e-15)
        assert B[0, 3] == pytest.approx(-0.5, abs=1e-15)  # y component of the same hat


class TestStiffness:
    def test_eps_translation_annihilated(self, quads2):
        _, _, third, dofs = quads2
        ones = np.ones((len(third.nodes), 2))
        r = apply_first_block(third, dofs, ones, np.zeros(dofs.n_p), mu=0.7, form="eps")
        assert np.abs(r).max() < 1e-12

    def test_grad_components_decoupled(self, quads2):
        _, _, third, dofs = quads2
        A = assemble_A(third, dofs, mu=1.3, form="grad")
        ns = dofs.n_u_scalar
        assert A[:ns, ns:].nnz == 0
        assert A[ns:, :ns].nnz == 0

    def test_grad_is_duplicated_scalar_laplacian(self, quads2):
        _, _, third, dofs = quads2
        mu = 0.42
        A = assemble_A(third, dofs, mu, form="grad")
        L = scalar_stiffness(third, dofs)
        expected = sp.kron(sp.identity(2), mu * L, format="csr")
        assert (A - expected).nnz == 0 or abs((A - expected)).max() < 1e-16

    @pytest.mark.parametrize("form", ["eps", "grad"])
    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_symmetric_positive_definite(self, form, n):
        _, _, third, dofs = build_chain(make_mesh("perturbed", n))
        A = assemble_A(third, dofs, mu=0.4, form=form)
        dense = A.toarray()
        assert np.abs(dense - dense.T).max() < 1e-12 * np.abs(dense).max()
        assert np.linalg.eigvalsh(dense).min() > 0.0

    def test_unknown_form_rejected(self, quads2):
        _, _, third, dofs = quads2
        with pytest.raises(ValueError):
            assemble_A(third, dofs, 1.0, form="sigma")


class TestDivergenceBlock:
    def test_column_sums_vanish(self, quads2):
        # q = 1 tests the divergence theorem: sum_M int_M d_k N_P = 0 for interior P
        _, dual, third, dofs = quads2
        B = assemble_B(third, dual, dofs)
        assert np.abs(np.asarray(B.sum(axis=0))).max() < 1e-14

    def test_divergence_free_field(self):
        # nodal field from the curl of a quadratic potential: divergence zero
        primal, dual, third, dofs = build_chain(make_mesh("perturbed", 4))

        def stream_curl(pts):
            x, y = pts[:, 0], pts[:, 1]
            # psi = x^2 - y^2 + x y -> v = (d psi / dy, -d psi / dx)
            return np.column_stack([-2.0 * y + x, -2.0 * x - y])

        v = stream_curl(third.nodes)
        per_volume = apply_divergence(third, dofs, v)
        assert np.abs(per_volume).max() < 1e-12

    def test_divergence_of_linear_field(self, quads2):
        _, dual, third, dofs = quads2

        def lin(pts):
            return np.column_stack([0.2 * pts[:, 0], 0.4 * pts[:, 1]])

        per_volume = apply_divergence(third, dofs, lin(third.nodes))
        assert per_volume == pytest.approx(0.6 * dual.areas, abs=1e-14)


class TestPressureMass:
    def test_entries_2x2(self, quads2):
        _, dual, _, dofs = quads2
        C = assemble_C(dual, dofs)
        assert C[4, 4] == pytest.approx(0.25, abs=1e-15)   # interior volume
        assert C[0, 0] == pytest.approx(0.0625, abs=1e-15)  # corner volume
        assert (C - sp.diags(C.diagonal())).nnz == 0

    def test_trace_is_domain_area(self, quads2):
        _, dual, _, dofs = quads2
        assert assemble_C(dual, dofs).diagonal().sum() == pytest.approx(1.0, abs=1e-12)


class TestLoads:
    def test_zero_force(self, quads2):
        _, _, third, dofs = quads2
        assert (assemble_F(third, dofs, f_zero) == 0.0).all()

    def test_partition_of_unity_integrated(self, quads2):
        _, _, third, dofs = quads2
        all_nodes = load_integrals(third, f_const(1.0, 0.0))
        assert all_nodes[:, 0].sum() == pytest.approx(1.0, abs=1e-12)
        assert np.abs(all_nodes[:, 1]).max() == 0.0

    def test_linear_force_exact(self, quads2):
        # f . N_P is quadratic: the edge-midpoint rule must match a degree-6 rule
        _, _, third, dofs = quads2

        def f(pts):
            return np.column_stack([1.0 + 2.0 * pts[:, 0] - 0.5 * pts[:, 1],
                                    pts[:, 0] + pts[:, 1]])

        F2 = assemble_F(third, dofs, f, degree=2)
        F6 = assemble_F(third, dofs, f, degree=6)
        assert F2 == pytest.approx(F6, abs=1e-13)

    def test_nonfinite_force_rejected(self, quads2):
        _, _, third, dofs = quads2

        def bad(pts):
            out = np.ones_like(pts)
            out[0, 0] = np.nan
            return out

        with pytest.raises(ValueError, match="non-finite"):
            assemble_F(third, dofs, bad)


class TestDeterminism:
    @pytest.mark.parametrize("form", ["eps", "grad"])
    def test_traversal_order_independent(self, form):
        primal, dual, third, dofs = build_chain(make_mesh("perturbed", 3))
        rng = np.random.default_rng(4)
        perm = rng.permutation(len(third.triangles))
        shuffled = ThirdMesh(
            nodes=third.nodes, triangles=third.triangles[perm],
            owner=third.owner[perm],
            n_primal_vertices=third.n_primal_vertices,
            n_primal_cells=third.n_primal_cells)

        A1 = assemble_A(third, dofs, 0.37, form=form).toarray()
        A2 = assemble_A(shuffled, dofs, 0.37, form=form).toarray()
        assert np.array_equal(A1, A2)

        B1 = assemble_B(third, dual, dofs).toarray()
        B2 = assemble_B(shuffled, dual, dofs).toarray()
        assert np.array_equal(B1, B2)
