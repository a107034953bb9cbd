"""Static condensation of interior dual-center displacement unknowns.

With the component-decoupled 'grad' stiffness, the hat function of a dual
center is supported on its own volume only, and volumes have disjoint
interiors, so the dual-center/dual-center block of A is diagonal by
sparsity, with entries mu * Theta_M where

    Theta_M = int_M |grad N_{C_M}|^2.

Elimination is therefore an exact algebraic Schur complement over that
diagonal block; the reduced system couples one displacement unknown pair
per primal cell with one pressure per dual volume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import triangle_geometry
from .mesh import DualMesh, ThirdMesh
from .spaces import DisplacementField, DofMap
from .assembly import SaddleSystem


@dataclass
class CondensationData:
    """Everything the elimination and its inverse need.

    Index arrays address the component-blocked displacement numbering:
    ``cell_cols`` the kept (cell point) unknowns, ``center_cols`` the
    eliminated (dual center) unknowns, both components.
    """

    dofs: DofMap
    theta: np.ndarray             # (n_d,) per interior dual volume, dof order
    center_vertices: np.ndarray   # (n_d,) vertex index per eliminated scalar unknown
    cell_cols: np.ndarray         # (2 n_c,)
    center_cols: np.ndarray       # (2 n_d,)
    dd_diag: np.ndarray           # (2 n_d,) diagonal of A on eliminated unknowns (= mu*theta twice)
    A_dc: sp.csr_matrix           # (2 n_d, 2 n_c)
    B_d: sp.csr_matrix            # (n_p, 2 n_d)
    mu: float
    kappa: float


@dataclass
class CondensedSystem:
    """Cell-centered block system after eliminating dual-center unknowns.

    Solves [[At, kappa Bt^T], [Bt, -(1/lambda) C - kappa Spp]] [Uc; P] = [Fu; Fp];
    ``Spp = B_d diag(1/dd) B_d^T`` collects the pressure-pressure fill-in and C
    stays the plain volume-area mass so one condensation serves every lambda.
    """

    At: sp.csr_matrix
    Bt: sp.csr_matrix
    C: sp.csr_matrix
    Spp: sp.csr_matrix
    Fu: np.ndarray
    Fp: np.ndarray
    F_full: np.ndarray
    form: str
    kappa: float
    elim: CondensationData

    @property
    def n_u(self) -> int:
        return self.At.shape[0]

    @property
    def n_p(self) -> int:
        return self.Bt.shape[0]


def compute_theta(dual: DualMesh, third: ThirdMesh) -> dict:
    """Theta_M = int_M |grad N_{C_M}|^2 per interior dual volume.

    Exact per-triangle integration: the center is local vertex 0 of every
    fan triangle, so the integral is sum area * |grad N_0|^2.
    """
    areas, grads = triangle_geometry(third.nodes, third.triangles)
    g0sq = np.einsum("tk,tk->t", grads[:, 0], grads[:, 0])
    theta = np.zeros(third.n_primal_vertices)
    np.add.at(theta, third.owner, areas * g0sq)
    return {int(i): float(theta[i])
            for i in np.nonzero(~dual.is_boundary)[0]}


def condensation_data(system: SaddleSystem, dofs: DofMap) -> CondensationData:
    """Slice the assembled grad-form system for elimination.

    Verifies that the eliminated block is diagonal by sparsity pattern and
    positive; refuses 'eps' systems, whose component coupling breaks the
    scalar elimination.
    """
    if system.form != "grad":
        raise ValueError("condensation requires the component-decoupled 'grad' form")
    ns = dofs.n_u_scalar
    n_c = dofs.n_u_cell
    n_d = dofs.n_u_dualcenter
    cell_cols = np.concatenate([np.arange(n_c), ns + np.arange(n_c)])
    center_cols = np.concatenate([n_c + np.arange(n_d), ns + n_c + np.arange(n_d)])

    A = system.A.tocsr()
    A_dd = A[center_cols][:, center_cols].tocsr()
    off = A_dd - sp.diags(A_dd.diagonal())
    off.eliminate_zeros()
    if off.nnz != 0:
        raise ValueError("dual-center block is not diagonal; mesh structure violated")
    dd = A_dd.diagonal()
    if np.any(dd <= 0.0):
        raise ValueError("non-positive dual-center diagonal entry")

    return CondensationData(
        dofs=dofs,
        theta=dd[:n_d] / system.mu,
        center_vertices=dofs.scalar_node[n_c:ns],
        cell_cols=cell_cols,
        center_cols=center_cols,
        dd_diag=dd,
        A_dc=A[center_cols][:, cell_cols].tocsr(),
        B_d=system.B[:, center_cols].tocsr(),
        mu=system.mu,
        kappa=system.kappa,
    )


def condense(system: SaddleSystem, dofs: DofMap,
             data: CondensationData | None = None) -> CondensedSystem:
    """Exact Schur complement of the grad-form system over dual-center unknowns."""
    if data is None:
        data = condensation_data(system, dofs)
    A = system.A.tocsr()
    cc, dc = data.cell_cols, data.center_cols
    Dinv = sp.diags(1.0 / data.dd_diag)
    A_cc = A[cc][:, cc].tocsr()
    A_cd = A[cc][:, dc].tocsr()
    B_c = system.B[:, cc].tocsr()

    At = (A_cc - A_cd @ Dinv @ data.A_dc).tocsr()
    Bt = (B_c - data.B_d @ Dinv @ data.A_dc).tocsr()
    Spp = (data.B_d @ Dinv @ data.B_d.T).tocsr()

    F_c = system.F[cc]
    F_d = system.F[dc]
    Fu = F_c - A_cd @ (F_d / data.dd_diag)
    Fp = -data.B_d @ (F_d / data.dd_diag)

    return CondensedSystem(
        At=At, Bt=Bt, C=system.C, Spp=Spp, Fu=Fu, Fp=Fp,
        F_full=system.F.copy(), form=system.form, kappa=system.kappa, elim=data,
    )


def reconstruct(u_cells: np.ndarray, p: np.ndarray, F: np.ndarray,
                data: CondensationData) -> DisplacementField:
    """Recover the eliminated dual-center values and build the full field.

    The eliminated unknowns solve their original rows exactly:
        u_d = (F_d - A_dc u_c - kappa B_d^T p) / dd.
    """
    F_d = F[data.center_cols]
    u_d = (F_d - data.A_dc @ u_cells - data.kappa * (data.B_d.T @ p)) / data.dd_diag

    dofs = data.dofs
    full = np.zeros(2 * dofs.n_u_scalar)
    full[data.cell_cols] = u_cells
    full[data.center_cols] = u_d
    return DisplacementField.from_dof_vector(dofs, full)
