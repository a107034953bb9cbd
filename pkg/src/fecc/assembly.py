"""Sparse assembly of the mixed saddle-point blocks A, B, C and the load F.

Gradients of P1 hats are constant per triangle, so one-point quadrature is
exact for A and B; loads use the edge-midpoint rule (exact for quadratics).
Homogeneous Dirichlet conditions are imposed by excluding boundary nodes
from the unknown numbering, never by penalties.  All accumulations are
sorted before compression so assembled matrices are independent of the
element traversal order, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import triangle_geometry
from .quadrature import triangle_rule
from .spaces import DofMap
from .mesh import ThirdMesh, DualMesh


@dataclass
class SaddleSystem:
    """Blocks of [[A, kappa B^T], [B, -(1/lambda) C]] [U; P] = [F; 0].

    A acts on displacement unknowns (component-blocked), B maps displacements
    to one row per dual volume, C is the diagonal pressure mass matrix with
    the volume areas.  ``form`` is 'eps' (symmetric-gradient stiffness) or
    'grad' (component-decoupled full-gradient stiffness); ``kappa`` scales the
    pressure coupling of the first block row (grad form only; 1 by default).
    """

    A: sp.csr_matrix
    B: sp.csr_matrix
    C: sp.csr_matrix
    F: np.ndarray
    form: str
    mu: float
    kappa: float = 1.0

    @property
    def n_u(self) -> int:
        return self.A.shape[0]

    @property
    def n_p(self) -> int:
        return self.B.shape[0]


def accumulate_csr(rows, cols, vals, shape) -> sp.csr_matrix:
    """Sum COO triplets into CSR after a canonical (row, col, value) sort.

    Sorting by value inside each (row, col) group fixes the floating-point
    summation order, making the result independent of triplet order.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    if len(vals) == 0:
        return sp.csr_matrix(shape)
    order = np.lexsort((vals, cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    key_change = np.empty(len(vals), dtype=bool)
    key_change[0] = True
    key_change[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    starts = np.nonzero(key_change)[0]
    sums = np.add.reduceat(vals, starts)
    return sp.csr_matrix((sums, (rows[starts], cols[starts])), shape=shape)


def _scalar_triplets(third: ThirdMesh, dofs: DofMap, local_fn):
    """COO triplets of a scalar 3x3-per-triangle form restricted to unknowns.

    ``local_fn(areas, grads, i, j)`` returns the per-triangle local entries.
    """
    areas, grads = triangle_geometry(third.nodes, third.triangles)
    sdof = dofs.u_scalar[third.triangles]       # (nt, 3)
    rows, cols, vals = [], [], []
    for i in range(3):
        for j in range(3):
            mask = (sdof[:, i] >= 0) & (sdof[:, j] >= 0)
            if not mask.any():
                continue
            rows.append(sdof[mask, i])
            cols.append(sdof[mask, j])
            vals.append(local_fn(areas, grads, i, j)[mask])
    return (np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


def scalar_stiffness(third: ThirdMesh, dofs: DofMap) -> sp.csr_matrix:
    """P1 stiffness int grad N_i . grad N_j on interior nodes."""
    n = dofs.n_u_scalar

    def local(areas, grads, i, j):
        return areas * np.einsum("tk,tk->t", grads[:, i], grads[:, j])

    return accumulate_csr(*_scalar_triplets(third, dofs, local), (n, n))


def scalar_mass(third: ThirdMesh, dofs: DofMap) -> sp.csr_matrix:
    """Consistent P1 mass int N_i N_j on interior nodes."""
    n = dofs.n_u_scalar

    def local(areas, grads, i, j):
        return areas * ((2.0 if i == j else 1.0) / 12.0)

    return accumulate_csr(*_scalar_triplets(third, dofs, local), (n, n))


def assemble_A(third: ThirdMesh, dofs: DofMap, mu: float, form: str = "eps") -> sp.csr_matrix:
    """Displacement stiffness block.

    'grad': mu int grad(u):grad(v), identical decoupled scalar Laplacians on
    the two components.  'eps': 2 mu int eps(u):eps(v), which couples the
    components; entries follow
        2 eps(N_i e_k) : eps(N_j e_l) = delta_kl grad N_i . grad N_j
                                        + (grad N_i)_l (grad N_j)_k.
    """
    ns = dofs.n_u_scalar
    if form == "grad":
        L = scalar_stiffness(third, dofs)
        return sp.block_diag((mu * L, mu * L), format="csr")
    if form != "eps":
        raise ValueError(f"unknown stiffness form {form!r}")

    areas, grads = triangle_geometry(third.nodes, third.triangles)
    sdof = dofs.u_scalar[third.triangles]
    rows, cols, vals = [], [], []
    for k in range(2):
        for l in range(2):
            for i in range(3):
                for j in range(3):
                    mask = (sdof[:, i] >= 0) & (sdof[:, j] >= 0)
                    if not mask.any():
                        continue
                    dot = np.einsum("tk,tk->t", grads[:, i], grads[:, j]) if k == l else 0.0
                    entry = mu * areas * (dot + grads[:, i, l] * grads[:, j, k])
                    rows.append(k * ns + sdof[mask, i])
                    cols.append(l * ns + sdof[mask, j])
                    vals.append(entry[mask])
    return accumulate_csr(
        np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
        (2 * ns, 2 * ns))


def assemble_B(third: ThirdMesh, dual: DualMesh, dofs: DofMap) -> sp.csr_matrix:
    """Divergence block: row M, column (P, k) holds int_M d/dx_k N_P.

    Integrands are constant per triangle and each triangle lies in exactly
    one dual volume, so the entries are exact sums of area * gradient.
    """
    areas, grads = triangle_geometry(third.nodes, third.triangles)
    sdof = dofs.u_scalar[third.triangles]
    ns = dofs.n_u_scalar
    rows, cols, vals = [], [], []
    for k in range(2):
        for i in range(3):
            mask = sdof[:, i] >= 0
            rows.append(third.owner[mask])
            cols.append(k * ns + sdof[mask, i])
            vals.append(areas[mask] * grads[mask, i, k])
    return accumulate_csr(
        np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
        (dofs.n_p, 2 * ns))


def assemble_C(dual: DualMesh, dofs: DofMap) -> sp.csr_matrix:
    """Diagonal pressure mass matrix, C_MM = area(M)."""
    return sp.diags(dual.areas, format="csr")


def load_integrals(third: ThirdMesh, f, degree: int = 2) -> np.ndarray:
    """int f . N_P for ALL third-mesh nodes, shape (n_nodes, 2).

    ``f`` maps an (n, 2) array of points to (n, 2) values.
    """
    bary, w = triangle_rule(degree)
    areas, _ = triangle_geometry(third.nodes, third.triangles)
    x = third.nodes[third.triangles]               # (nt, 3, 2)
    pts = np.einsum("qk,tkd->tqd", bary, x)        # (nt, nq, 2)
    fv = np.asarray(f(pts.reshape(-1, 2)), dtype=float).reshape(pts.shape)
    if not np.all(np.isfinite(fv)):
        raise ValueError("body force returned non-finite values")
    # weight of node i at point q is bary[q, i]
    contrib = np.einsum("q,qi,tqd->tid", w, bary, fv) * areas[:, None, None]
    out = np.zeros((len(third.nodes), 2))
    np.add.at(out, third.triangles.ravel(), contrib.reshape(-1, 2))
    return out


def assemble_F(third: ThirdMesh, dofs: DofMap, f, degree: int = 2) -> np.ndarray:
    """Load vector over displacement unknowns (boundary nodes dropped)."""
    all_nodes = load_integrals(third, f, degree=degree)
    ns = dofs.n_u_scalar
    F = np.empty(2 * ns)
    F[:ns] = all_nodes[dofs.scalar_node, 0]
    F[ns:] = all_nodes[dofs.scalar_node, 1]
    return F


def build_saddle_system(third: ThirdMesh, dual: DualMesh, dofs: DofMap,
                        mu: float, f, form: str = "eps",
                        kappa: float = 1.0) -> SaddleSystem:
    """Assemble all blocks for a body force ``f`` (see :func:`load_integrals`)."""
    return SaddleSystem(
        A=assemble_A(third, dofs, mu, form=form),
        B=assemble_B(third, dual, dofs),
        C=assemble_C(dual, dofs),
        F=assemble_F(third, dofs, f),
        form=form,
        mu=mu,
        kappa=kappa,
    )


def displacement_norm_matrix(third: ThirdMesh, dofs: DofMap) -> sp.csr_matrix:
    """Matrix of the full H1 norm, int grad v : grad v + int v . v, per component."""
    H = scalar_stiffness(third, dofs) + scalar_mass(third, dofs)
    return sp.block_diag((H, H), format="csr")


# ---------------------------------------------------------------------------
# matrix-free application to full nodal fields (boundary values included)
# ---------------------------------------------------------------------------

def apply_first_block(third: ThirdMesh, dofs: DofMap, u_nodal: np.ndarray,
                      p: np.ndarray, mu: float, form: str = "eps",
                      kappa: float = 1.0) -> np.ndarray:
    """a(u_h, N_Q e_k) + kappa * int p div(N_Q e_k) for every unknown (Q, k).

    ``u_nodal`` is a full (n_nodes, 2) nodal field (boundary values allowed),
    ``p`` one value per dual volume.  Used for lifted-boundary residual
    checks; the integrals are exact.
    """
    areas, grads = triangle_geometry(third.nodes, third.triangles)
    u_loc = u_nodal[third.triangles]               # (nt, 3, 2)
    grad_u = np.einsum("tia,tib->tab", u_loc, grads)  # (nt, 2, 2), [a][b] = d_b u_a
    if form == "eps":
        epsI = 0.5 * (grad_u + grad_u.transpose(0, 2, 1))
        stress = 2.0 * mu * epsI
    elif form == "grad":
        stress = mu * grad_u
    else:
        raise ValueError(f"unknown stiffness form {form!r}")
    stress = stress + kappa * p[third.owner][:, None, None] * np.eye(2)[None]
    # row (Q, k): int stress[k, :] . grad N_Q
    contrib = np.einsum("tkb,tib->tik", stress, grads) * areas[:, None, None]
    out = np.zeros((len(third.nodes), 2))
    np.add.at(out, third.triangles.ravel(), contrib.reshape(-1, 2))
    ns = dofs.n_u_scalar
    r = np.empty(2 * ns)
    r[:ns] = out[dofs.scalar_node, 0]
    r[ns:] = out[dofs.scalar_node, 1]
    return r


def apply_divergence(third: ThirdMesh, dofs: DofMap, u_nodal: np.ndarray) -> np.ndarray:
    """int_M div u_h per dual volume for a full nodal field."""
    areas, grads = triangle_geometry(third.nodes, third.triangles)
    u_loc = u_nodal[third.triangles]
    div = np.einsum("tia,tia->t", u_loc, grads)
    out = np.zeros(dofs.n_p)
    np.add.at(out, third.owner, areas * div)
    return out
