"""Discrete spaces: P1 displacements on the third mesh, P0 pressures per dual volume."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .mesh import DualMesh, ThirdMesh


class NodeClass(IntEnum):
    BOUNDARY = 0      # on the domain boundary: no displacement unknown
    CELL_POINT = 1    # mesh point of a primal cell
    DUAL_CENTER = 2   # interior primal vertex = center of an interior dual volume


@dataclass
class DofMap:
    """Deterministic numbering of displacement and pressure unknowns.

    Scalar displacement unknowns are numbered cell points first (by cell
    index), then interior dual centers (by vertex index); the two components
    are stored block-wise, so dof(node, comp) = comp * n_u_scalar + scalar.
    Pressures are numbered by vertex index, one per dual volume.
    """

    third: ThirdMesh
    dual: DualMesh
    node_class: np.ndarray        # (n_nodes,) NodeClass values
    u_scalar: np.ndarray          # (n_nodes,) scalar dof or -1 for boundary nodes
    scalar_node: np.ndarray       # (n_u_scalar,) inverse of u_scalar
    p_dof: np.ndarray             # (n_volumes,)
    n_u_cell: int
    n_u_dualcenter: int
    n_p: int

    @property
    def n_u_scalar(self) -> int:
        return self.n_u_cell + self.n_u_dualcenter

    @property
    def n_u(self) -> int:
        return 2 * self.n_u_scalar

    def u_dof(self, node: int, comp: int) -> int:
        s = self.u_scalar[node]
        if s < 0:
            raise ValueError(f"node {node} carries no displacement unknown")
        return comp * self.n_u_scalar + int(s)


def classify_nodes(third: ThirdMesh, dual: DualMesh) -> DofMap:
    """Classify third-mesh nodes and number the unknowns.

    Primal vertices are dual centers when their volume does not touch the
    domain boundary; cell points are always interior; boundary-edge
    midpoints always lie on the boundary.
    """
    n_v = third.n_primal_vertices
    n_c = third.n_primal_cells
    n_nodes = len(third.nodes)

    node_class = np.full(n_nodes, NodeClass.BOUNDARY, dtype=np.int8)
    node_class[n_v:n_v + n_c] = NodeClass.CELL_POINT
    interior_vertices = np.nonzero(~dual.is_boundary)[0]
    node_class[interior_vertices] = NodeClass.DUAL_CENTER

    u_scalar = np.full(n_nodes, -1, dtype=np.int64)
    u_scalar[n_v:n_v + n_c] = np.arange(n_c)
    u_scalar[interior_vertices] = n_c + np.arange(len(interior_vertices))

    scalar_node = np.concatenate([
        np.arange(n_v, n_v + n_c, dtype=np.int64),
        interior_vertices.astype(np.int64),
    ])

    return DofMap(
        third=third,
        dual=dual,
        node_class=node_class,
        u_scalar=u_scalar,
        scalar_node=scalar_node,
        p_dof=np.arange(dual.n_volumes, dtype=np.int64),
        n_u_cell=n_c,
        n_u_dualcenter=len(interior_vertices),
        n_p=dual.n_volumes,
    )


def p1_shape(triangle: np.ndarray, x: np.ndarray):
    """Hat-function values and constant gradients on one triangle.

    Parameters
    ----------
    triangle : (3, 2) array of CCW vertex coordinates
    x : (2,) point or (n, 2) points

    Returns
    -------
    values : (3,) or (n, 3) barycentric hat values
    grads : (3, 2) constant gradients
    """
    p0, p1, p2 = triangle
    det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])
    h2 = max(
        np.sum((p1 - p0) ** 2), np.sum((p2 - p1) ** 2), np.sum((p0 - p2) ** 2)
    )
    if det <= 2.0 * 1e-12 * h2:
        raise ValueError(f"degenerate triangle (doubled area {det:.3e})")
    grads = np.array([
        [p1[1] - p2[1], p2[0] - p1[0]],
        [p2[1] - p0[1], p0[0] - p2[0]],
        [p0[1] - p1[1], p1[0] - p0[0]],
    ]) / det
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    lam1 = ((pts[:, 0] - p0[0]) * (p2[1] - p0[1]) - (pts[:, 1] - p0[1]) * (p2[0] - p0[0])) / det
    lam2 = ((p1[0] - p0[0]) * (pts[:, 1] - p0[1]) - (p1[1] - p0[1]) * (pts[:, 0] - p0[0])) / det
    values = np.column_stack([1.0 - lam1 - lam2, lam1, lam2])
    if np.ndim(x) == 1:
        return values[0], grads
    return values, grads


@dataclass
class DisplacementField:
    """Nodal P1 displacement on the third mesh; boundary nodes stay at zero."""

    third: ThirdMesh
    values: np.ndarray            # (n_nodes, 2)

    @classmethod
    def from_dof_vector(cls, dofs: DofMap, u: np.ndarray) -> "DisplacementField":
        values = np.zeros((len(dofs.third.nodes), 2))
        ns = dofs.n_u_scalar
        values[dofs.scalar_node, 0] = u[:ns]
        values[dofs.scalar_node, 1] = u[ns:]
        return cls(third=dofs.third, values=values)

    def dof_vector(self, dofs: DofMap) -> np.ndarray:
        return np.concatenate([
            self.values[dofs.scalar_node, 0], self.values[dofs.scalar_node, 1]
        ])


@dataclass
class PressureField:
    """One constant per dual volume."""

    third: ThirdMesh
    values: np.ndarray            # (n_volumes,)


def locate_triangle(third: ThirdMesh, x, tol: float = 1e-12) -> int:
    """Index of the first triangle containing ``x``; ties at interfaces go to
    the lowest owner index because triangles are stored grouped by owner."""
    pts = third.nodes[third.triangles]
    p0, p1, p2 = pts[:, 0], pts[:, 1], pts[:, 2]
    det = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) \
        - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
    l1 = ((x[0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
          - (x[1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])) / det
    l2 = ((p1[:, 0] - p0[:, 0]) * (x[1] - p0[:, 1])
          - (p1[:, 1] - p0[:, 1]) * (x[0] - p0[:, 0])) / det
    ok = (l1 >= -tol) & (l2 >= -tol) & (l1 + l2 <= 1.0 + tol)
    hits = np.nonzero(ok)[0]
    if len(hits) == 0:
        raise ValueError(f"point {tuple(x)} lies outside the meshed domain")
    return int(hits[0])


def eval_fields(u: DisplacementField, p: PressureField, x):
    """Evaluate (u_h, p_h) at one point by P1 interpolation on the owning triangle."""
    x = np.asarray(x, dtype=float)
    t = locate_triangle(u.third, x)
    tri = u.third.triangles[t]
    vals, _ = p1_shape(u.third.nodes[tri], x)
    uh = vals @ u.values[tri]
    ph = float(p.values[u.third.owner[t]])
    return uh, ph
