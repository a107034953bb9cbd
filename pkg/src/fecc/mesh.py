"""Primal polygonal mesh, vertex-centered dual volumes, and the fanned third mesh.

The construction is staged:

1. a *primal* mesh of star-shaped polygonal cells, each with an interior
   mesh point ``C_K`` (the cell centroid by default);
2. a *dual* mesh with one control volume per primal vertex, obtained by
   joining the mesh points of the cells incident to the vertex (boundary
   volumes additionally pass through the vertex itself and the midpoints
   of its two boundary edges);
3. a *third* triangular mesh obtained by fanning every dual volume from
   its center, which is always chosen as the associated primal vertex, so
   each volume is literally the union of its fan triangles.

All three meshes are immutable after construction (arrays are marked
read-only) and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    point_in_kernel,
    points_in_polygon,
    polygon_area,
    polygon_centroid,
    polygon_diameter,
    polygon_signed_area,
)

PARTITION_RTOL = 1e-12        # relative tolerance for area-partition identities
JOINING_LINE_SAMPLES = 16     # samples per mesh-point segment in validate_primal


class MeshConstructionError(ValueError):
    """Raised when a mesh cannot be built (degenerate or non-manifold input)."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass
class PrimalMesh:
    """Polygonal cells covering the domain, with one mesh point per cell."""

    vertices: np.ndarray          # (n_v, 2) float
    cells: list                   # list of (k,) int arrays, CCW vertex loops
    cell_points: np.ndarray       # (n_c, 2) float, strictly inside each cell
    boundary_edges: np.ndarray    # (n_be, 2) int, directed as traversed by the owning cell

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_cells(self) -> int:
        return len(self.cells)


@dataclass
class DualMesh:
    """One control volume per primal vertex.

    ``loops`` holds coordinate polygons (CCW); ``refs`` the same loops as
    symbolic nodes ``('v', vertex)``, ``('c', cell)`` or ``('m', boundary
    edge)`` so the third mesh can share node identities exactly.
    """

    loops: list                   # list of (k, 2) float arrays
    refs: list                    # list of [(kind, index), ...]
    centers: np.ndarray           # (n_v, 2); the associated primal vertex
    is_boundary: np.ndarray       # (n_v,) bool
    incident_cells: list          # list of (m,) int arrays in cyclic order
    boundary_edge_midpoints: dict  # vertex -> (2, 2) array, midpoints of its two boundary edges
    areas: np.ndarray             # (n_v,)

    @property
    def n_volumes(self) -> int:
        return len(self.loops)

    # Backwards-friendly alias: a volume is its loop.
    @property
    def volumes(self) -> list:
        return self.loops


@dataclass
class ThirdMesh:
    """Triangles fanned from each dual-volume center.

    Nodes are ordered primal vertices, then cell points, then boundary-edge
    midpoints, so classification is an index-range lookup.
    """

    nodes: np.ndarray             # (n_n, 2)
    triangles: np.ndarray         # (n_t, 3) int, CCW
    owner: np.ndarray             # (n_t,) owning dual volume (= primal vertex index)
    n_primal_vertices: int
    n_primal_cells: int


@dataclass
class ValidationFailure:
    kind: str                     # 'star_shape' | 'coverage' | 'edge_sharing' | 'joining_line' | 'boundary_loop'
    where: object                 # cell index, edge pair, ...
    message: str


@dataclass
class ValidationReport:
    ok: bool
    failures: list = field(default_factory=list)
    domain_area: float = 0.0
    cell_area_sum: float = 0.0

    def by_kind(self, kind: str) -> list:
        return [f for f in self.failures if f.kind == kind]


# ---------------------------------------------------------------------------
# construction helpers
# ---------------------------------------------------------------------------

def _edge_key(a: int, b: int):
    return (a, b) if a < b else (b, a)


def _edge_cell_map(cells):
    """Map undirected edge -> list of (cell, directed a, b) incidences."""
    edges = {}
    for c, poly in enumerate(cells):
        k = len(poly)
        for j in range(k):
            a, b = int(poly[j]), int(poly[(j + 1) % k])
            edges.setdefault(_edge_key(a, b), []).append((c, a, b))
    return edges


def _boundary_edges_from_cells(cells) -> np.ndarray:
    edges = _edge_cell_map(cells)
    bnd = [(a, b) for key, inc in edges.items() if len(inc) == 1 for (_, a, b) in inc]
    bnd.sort()
    return np.asarray(bnd, dtype=np.int64).reshape(-1, 2)


def _domain_loop(vertices: np.ndarray, boundary_edges: np.ndarray) -> np.ndarray:
    """Chain the directed boundary edges into the single CCW loop of the domain."""
    succ = {int(a): int(b) for a, b in boundary_edges}
    if len(succ) != len(boundary_edges):
        raise MeshConstructionError("boundary is not a single simple loop")
    start = int(boundary_edges[0, 0])
    loop = [start]
    cur = succ[start]
    while cur != start:
        loop.append(cur)
        if len(loop) > len(boundary_edges):
            raise MeshConstructionError("boundary loop does not close")
        cur = succ[cur]
    if len(loop) != len(boundary_edges):
        raise MeshConstructionError("boundary has more than one loop")
    return vertices[loop]


def make_primal(vertices, cells, cell_points=None, check: bool = True) -> PrimalMesh:
    """Assemble a :class:`PrimalMesh`, defaulting mesh points to cell centroids.

    With ``check=True`` every cell point must see the whole boundary of its
    (CCW) cell; a centroid that fails this star-shapedness test aborts the
    construction with a diagnostic.
    """
    vertices = np.asarray(vertices, dtype=float)
    cells = [np.asarray(c, dtype=np.int64) for c in cells]
    loops = [vertices[c] for c in cells]
    if cell_points is None:
        cell_points = np.array([polygon_centroid(loop) for loop in loops])
    else:
        cell_points = np.asarray(cell_points, dtype=float)
    if check:
        bad = []
        for i, loop in enumerate(loops):
            sa = polygon_signed_area(loop)
            if sa <= 0.0:
                bad.append((i, "not counterclockwise or degenerate"))
                continue
            if not point_in_kernel(loop, cell_points[i]):
                bad.append((i, "mesh point does not see the whole cell boundary"))
        if bad:
            detail = "; ".join(f"cell {i}: {msg}" for i, msg in bad[:5])
            raise MeshConstructionError(f"{len(bad)} invalid cell(s): {detail}")
    mesh = PrimalMesh(
        vertices=_freeze(vertices),
        cells=[_freeze(c) for c in cells],
        cell_points=_freeze(cell_points),
        boundary_edges=_freeze(_boundary_edges_from_cells(cells)),
    )
    return mesh


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def generate_structured_quads(nx: int, ny: int, perturb: float = 0.0, seed: int = 0) -> PrimalMesh:
    """nx-by-ny quadrilateral mesh of the unit square.

    Interior vertices are displaced by at most ``perturb * h`` (h the grid
    spacing) with a seeded generator; ``perturb`` must lie in [0, 0.3), which
    keeps every perturbed quad strictly convex and hence star-shaped.
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    if not 0.0 <= perturb < 0.3:
        raise ValueError(f"perturb must lie in [0, 0.3), got {perturb}")
    xs = np.linspace(0.0, 1.0, nx + 1)
    ys = np.linspace(0.0, 1.0, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    if perturb > 0.0 and nx > 1 and ny > 1:
        h = min(1.0 / nx, 1.0 / ny)
        II, JJ = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
        interior = ((II > 0) & (II < nx) & (JJ > 0) & (JJ < ny)).ravel()
        rng = np.random.default_rng(seed)
        u = rng.random((int(interior.sum()), 2))
        radius = perturb * h * np.sqrt(u[:, 0])
        theta = 2.0 * np.pi * u[:, 1]
        vertices[interior, 0] += radius * np.cos(theta)
        vertices[interior, 1] += radius * np.sin(theta)

    def vid(i, j):
        return j * (nx + 1) + i

    cells = []
    for j in range(ny):
        for i in range(nx):
            cells.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)])
    return make_primal(vertices, cells)


def generate_structured_triangles(nx: int, ny: int) -> PrimalMesh:
    """Unit-square grid with each square split along its SW-NE diagonal."""
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    xs = np.linspace(0.0, 1.0, nx + 1)
    ys = np.linspace(0.0, 1.0, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    cells = []
    for j in range(ny):
        for i in range(nx):
            cells.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)])
            cells.append([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)])
    return make_primal(vertices, cells)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_primal(mesh: PrimalMesh) -> ValidationReport:
    """Check star-shapedness, coverage/conformity, and the joining-line condition.

    The joining-line condition requires the segment between the mesh points
    of every pair of edge-adjacent cells to stay inside the domain; it is
    checked by sampling each segment against the domain boundary loop.
    Failures are collected, never raised.
    """
    failures = []

    loops = [mesh.vertices[c] for c in mesh.cells]
    for i, loop in enumerate(loops):
        sa = polygon_signed_area(loop)
        if sa <= 0.0:
            failures.append(ValidationFailure(
                "star_shape", i, f"cell {i} has non-positive signed area {sa:.3e}"))
            continue
        if not point_in_kernel(loop, mesh.cell_points[i]):
            failures.append(ValidationFailure(
                "star_shape", i, f"cell {i}: mesh point not in the polygon kernel"))

    edges = _edge_cell_map(mesh.cells)
    for key, inc in edges.items():
        if len(inc) > 2:
            failures.append(ValidationFailure(
                "edge_sharing", key, f"edge {key} shared by {len(inc)} cells"))

    domain_area = 0.0
    cell_area_sum = float(sum(polygon_area(loop) for loop in loops))
    try:
        domain = _domain_loop(mesh.vertices, mesh.boundary_edges)
        domain_area = polygon_area(domain)
    except MeshConstructionError as exc:
        failures.append(ValidationFailure("boundary_loop", None, str(exc)))
        domain = None

    if domain is not None:
        if abs(cell_area_sum - domain_area) > PARTITION_RTOL * max(domain_area, 1.0):
            failures.append(ValidationFailure(
                "coverage", None,
                f"sum of cell areas {cell_area_sum!r} != domain area {domain_area!r}"))

        # joining-line condition on every interior edge
        pairs = [tuple(sorted({c for c, _, _ in inc}))
                 for inc in edges.values() if len(inc) == 2]
        pairs = sorted({p for p in pairs if len(p) == 2})
        if pairs:
            t = np.linspace(0.0, 1.0, JOINING_LINE_SAMPLES)
            p0 = mesh.cell_points[[a for a, _ in pairs]]
            p1 = mesh.cell_points[[b for _, b in pairs]]
            samples = p0[:, None, :] + t[None, :, None] * (p1 - p0)[:, None, :]
            tol = 1e-12 * max(polygon_diameter(domain), 1.0)
            inside = points_in_polygon(samples.reshape(-1, 2), domain, tol=tol)
            inside = inside.reshape(len(pairs), JOINING_LINE_SAMPLES)
            for idx in np.nonzero(~inside.all(axis=1))[0]:
                a, b = pairs[idx]
                failures.append(ValidationFailure(
                    "joining_line", (a, b),
                    f"segment between mesh points of cells {a} and {b} leaves the domain"))

    return ValidationReport(
        ok=not failures,
        failures=failures,
        domain_area=domain_area,
        cell_area_sum=cell_area_sum,
    )


# ---------------------------------------------------------------------------
# dual mesh
# ---------------------------------------------------------------------------

def build_dual(primal: PrimalMesh) -> DualMesh:
    """Construct the vertex-centered dual volumes of a valid primal mesh.

    Interior vertices: the loop runs through the mesh points of the incident
    cells in cyclic (angular) order.  Boundary vertices: the loop starts at
    the vertex itself, passes the midpoint of one incident boundary edge,
    the incident mesh points, and the midpoint of the other boundary edge.
    Every volume keeps the associated vertex as its center.
    """
    n_v = primal.n_vertices
    vert_cells = [[] for _ in range(n_v)]
    for c, poly in enumerate(primal.cells):
        for v in poly:
            vert_cells[int(v)].append(c)

    edges = _edge_cell_map(primal.cells)
    # cells sharing an edge through vertex i: adjacency used to verify cyclic order
    vert_edge_cells = [[] for _ in range(n_v)]
    for key, inc in edges.items():
        cells_here = sorted({c for c, _, _ in inc})
        for v in key:
            vert_edge_cells[v].append((key, cells_here))

    bedge_of_vertex = [[] for _ in range(n_v)]
    for e, (a, b) in enumerate(primal.boundary_edges):
        bedge_of_vertex[int(a)].append(e)
        bedge_of_vertex[int(b)].append(e)
    is_boundary = np.array([len(b) > 0 for b in bedge_of_vertex])

    def _adjacent(i, c1, c2):
        return any(set(cells) == {c1, c2} for _, cells in vert_edge_cells[i])

    def _owns_bedge(c, e):
        a, b = primal.boundary_edges[e]
        return len(edges[_edge_key(int(a), int(b))]) == 1 and \
            edges[_edge_key(int(a), int(b))][0][0] == c

    loops = []
    refs = []
    incident = []
    bmid = {}
    areas = np.empty(n_v)

    for i in range(n_v):
        ci = vert_cells[i]
        if not ci:
            raise MeshConstructionError(f"vertex {i} belongs to no cell")
        pts = primal.cell_points[ci]
        ang = np.arctan2(pts[:, 1] - primal.vertices[i, 1], pts[:, 0] - primal.vertices[i, 0])

        if not is_boundary[i]:
            order = np.argsort(ang, kind="stable")
            seq = [ci[k] for k in order]
            start = int(np.argmin(seq))
            seq = seq[start:] + seq[:start]
            for a, b in zip(seq, seq[1:] + seq[:1]):
                if not _adjacent(i, a, b):
                    raise MeshConstructionError(
                        f"ambiguous cyclic ordering of cells around interior vertex {i}")
            ref = [("c", c) for c in seq]
        else:
            if len(bedge_of_vertex[i]) != 2:
                raise MeshConstructionError(
                    f"boundary vertex {i} lies on {len(bedge_of_vertex[i])} boundary edges")
            eE, eF = bedge_of_vertex[i]
            mids = 0.5 * (primal.vertices[primal.boundary_edges[[eE, eF], 0]]
                          + primal.vertices[primal.boundary_edges[[eE, eF], 1]])
            thE, thF = (np.arctan2(m[1] - primal.vertices[i, 1], m[0] - primal.vertices[i, 0])
                        for m in mids)
            twopi = 2.0 * np.pi
            dF = (thF - thE) % twopi
            dk = (ang - thE) % twopi
            if np.all((dk > 0.0) & (dk < dF)):
                order = np.argsort(dk, kind="stable")
                first, last = eE, eF
            elif np.all((dk > dF) & (dk < twopi)):
                order = np.argsort((ang - thF) % twopi, kind="stable")
                first, last = eF, eE
            else:
                raise MeshConstructionError(
                    f"ambiguous cyclic ordering of cells around boundary vertex {i}")
            seq = [ci[k] for k in order]
            for a, b in zip(seq[:-1], seq[1:]):
                if not _adjacent(i, a, b):
                    raise MeshConstructionError(
                        f"ambiguous cyclic ordering of cells around boundary vertex {i}")
            if not (_owns_bedge(seq[0], first) and _owns_bedge(seq[-1], last)):
                raise MeshConstructionError(
                    f"boundary-edge fan mismatch at vertex {i}")
            ref = [("v", i), ("m", first)] + [("c", c) for c in seq] + [("m", last)]
            bmid[i] = 0.5 * (primal.vertices[primal.boundary_edges[[first, last], 0]]
                             + primal.vertices[primal.boundary_edges[[first, last], 1]])

        loop = np.array([_ref_coord(primal, kind, idx) for kind, idx in ref])
        sa = polygon_signed_area(loop)
        if sa <= 0.0:
            raise MeshConstructionError(f"dual volume of vertex {i} is not counterclockwise")
        loops.append(_freeze(loop))
        refs.append(ref)
        incident.append(_freeze(np.array(seq, dtype=np.int64)))
        areas[i] = sa

    return DualMesh(
        loops=loops,
        refs=refs,
        centers=_freeze(primal.vertices.copy()),
        is_boundary=_freeze(is_boundary),
        incident_cells=incident,
        boundary_edge_midpoints={i: _freeze(m) for i, m in bmid.items()},
        areas=_freeze(areas),
    )


def _ref_coord(primal: PrimalMesh, kind: str, idx: int) -> np.ndarray:
    if kind == "v":
        return primal.vertices[idx]
    if kind == "c":
        return primal.cell_points[idx]
    a, b = primal.boundary_edges[idx]
    return 0.5 * (primal.vertices[a] + primal.vertices[b])


# ---------------------------------------------------------------------------
# third mesh
# ---------------------------------------------------------------------------

def build_third(primal: PrimalMesh, dual: DualMesh) -> ThirdMesh:
    """Fan every dual volume from its center into triangles.

    The fan skips the loop edges that contain the center itself (the two
    edges meeting the vertex of a boundary volume), so each triangle has the
    center as exactly one vertex and its opposite edge on the volume boundary.
    """
    n_v = primal.n_vertices
    n_c = primal.n_cells
    n_be = len(primal.boundary_edges)
    mids = 0.5 * (primal.vertices[primal.boundary_edges[:, 0]]
                  + primal.vertices[primal.boundary_edges[:, 1]]) if n_be else np.zeros((0, 2))
    nodes = np.vstack([primal.vertices, primal.cell_points, mids])

    def node_id(kind, idx):
        if kind == "v":
            return idx
        if kind == "c":
            return n_v + idx
        return n_v + n_c + idx

    triangles = []
    owner = []
    for i in range(n_v):
        ref = dual.refs[i]
        ids = [node_id(kind, idx) for kind, idx in ref]
        center = node_id("v", i)
        loop = dual.loops[i]
        tol = 1e-12 * polygon_diameter(loop) ** 2
        k = len(ids)
        for j in range(k):
            a, b = ids[j], ids[(j + 1) % k]
            if a == center or b == center:
                continue
            area2 = _signed_area2(nodes[center], nodes[a], nodes[b])
            if area2 <= 2.0 * tol:
                raise MeshConstructionError(
                    f"degenerate fan triangle in dual volume {i} (area {0.5 * area2:.3e})")
            triangles.append((center, a, b))
            owner.append(i)

    return ThirdMesh(
        nodes=_freeze(nodes),
        triangles=_freeze(np.array(triangles, dtype=np.int64)),
        owner=_freeze(np.array(owner, dtype=np.int64)),
        n_primal_vertices=n_v,
        n_primal_cells=n_c,
    )


def _signed_area2(p, q, r) -> float:
    return float((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))


def triangle_areas(third: ThirdMesh) -> np.ndarray:
    x = third.nodes[third.triangles]
    return 0.5 * ((x[:, 1, 0] - x[:, 0, 0]) * (x[:, 2, 1] - x[:, 0, 1])
                  - (x[:, 1, 1] - x[:, 0, 1]) * (x[:, 2, 0] - x[:, 0, 0]))


def domain_loop(primal: PrimalMesh) -> np.ndarray:
    """The CCW boundary polygon of the meshed domain."""
    return _domain_loop(primal.vertices, primal.boundary_edges)
