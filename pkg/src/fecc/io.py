"""File formats: FECCMESH text meshes, legacy VTK exports, CSV reports.

FECCMESH grammar (plain text, one record per line, '#' comments and blank
lines ignored)::

    FECCMESH 1
    <n_vertices>
    <x> <y>                      # n_vertices lines, 17 significant digits
    <n_cells>
    <k> <i_0> ... <i_{k-1}>      # n_cells lines, 0-based CCW vertex indices
    CELLPOINTS                   # optional section overriding centroids
    <x> <y>                      # n_cells lines

Clockwise polygons are reversed with a warning.  Coordinates are written
with 17 significant digits so parse(write(mesh)) reproduces every float bit
for bit.  Reports use 12 significant digits and carry a schema-version
comment line so downstream tooling stays stable.
"""

from __future__ import annotations

import warnings

import numpy as np

from .geometry import polygon_signed_area
from .mesh import PrimalMesh, ThirdMesh, make_primal, validate_primal
from .spaces import DisplacementField, PressureField

CSV_SCHEMA = "fecc-csv v1"


class MeshFileError(ValueError):
    """Malformed mesh file; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_mesh(mesh: PrimalMesh, path) -> None:
    lines = ["FECCMESH 1", str(mesh.n_vertices)]
    lines += [f"{_fmt(x)} {_fmt(y)}" for x, y in mesh.vertices]
    lines.append(str(mesh.n_cells))
    lines += [f"{len(c)} " + " ".join(str(i) for i in c) for c in mesh.cells]
    lines.append("CELLPOINTS")
    lines += [f"{_fmt(x)} {_fmt(y)}" for x, y in mesh.cell_points]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path) -> PrimalMesh:
    """Parse and validate a FECCMESH document.

    Parse errors raise :class:`MeshFileError` with the offending line;
    semantic validation failures (star-shapedness, coverage, joining lines)
    raise it with a summary of the failed checks.
    """
    with open(path) as fh:
        raw = fh.readlines()
    records = [(i + 1, ln.strip()) for i, ln in enumerate(raw)
               if ln.strip() and not ln.strip().startswith("#")]
    pos = 0

    def take(what: str):
        nonlocal pos
        if pos >= len(records):
            raise MeshFileError(f"unexpected end of file, expected {what}",
                                records[-1][0] if records else 1)
        rec = records[pos]
        pos += 1
        return rec

    line_no, header = take("header")
    if header != "FECCMESH 1":
        raise MeshFileError(f"bad header {header!r}, expected 'FECCMESH 1'", line_no)

    line_no, text = take("vertex count")
    n_v = _parse_count(text, "vertex count", line_no)
    vertices = np.empty((n_v, 2))
    for i in range(n_v):
        line_no, text = take("vertex coordinates")
        vertices[i] = _parse_floats(text, 2, line_no)

    line_no, text = take("cell count")
    n_c = _parse_count(text, "cell count", line_no)
    cells = []
    cell_lines = []
    for _ in range(n_c):
        line_no, text = take("cell record")
        parts = text.split()
        try:
            k = int(parts[0])
            idx = [int(p) for p in parts[1:]]
        except ValueError:
            raise MeshFileError(f"cell record is not integers: {text!r}", line_no)
        if k < 3 or len(idx) != k:
            raise MeshFileError(f"cell record announces {parts[0]} vertices, has {len(idx)}",
                                line_no)
        if len(set(idx)) != k:
            raise MeshFileError("cell repeats a vertex (non-simple polygon)", line_no)
        for i in idx:
            if not 0 <= i < n_v:
                raise MeshFileError(f"vertex index {i} out of range [0, {n_v})", line_no)
        cells.append(idx)
        cell_lines.append(line_no)

    cell_points = None
    if pos < len(records):
        line_no, text = take("CELLPOINTS")
        if text != "CELLPOINTS":
            raise MeshFileError(f"unexpected trailing record {text!r}", line_no)
        cell_points = np.empty((n_c, 2))
        for i in range(n_c):
            line_no, text = take("cell point coordinates")
            cell_points[i] = _parse_floats(text, 2, line_no)
    if pos < len(records):
        raise MeshFileError(f"unexpected trailing record {records[pos][1]!r}",
                            records[pos][0])

    for i, idx in enumerate(cells):
        loop = vertices[idx]
        sa = polygon_signed_area(loop)
        if sa == 0.0 or _self_intersects(loop):
            raise MeshFileError("non-simple polygon", cell_lines[i])
        if sa < 0.0:
            warnings.warn(f"cell {i} is clockwise; reversing", stacklevel=2)
            cells[i] = idx[::-1]

    try:
        mesh = make_primal(vertices, cells, cell_points=cell_points)
    except ValueError as exc:
        raise MeshFileError(str(exc)) from exc
    report = validate_primal(mesh)
    if not report.ok:
        summary = "; ".join(f.message for f in report.failures[:5])
        raise MeshFileError(f"mesh fails validation: {summary}")
    return mesh


def _parse_count(text: str, what: str, line_no: int) -> int:
    try:
        n = int(text)
    except ValueError:
        raise MeshFileError(f"bad {what}: {text!r}", line_no)
    if n < 1:
        raise MeshFileError(f"{what} must be positive, got {n}", line_no)
    return n


def _parse_floats(text: str, k: int, line_no: int) -> list:
    parts = text.split()
    if len(parts) != k:
        raise MeshFileError(f"expected {k} numbers, got {len(parts)}", line_no)
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise MeshFileError(f"bad number in {text!r}", line_no)


def _self_intersects(loop: np.ndarray) -> bool:
    """O(k^2) proper-crossing test between non-adjacent polygon edges."""
    k = len(loop)

    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    for i in range(k):
        a, b = loop[i], loop[(i + 1) % k]
        for j in range(i + 1, k):
            if j == i or (j + 1) % k == i or (i + 1) % k == j:
                continue
            c, d = loop[j], loop[(j + 1) % k]
            if (orient(a, b, c) * orient(a, b, d) < 0
                    and orient(c, d, a) * orient(c, d, b) < 0):
                return True
    return False


# ---------------------------------------------------------------------------
# VTK export
# ---------------------------------------------------------------------------

def export_vtk(third: ThirdMesh, u: DisplacementField, p: PressureField, path) -> None:
    """Legacy-text unstructured grid: triangles, point vectors u, cell scalars p.

    Each triangle carries the pressure of its owning dual volume.
    """
    nt = len(third.triangles)
    nn = len(third.nodes)
    out = [
        "# vtk DataFile Version 3.0",
        "fecc displacement/pressure fields",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {nn} double",
    ]
    out += [f"{_fmt(x)} {_fmt(y)} 0" for x, y in third.nodes]
    out.append(f"CELLS {nt} {4 * nt}")
    out += [f"3 {a} {b} {c}" for a, b, c in third.triangles]
    out.append(f"CELL_TYPES {nt}")
    out += ["5"] * nt
    out.append(f"POINT_DATA {nn}")
    out.append("VECTORS displacement double")
    out += [f"{_fmt(ux)} {_fmt(uy)} 0" for ux, uy in u.values]
    out.append(f"CELL_DATA {nt}")
    out.append("SCALARS pressure double 1")
    out.append("LOOKUP_TABLE default")
    out += [_fmt(p.values[m]) for m in third.owner]
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# CSV reports
# ---------------------------------------------------------------------------

def _fmt12(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.12g}"


def write_csv(kind: str, columns, rows, path, footer=()) -> None:
    """Write a schema-versioned CSV report; numeric cells get 12 digits."""
    lines = [f"# {CSV_SCHEMA} {kind}", ",".join(columns)]
    lines += [",".join(_fmt12(v) for v in row) for row in rows]
    lines += [f"# {text}" for text in footer]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def convergence_csv(report, path) -> None:
    """One row per (nu, level) plus a fitted-rate footer."""
    rows = [(r.nu, r.level, r.h, r.n_u, r.n_p, r.l2_u, r.h1_u, r.l2_p)
            for r in report.rows]
    footer = []
    for nu in report.nus:
        ra, co = report.rates[nu], report.constants[nu]
        footer.append(
            f"rates nu={_fmt12(nu)} l2_u={_fmt12(ra['l2_u'])} "
            f"h1_u={_fmt12(ra['h1_u'])} l2_p={_fmt12(ra['l2_p'])} "
            f"const_h1_u={_fmt12(co['h1_u'])}")
    write_csv("convergence", ("nu", "level", "h", "n_u", "n_p", "l2_u", "h1_u", "l2_p"),
              rows, path, footer=footer)


def infsup_csv(result, path) -> None:
    rows = [(n, 1.0 / n, b, a)
            for n, b, a in zip(result.levels, result.beta, result.alpha)]
    write_csv("infsup", ("level", "h", "beta", "alpha"), rows, path)


def locking_csv(rows, path) -> None:
    data = [(r.nu, r.level, r.h, r.l2_u_mixed, r.l2_u_baseline, r.ratio)
            for r in rows]
    write_csv("locking", ("nu", "level", "h", "l2_u_mixed", "l2_u_baseline", "ratio"),
              data, path)
