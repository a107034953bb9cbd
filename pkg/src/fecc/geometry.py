"""Small planar-geometry helpers shared by the mesh and assembly layers."""

from __future__ import annotations

import numpy as np


def polygon_signed_area(loop: np.ndarray) -> float:
    """Shoelace signed area of a closed polygon given as an (n, 2) vertex loop."""
    x = loop[:, 0]
    y = loop[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_area(loop: np.ndarray) -> float:
    return abs(polygon_signed_area(loop))


def polygon_centroid(loop: np.ndarray) -> np.ndarray:
    """Area centroid of a simple polygon; falls back to the vertex mean when degenerate."""
    x = loop[:, 0]
    y = loop[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    if abs(a) < 1e-300:
        return loop.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def polygon_diameter(loop: np.ndarray) -> float:
    """Bounding-box diagonal; a cheap upper bound on the true diameter."""
    span = loop.max(axis=0) - loop.min(axis=0)
    return float(np.hypot(span[0], span[1]))


def point_in_kernel(loop: np.ndarray, point: np.ndarray, tol: float = 0.0) -> bool:
    """True when ``point`` sees the whole CCW polygon boundary (kernel membership).

    The kernel of a simple CCW polygon is the intersection of the inner
    half-planes of its edges; membership requires the point strictly to the
    left of every directed edge (up to ``tol``).
    """
    a = loop
    b = np.roll(loop, -1, axis=0)
    cross = (b[:, 0] - a[:, 0]) * (point[1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (point[0] - a[:, 0])
    return bool(np.all(cross > tol))


def points_in_polygon(points: np.ndarray, loop: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Vectorized crossing-number test for many points against one polygon loop.

    Points within ``tol`` of the boundary count as inside.
    """
    pts = np.atleast_2d(points)
    a = loop
    b = np.roll(loop, -1, axis=0)
    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    ay, by = a[:, 1][None, :], b[:, 1][None, :]
    ax, bx = a[:, 0][None, :], b[:, 0][None, :]
    straddles = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
    crossings = np.sum(straddles & (px < x_cross), axis=1)
    inside = (crossings % 2) == 1
    if tol > 0.0:
        inside |= _near_segments(pts, a, b, tol)
    return inside


def _near_segments(pts, a, b, tol):
    """True per point when within ``tol`` of any segment a[j]-b[j]."""
    d = b - a  # (m, 2)
    len2 = np.maximum((d * d).sum(axis=1), 1e-300)
    vx = pts[:, 0][:, None] - a[:, 0][None, :]
    vy = pts[:, 1][:, None] - a[:, 1][None, :]
    t = np.clip((vx * d[:, 0] + vy * d[:, 1]) / len2, 0.0, 1.0)
    dx = vx - t * d[:, 0]
    dy = vy - t * d[:, 1]
    return np.any(dx * dx + dy * dy <= tol * tol, axis=1)


def triangle_geometry(nodes: np.ndarray, triangles: np.ndarray):
    """Areas and constant P1 hat gradients for a batch of CCW triangles.

    Returns ``(areas, grads)`` with shapes ``(nt,)`` and ``(nt, 3, 2)`` where
    ``grads[t, i]`` is the gradient of the hat function of local vertex ``i``.
    """
    x = nodes[triangles]  # (nt, 3, 2)
    d = np.empty_like(x)
    d[:, 0] = x[:, 2] - x[:, 1]
    d[:, 1] = x[:, 0] - x[:, 2]
    d[:, 2] = x[:, 1] - x[:, 0]
    det = d[:, 2, 0] * (-d[:, 1, 1]) - d[:, 2, 1] * (-d[:, 1, 0])
    grads = np.empty_like(d)
    grads[:, :, 0] = -d[:, :, 1] / det[:, None]
    grads[:, :, 1] = d[:, :, 0] / det[:, None]
    return 0.5 * det, grads
