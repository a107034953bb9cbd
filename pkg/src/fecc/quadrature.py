"""Symmetric quadrature rules on the reference triangle.

Each rule is a pair ``(bary, weights)`` with barycentric points of shape
``(nq, 3)`` and weights summing to 1, so that for a physical triangle T

    int_T f dx  ~=  area(T) * sum_q w_q f(x_q),   x_q = bary_q @ vertices(T).
"""

from __future__ import annotations

import numpy as np


def _permute3(a: float, b: float, c: float) -> np.ndarray:
    return np.array(
        [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
    )


def _cyclic3(a: float, b: float) -> np.ndarray:
    c = 1.0 - a - b
    return np.array([[a, b, c], [c, a, b], [b, c, a]])


# Degree 2: midpoints of the edges, exact for quadratics.
_MIDPOINT_BARY = np.array(
    [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]
)
_MIDPOINT_W = np.full(3, 1.0 / 3.0)

# Degree 4, 6 points (Dunavant rule 4).
_D4_A = 0.445948490915965
_D4_B = 0.091576213509771
_D4_BARY = np.vstack(
    [_cyclic3(1.0 - 2.0 * _D4_A, _D4_A), _cyclic3(1.0 - 2.0 * _D4_B, _D4_B)]
)
_D4_W = np.concatenate(
    [np.full(3, 0.223381589678011), np.full(3, 0.109951743655322)]
)

# Degree 6, 12 points (Dunavant rule 6).
_D6_BARY = np.vstack(
    [
        _cyclic3(0.501426509658179, 0.249286745170910),
        _cyclic3(0.873821971016996, 0.063089014491502),
        _permute3(0.053145049844817, 0.310352451033784, 0.636502499121399),
    ]
)
_D6_W = np.concatenate(
    [
        np.full(3, 0.116786275726379),
        np.full(3, 0.050844906370207),
        np.full(6, 0.082851075618374),
    ]
)

_RULES = {
    2: (_MIDPOINT_BARY, _MIDPOINT_W),
    4: (_D4_BARY, _D4_W),
    6: (_D6_BARY, _D6_W),
}


def triangle_rule(degree: int):
    """Return ``(bary, weights)`` for the smallest stocked rule of at least ``degree``."""
    for deg in sorted(_RULES):
        if deg >= degree:
            return _RULES[deg]
    raise ValueError(f"no triangle rule of degree >= {degree} (have {sorted(_RULES)})")
