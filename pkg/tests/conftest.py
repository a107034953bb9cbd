import numpy as np
import pytest

import fecc


@pytest.fixture(scope="session")
def quads2():
    """2x2 unit-square quads with dual, third mesh and dof map."""
    primal = fecc.generate_structured_quads(2, 2, 0.0)
    dual = fecc.build_dual(primal)
    third = fecc.build_third(primal, dual)
    dofs = fecc.classify_nodes(third, dual)
    return primal, dual, third, dofs


@pytest.fixture(scope="session")
def quads1():
    primal = fecc.generate_structured_quads(1, 1, 0.0)
    dual = fecc.build_dual(primal)
    third = fecc.build_third(primal, dual)
    dofs = fecc.classify_nodes(third, dual)
    return primal, dual, third, dofs


def build_chain(primal):
    dual = fecc.build_dual(primal)
    third = fecc.build_third(primal, dual)
    dofs = fecc.classify_nodes(third, dual)
    return primal, dual, third, dofs


def make_mesh(generator, n, perturb=0.0, seed=7):
    if generator == "quads":
        return fecc.generate_structured_quads(n, n, 0.0)
    if generator == "perturbed":
        return fecc.generate_structured_quads(n, n, perturb or 0.2, seed=seed)
    if generator == "triangles":
        return fecc.generate_structured_triangles(n, n)
    raise ValueError(generator)


def shoelace(loop):
    """Independent polygon-area oracle."""
    a = 0.0
    k = len(loop)
    for i in range(k):
        x0, y0 = loop[i]
        x1, y1 = loop[(i + 1) % k]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def f_const(fx, fy):
    def f(pts):
        return np.column_stack([np.full(len(pts), float(fx)),
                                np.full(len(pts), float(fy))])
    return f


def f_zero(pts):
    return np.zeros_like(pts)
