"""Numerical stability constants and one instructive degeneracy.

Two numbers decide the quality of a mixed pair: the coercivity constant of
the stiffness on the divergence-free kernel and the inf-sup constant
pairing pressures with displacements.  Both are computed here by dense
generalized eigensolves and stay essentially flat under refinement.

The scan runs on triangulated meshes for a reason that is worth seeing
once: a perfectly uniform quad lattice admits a single checkerboard-like
pressure mode that no discrete displacement can feel.  The mode is benign
in practice (it never enters a computed solution, and any perturbation of
the lattice removes it), but it sends the raw inf-sup constant to zero on
exactly-uniform grids.  Local macroelement checks cannot see this: every
dual volume passes its one-dimensionality test on every mesh.
"""

import numpy as np

import fecc
from fecc.assembly import assemble_B

levels = [4, 8, 16]
res = fecc.stability_scan(levels, generator="triangles")
print("triangulated meshes:")
for n, b, a in zip(res.levels, res.beta, res.alpha):
    print(f"  level {n:>2}: inf-sup beta = {b:.5f}, kernel coercivity alpha = {a:.5f}")
print(f"  beta max/min = {max(res.beta)/min(res.beta):.4f}, "
      f"alpha max/min = {max(res.alpha)/min(res.alpha):.4f}")

print("\nmacroelement condition (dim of invisible local pressure modes):")
for gen in ("quads", "triangles"):
    if gen == "quads":
        primal = fecc.generate_structured_quads(4, 4, 0.0)
    else:
        primal = fecc.generate_structured_triangles(4, 4)
    dual = fecc.build_dual(primal)
    third = fecc.build_third(primal, dual)
    dofs = fecc.classify_nodes(third, dual)
    dims = {fecc.macroelement_nullspace_dim(v, third, dofs)
            for v in range(dual.n_volumes)}
    B = assemble_B(third, dual, dofs).toarray()
    null_dim = B.shape[0] - np.linalg.matrix_rank(B)
    print(f"  {gen:>9}: local dims = {sorted(dims)}, "
          f"global pressure modes invisible to V_h = {null_dim} "
          f"({'constant only' if null_dim == 1 else 'constant + checkerboard'})")
