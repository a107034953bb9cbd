"""The three-mesh construction, step by step.

Starting from a perturbed quadrilateral mesh we build the vertex-centered
dual volumes and the fanned third mesh, then draw all three on top of each
other.  Interior dual volumes connect the mesh points of the cells around a
vertex; boundary volumes additionally pass through the vertex itself and
the midpoints of its two boundary edges.
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import fecc

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

primal = fecc.generate_structured_quads(4, 4, perturb=0.18, seed=7)
dual = fecc.build_dual(primal)
third = fecc.build_third(primal, dual)

report = fecc.validate_primal(primal)
print(f"primal mesh: {primal.n_cells} cells, {primal.n_vertices} vertices, "
      f"valid={report.ok}")
print(f"dual mesh:   {dual.n_volumes} control volumes "
      f"({int((~dual.is_boundary).sum())} interior)")
print(f"third mesh:  {len(third.triangles)} triangles on {len(third.nodes)} nodes")
print(f"area checks: cells {report.cell_area_sum:.15f}, "
      f"dual {dual.areas.sum():.15f}, "
      f"third {fecc.triangle_areas(third).sum():.15f}")

fig, axes = plt.subplots(1, 3, figsize=(15, 5.2))

for ax in axes:
    ax.set_aspect("equal")
    ax.set_xlim(-0.05, 1.05)
    ax.set_ylim(-0.05, 1.05)

# primal cells and their mesh points
for c in primal.cells:
    loop = primal.vertices[list(c) + [c[0]]]
    axes[0].plot(loop[:, 0], loop[:, 1], "k-", lw=1.2)
axes[0].plot(primal.cell_points[:, 0], primal.cell_points[:, 1], "r.", ms=8,
             label="cell points")
axes[0].plot(primal.vertices[:, 0], primal.vertices[:, 1], "k.", ms=4)
axes[0].set_title("primal cells + mesh points")
axes[0].legend(loc="upper right", fontsize=8)

# dual control volumes (interior solid, boundary dashed)
for i, loop in enumerate(dual.loops):
    closed = np.vstack([loop, loop[:1]])
    style = "b-" if not dual.is_boundary[i] else "b--"
    axes[1].plot(closed[:, 0], closed[:, 1], style, lw=0.9)
axes[1].plot(dual.centers[:, 0], dual.centers[:, 1], "k.", ms=4)
axes[1].set_title("dual volumes (dashed touch the boundary)")

# third mesh, colored by owning volume
cmap = plt.get_cmap("tab20")
for tri, owner in zip(third.triangles, third.owner):
    pts = third.nodes[list(tri) + [tri[0]]]
    axes[2].fill(pts[:, 0], pts[:, 1], color=cmap(owner % 20), alpha=0.45,
                 edgecolor="k", lw=0.4)
axes[2].set_title("third mesh, one color per dual volume")

fig.tight_layout()
fig.savefig(OUT / "three_meshes.png", dpi=150)
print(f"wrote {OUT / 'three_meshes.png'}")
