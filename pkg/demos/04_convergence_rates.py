"""Manufactured-solution convergence, uniformly in the Lame constant.

The manufactured displacement is a rotational bubble plus a gradient part
scaled by 1/lambda, so its divergence (and hence the exact pressure) stays
well behaved as the material becomes incompressible.  Rates should not care
whether nu is 0.3 or 0.4999: that lambda-uniformity is the point of the
mixed pair.
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

import fecc
from fecc import io as fio

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

report = fecc.convergence_study([8, 16, 32, 64], [0.3, 0.4999], form="eps")

print(f"{'nu':>8} {'level':>6} {'h':>9} {'L2(u)':>12} {'H1(u)':>12} {'L2(p)':>12}")
for r in report.rows:
    print(f"{r.nu:>8} {r.level:>6} {r.h:>9.5f} {r.l2_u:>12.4e} "
          f"{r.h1_u:>12.4e} {r.l2_p:>12.4e}")
for nu in report.nus:
    ra = report.rates[nu]
    print(f"fitted rates at nu={nu}: L2(u) {ra['l2_u']:.2f}, "
          f"H1(u) {ra['h1_u']:.2f}, L2(p) {ra['l2_p']:.2f}")

fio.convergence_csv(report, OUT / "convergence.csv")
print(f"wrote {OUT / 'convergence.csv'}")

fig, ax = plt.subplots(figsize=(6, 4.6))
for nu, marker in ((0.3, "o"), (0.4999, "s")):
    rows = report.rows_for(nu)
    hs = [r.h for r in rows]
    ax.loglog(hs, [r.l2_u for r in rows], marker + "-", label=f"L2(u), nu={nu}")
    ax.loglog(hs, [r.h1_u for r in rows], marker + "--", label=f"H1(u), nu={nu}")
ax.loglog([1 / 8, 1 / 64], [3e-2, 3e-2 / 8], "k:", lw=1, label="slope 1")
ax.loglog([1 / 8, 1 / 64], [3e-3, 3e-3 / 64], "k-.", lw=1, label="slope 2")
ax.set_xlabel("h")
ax.set_ylabel("error")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "convergence.png", dpi=150)
print(f"wrote {OUT / 'convergence.png'}")
