"""Command-line interface.

Subcommands: mesh-gen, solve, convergence, infsup, locking.  Exit status is
0 on success, 1 on numerical failure, 2 on usage errors; failures also emit
one machine-readable line on stderr of the form

    fecc-error: <usage|numerical>: <message>
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import io as fio
from .analysis import (
    locking_comparison,
    convergence_study,
    manufactured_problem,
    stability_scan,
)
from .assembly import build_saddle_system
from .condense import condense, reconstruct
from .material import MaterialParams
from .mesh import generate_structured_quads, generate_structured_triangles, build_dual, build_third
from .solvers import SolveOptions, SolverError, solve_saddle
from .spaces import DisplacementField, PressureField, classify_nodes


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    """Material and scheme options of one solve; exactly one of the material
    parametrizations (E, nu) or (lam, mu) must be given."""

    E: float | None = None
    nu: float | None = None
    lam: float | None = None
    mu: float | None = None
    form: str = "eps"
    condensed: bool = False
    kappa: float = 1.0
    tol: float = 1e-12

    def material(self) -> MaterialParams:
        if self.nu is not None and not 0.0 <= self.nu < 0.5:
            raise UsageError(f"Poisson ratio must satisfy 0 <= nu < 0.5, got {self.nu}")
        young = self.E is not None or self.nu is not None
        lame = self.lam is not None or self.mu is not None
        if young == lame:
            raise UsageError("give exactly one of (--E, --nu) or (--lambda, --mu)")
        try:
            if young:
                if self.E is None or self.nu is None:
                    raise UsageError("--E and --nu must be given together")
                return MaterialParams.from_young_poisson(self.E, self.nu)
            if self.lam is None or self.mu is None:
                raise UsageError("--lambda and --mu must be given together")
            return MaterialParams.from_lame(self.lam, self.mu)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


def _parse_levels(text: str):
    try:
        levels = [int(p) for p in text.split(",") if p]
    except ValueError:
        raise UsageError(f"bad --levels list {text!r}")
    if not levels:
        raise UsageError("--levels list is empty")
    return levels


def _parse_nus(text: str):
    try:
        nus = [float(p) for p in text.split(",") if p]
    except ValueError:
        raise UsageError(f"bad --nu list {text!r}")
    if not nus:
        raise UsageError("--nu list is empty")
    return nus


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fecc",
        description="Cell-centered mixed finite elements for nearly "
                    "incompressible plane elasticity.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("mesh-gen", help="write a structured FECCMESH file")
    g.add_argument("--nx", type=int, required=True)
    g.add_argument("--ny", type=int, required=True)
    g.add_argument("--kind", choices=("quads", "triangles"), default="quads")
    g.add_argument("--perturb", type=float, default=0.0,
                   help="interior-vertex perturbation as a fraction of h, in [0, 0.3)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve on a mesh file, write VTK + summary")
    s.add_argument("--mesh", default=None)
    s.add_argument("--E", type=float)
    s.add_argument("--nu", type=float)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--mu", type=float)
    s.add_argument("--form", choices=("eps", "grad"), default="eps")
    s.add_argument("--condensed", action="store_true")
    s.add_argument("--kappa", type=float, default=1.0,
                   help="pressure-coupling factor of the grad form (default 1)")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--method", choices=("direct", "uzawa"), default="direct")
    s.add_argument("--fx", type=float, default=1.0, help="constant body force, x component")
    s.add_argument("--fy", type=float, default=0.0, help="constant body force, y component")
    s.add_argument("--out", default=None, help="VTK output path")

    c = sub.add_parser("convergence", help="manufactured-solution rate study")
    c.add_argument("--levels", required=True, help="comma list, each double the last")
    c.add_argument("--nu", required=True, help="comma list of Poisson ratios")
    c.add_argument("--E", type=float, default=1.0)
    c.add_argument("--form", choices=("eps", "grad"), default="eps")
    c.add_argument("--condensed", action="store_true")
    c.add_argument("--kappa", type=float, default=1.0)
    c.add_argument("--generator", choices=("quads", "triangles"), default="quads")
    c.add_argument("--perturb", type=float, default=0.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default=None, help="CSV output path")

    i = sub.add_parser("infsup", help="inf-sup and coercivity constants per level")
    i.add_argument("--levels", required=True)
    i.add_argument("--mu", type=float, default=0.5)
    i.add_argument("--generator", choices=("quads", "triangles"), default="triangles")
    i.add_argument("--perturb", type=float, default=0.0)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--out", default=None)

    l = sub.add_parser("locking", help="mixed vs pure-displacement P1 baseline")
    l.add_argument("--level", type=int, required=True)
    l.add_argument("--nu", required=True)
    l.add_argument("--E", type=float, default=1.0)
    l.add_argument("--out", default=None)
    return ap


def _cmd_mesh_gen(args) -> int:
    if args.kind == "quads":
        mesh = generate_structured_quads(args.nx, args.ny, args.perturb, args.seed)
    else:
        mesh = generate_structured_triangles(args.nx, args.ny)
    fio.write_mesh(mesh, args.out)
    print(f"wrote {args.out}: {mesh.n_vertices} vertices, {mesh.n_cells} cells")
    return 0


def _cmd_solve(args) -> int:
    cfg = RunConfig(E=args.E, nu=args.nu, lam=args.lam, mu=args.mu,
                    form=args.form, condensed=args.condensed,
                    kappa=args.kappa, tol=args.tol)
    mat = cfg.material()
    if cfg.condensed and cfg.form != "grad":
        raise UsageError("--condensed requires --form grad")
    if args.mesh is None:
        raise UsageError("--mesh is required")
    mesh = fio.read_mesh(args.mesh)
    dual = build_dual(mesh)
    third = build_third(mesh, dual)
    dofs = classify_nodes(third, dual)
    fx, fy = args.fx, args.fy

    def f(pts):
        return np.column_stack([np.full(len(pts), fx), np.full(len(pts), fy)])

    system = build_saddle_system(third, dual, dofs, mat.mu, f,
                                 form=cfg.form, kappa=cfg.kappa)
    opts = SolveOptions(method=args.method, tolerance=cfg.tol)
    if cfg.condensed:
        csys = condense(system, dofs)
        sol = solve_saddle(csys, mat.lam, opts)
        u_field = reconstruct(sol.U, sol.P, csys.F_full, csys.elim)
        n_u = csys.n_u
    else:
        sol = solve_saddle(system, mat.lam, opts)
        u_field = DisplacementField.from_dof_vector(dofs, sol.U)
        n_u = system.n_u
    if not sol.converged:
        raise SolverError(f"solver did not reach tolerance (residual {sol.residual:.3e})")
    p_field = PressureField(third=third, values=sol.P)
    if args.out:
        fio.export_vtk(third, u_field, p_field, args.out)
    print(f"cells={mesh.n_cells} vertices={mesh.n_vertices} "
          f"n_u={n_u} n_p={dofs.n_p}")
    print(f"lambda={mat.lam:.12g} mu={mat.mu:.12g} form={cfg.form} "
          f"condensed={cfg.condensed}")
    print(f"residual={sol.residual:.12g} pressure_mean={sol.pressure_mean:.12g}")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def _cmd_convergence(args) -> int:
    report = convergence_study(
        _parse_levels(args.levels), _parse_nus(args.nu), form=args.form,
        condensed=args.condensed, E=args.E, kappa=args.kappa,
        generator=args.generator, perturb=args.perturb, seed=args.seed)
    for nu in report.nus:
        r = report.rates[nu]
        print(f"nu={nu}: rates l2_u={r['l2_u']:.3f} h1_u={r['h1_u']:.3f} "
              f"l2_p={r['l2_p']:.3f}")
    if args.out:
        fio.convergence_csv(report, args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_infsup(args) -> int:
    result = stability_scan(_parse_levels(args.levels), mu=args.mu,
                            generator=args.generator, perturb=args.perturb,
                            seed=args.seed)
    for n, b, a in zip(result.levels, result.beta, result.alpha):
        print(f"level={n}: beta={b:.6g} alpha={a:.6g}")
    if args.out:
        fio.infsup_csv(result, args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_locking(args) -> int:
    rows = locking_comparison(args.level, _parse_nus(args.nu), E=args.E)
    for r in rows:
        print(f"nu={r.nu}: l2_u mixed={r.l2_u_mixed:.6g} "
              f"baseline={r.l2_u_baseline:.6g} ratio={r.ratio:.3g}")
    if args.out:
        fio.locking_csv(rows, args.out)
        print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "mesh-gen": _cmd_mesh_gen,
    "solve": _cmd_solve,
    "convergence": _cmd_convergence,
    "infsup": _cmd_infsup,
    "locking": _cmd_locking,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, fio.MeshFileError, FileNotFoundError, ValueError) as exc:
        print(f"fecc-error: usage: {exc}", file=sys.stderr)
        return 2
    except (SolverError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"fecc-error: numerical: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
