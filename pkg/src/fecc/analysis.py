"""Numerical stability and convergence studies for the mixed scheme.

This module verifies, at desk scale, the properties the scheme is built on:

* the local macroelement condition (the pressure nullspace of every dual
  volume is exactly the constants),
* a mesh-independent discrete inf-sup constant and kernel coercivity
  constant, both measured by dense generalized eigensolves,
* lambda-uniform convergence rates against a divergence-controlled
  manufactured solution,
* the volumetric-locking failure of the pure-displacement P1 baseline that
  the mixed scheme exists to avoid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .mesh import (
    DualMesh,
    PrimalMesh,
    ThirdMesh,
    build_dual,
    build_third,
    generate_structured_quads,
    generate_structured_triangles,
)
from .geometry import triangle_geometry
from .quadrature import triangle_rule
from .spaces import DisplacementField, DofMap, PressureField, classify_nodes
from .assembly import (
    SaddleSystem,
    accumulate_csr,
    assemble_A,
    assemble_F,
    build_saddle_system,
    displacement_norm_matrix,
)
from .material import MaterialParams
from .condense import condense, reconstruct
from .solvers import SolveOptions, Solution, solve_saddle


# ---------------------------------------------------------------------------
# manufactured problem
# ---------------------------------------------------------------------------

def _g(t):
    return t * t * (1.0 - t) ** 2


def _dg(t):
    return 2.0 * t - 6.0 * t**2 + 4.0 * t**3


def _d2g(t):
    return 2.0 - 12.0 * t + 12.0 * t**2


def _d3g(t):
    return -12.0 + 24.0 * t


@dataclass
class ManufacturedProblem:
    """Closed-form (u, p) pair on the unit square with u = 0 on the boundary.

    Built from the bubble potential phi(x, y) = x^2 (1-x)^2 y^2 (1-y)^2 as

        u = (phi_y + phi_x / lambda,  -phi_x + phi_y / lambda),
        p = lambda div u = laplace(phi),

    so the divergence is exactly 1/lambda times a lambda-independent field
    and p does not degenerate as lambda grows.  ``f`` is the body force of
    the mixed momentum equation, f = -div(2 mu eps(u) + p I).
    """

    lam: float
    mu: float

    def u_exact(self, pts: np.ndarray) -> np.ndarray:
        x, y = pts[..., 0], pts[..., 1]
        px = _dg(x) * _g(y)
        py = _g(x) * _dg(y)
        return np.stack([py + px / self.lam, -px + py / self.lam], axis=-1)

    def grad_u_exact(self, pts: np.ndarray) -> np.ndarray:
        """(..., 2, 2) array with entry [i, j] = d u_i / d x_j."""
        x, y = pts[..., 0], pts[..., 1]
        pxx = _d2g(x) * _g(y)
        pxy = _dg(x) * _dg(y)
        pyy = _g(x) * _d2g(y)
        il = 1.0 / self.lam
        u1x = pxy + il * pxx
        u1y = pyy + il * pxy
        u2x = -pxx + il * pxy
        u2y = -pxy + il * pyy
        return np.stack([
            np.stack([u1x, u1y], axis=-1),
            np.stack([u2x, u2y], axis=-1),
        ], axis=-2)

    def p_exact(self, pts: np.ndarray) -> np.ndarray:
        x, y = pts[..., 0], pts[..., 1]
        return _d2g(x) * _g(y) + _g(x) * _d2g(y)

    def div_u_exact(self, pts: np.ndarray) -> np.ndarray:
        return self.p_exact(pts) / self.lam

    def _grad_laplace_phi(self, pts):
        x, y = pts[..., 0], pts[..., 1]
        sx = _d3g(x) * _g(y) + _dg(x) * _d2g(y)
        sy = _d2g(x) * _dg(y) + _g(x) * _d3g(y)
        return sx, sy

    def f(self, pts: np.ndarray) -> np.ndarray:
        """Body force of -div(2 mu eps(u) + p I) = f.

        Expanding with div u = laplace(phi)/lambda gives
        f = -mu laplace(u) - (1 + mu/lambda) grad(laplace(phi)).
        """
        sx, sy = self._grad_laplace_phi(pts)
        lap_u1 = sy + sx / self.lam
        lap_u2 = -sx + sy / self.lam
        c = 1.0 + self.mu / self.lam
        return np.stack([
            -self.mu * lap_u1 - c * sx,
            -self.mu * lap_u2 - c * sy,
        ], axis=-1)

    def body_force(self, form: str = "eps", kappa: float = 1.0):
        """Body force consistent with the requested first-block operator.

        'eps' returns ``f``; 'grad' returns the force of
        -mu laplace(u) - kappa grad p = f so that grad-form runs converge to
        the same (u, p) pair.
        """
        if form == "eps":
            return self.f
        if form != "grad":
            raise ValueError(f"unknown form {form!r}")

        def f_grad(pts):
            sx, sy = self._grad_laplace_phi(pts)
            lap_u1 = sy + sx / self.lam
            lap_u2 = -sx + sy / self.lam
            return np.stack([
                -self.mu * lap_u1 - kappa * sx,
                -self.mu * lap_u2 - kappa * sy,
            ], axis=-1)

        return f_grad


def manufactured_problem(lam: float, mu: float) -> ManufacturedProblem:
    if lam <= 0.0 or mu <= 0.0:
        raise ValueError("lambda and mu must be positive")
    return ManufacturedProblem(lam=lam, mu=mu)


# ---------------------------------------------------------------------------
# error norms
# ---------------------------------------------------------------------------

def error_norms(u_h: DisplacementField, p_h: PressureField,
                problem: ManufacturedProblem, third: ThirdMesh,
                dual: DualMesh, degree: int = 4):
    """(L2_u, H1_u seminorm, L2_p) errors by per-triangle quadrature.

    Pressure is integrated per dual volume, i.e. over that volume's fan
    triangles, against the constant p_M.
    """
    bary, w = triangle_rule(degree)
    areas, grads = triangle_geometry(third.nodes, third.triangles)
    xloc = third.nodes[third.triangles]                # (nt, 3, 2)
    pts = np.einsum("qk,tkd->tqd", bary, xloc)         # (nt, nq, 2)

    u_loc = u_h.values[third.triangles]                # (nt, 3, 2)
    uh_q = np.einsum("qk,tkd->tqd", bary, u_loc)
    du = uh_q - problem.u_exact(pts)
    l2u2 = np.einsum("q,tqd,tqd,t->", w, du, du, areas)

    grad_uh = np.einsum("tia,tib->tab", u_loc, grads)  # constant per triangle
    dg = grad_uh[:, None, :, :] - problem.grad_u_exact(pts)
    h1u2 = np.einsum("q,tqab,tqab,t->", w, dg, dg, areas)

    dp = p_h.values[third.owner][:, None] - problem.p_exact(pts)
    l2p2 = np.einsum("q,tq,tq,t->", w, dp, dp, areas)

    return float(np.sqrt(l2u2)), float(np.sqrt(h1u2)), float(np.sqrt(l2p2))


# ---------------------------------------------------------------------------
# macroelement condition
# ---------------------------------------------------------------------------

def patch_nullspace_dim(third: ThirdMesh, dofs: DofMap, triangle_ids,
                        pressure_groups) -> int:
    """Dimension of the local pressure modes invisible to local displacements.

    ``pressure_groups`` partitions ``triangle_ids`` into regions each carrying
    one pressure constant.  Local displacements are the hat functions of
    unknown-carrying nodes whose whole triangle star lies inside the patch.
    Returns (number of groups) - rank of the constraint matrix
    [int_group d/dx_k N_P].
    """
    triangle_ids = np.asarray(triangle_ids, dtype=np.int64)
    patch = set(triangle_ids.tolist())
    areas, grads = triangle_geometry(third.nodes, third.triangles)

    star_total = np.zeros(len(third.nodes), dtype=np.int64)
    np.add.at(star_total, third.triangles.ravel(), 1)
    star_patch = np.zeros(len(third.nodes), dtype=np.int64)
    np.add.at(star_patch, third.triangles[triangle_ids].ravel(), 1)
    inner = np.nonzero((star_patch == star_total) & (star_patch > 0)
                       & (dofs.u_scalar >= 0))[0]

    if len(inner) == 0:
        return len(pressure_groups)

    local_col = {int(n): c for c, n in enumerate(inner)}
    rows = np.zeros((len(pressure_groups), 2 * len(inner)))
    for r, group in enumerate(pressure_groups):
        for t in group:
            if int(t) not in patch:
                raise ValueError("pressure group contains a triangle outside the patch")
            for loc in range(3):
                n = int(third.triangles[t, loc])
                c = local_col.get(n)
                if c is None:
                    continue
                for k in range(2):
                    rows[r, 2 * c + k] += areas[t] * grads[t, loc, k]

    scale = float(np.sqrt(areas[triangle_ids].sum()))
    rank = np.linalg.matrix_rank(rows, tol=1e-10 * max(scale, 1e-30))
    return len(pressure_groups) - rank


def macroelement_nullspace_dim(volume: int, third: ThirdMesh, dofs: DofMap) -> int:
    """Nullspace dimension of one dual volume treated as a macroelement.

    The volume carries a single pressure constant, so a stable local space
    yields exactly 1 (the constants themselves).
    """
    tris = np.nonzero(third.owner == volume)[0]
    return patch_nullspace_dim(third, dofs, tris, [tris])


# ---------------------------------------------------------------------------
# inf-sup and coercivity constants
# ---------------------------------------------------------------------------

def inf_sup_constant(system: SaddleSystem, dual: DualMesh, dofs: DofMap,
                     filter_constants: bool = True) -> float:
    """Discrete inf-sup constant from a dense generalized eigensolve.

    beta_h^2 is the smallest eigenvalue of (B A^(-1) B^T) q = theta C q on the
    C-orthogonal complement of the constant pressures; A must be the 'eps'
    stiffness.  With ``filter_constants=False`` the constant mode stays in and
    the smallest eigenvalue is zero.
    """
    if system.form != "eps":
        raise ValueError("the inf-sup measurement uses the 'eps' stiffness")
    A = system.A.toarray()
    B = system.B.toarray()
    c_diag = system.C.diagonal()
    cho = sla.cho_factor(A)
    S = B @ sla.cho_solve(cho, B.T)
    if filter_constants:
        Z = sla.null_space(c_diag[None, :])        # basis of sum area q = 0
        vals = sla.eigh(Z.T @ S @ Z, Z.T @ np.diag(c_diag) @ Z, eigvals_only=True)
    else:
        vals = sla.eigh(S, np.diag(c_diag), eigvals_only=True)
    return float(np.sqrt(max(vals[0], 0.0)))


def coercivity_constant(system: SaddleSystem, third: ThirdMesh, dofs: DofMap) -> float:
    """Coercivity constant of a(.,.) on the discrete divergence-free kernel.

    alpha_0 = min over {v : B v = 0} of a(v, v) / ||v||_1^2, computed with a
    dense kernel basis and a generalized eigensolve against the H1 norm
    matrix.
    """
    A = system.A.toarray()
    Z = sla.null_space(system.B.toarray())
    H = displacement_norm_matrix(third, dofs).toarray()
    vals = sla.eigh(Z.T @ A @ Z, Z.T @ H @ Z, eigvals_only=True)
    return float(vals[0])


@dataclass
class InfSupResult:
    levels: list
    beta: list                    # discrete inf-sup constant per level
    alpha: list                   # kernel coercivity constant per level
    mu: float

    def ratio(self, values) -> float:
        return max(values) / min(values)


def stability_scan(levels, mu: float = 0.5, generator: str = "quads",
                   perturb: float = 0.0, seed: int = 0) -> InfSupResult:
    """beta_h and alpha_0 across refinement levels of the unit square.

    The default mu = 1/2 normalizes a(v, v) = int eps(v):eps(v), so beta_h is
    the geometric inf-sup constant of the P1/P0 pair.
    """
    beta, alpha = [], []
    for n in levels:
        primal = _generate(generator, n, perturb, seed)
        dual = build_dual(primal)
        third = build_third(primal, dual)
        dofs = classify_nodes(third, dual)
        system = build_saddle_system(third, dual, dofs, mu,
                                     lambda pts: np.zeros_like(pts), form="eps")
        beta.append(inf_sup_constant(system, dual, dofs))
        alpha.append(coercivity_constant(system, third, dofs))
    return InfSupResult(levels=list(levels), beta=beta, alpha=alpha, mu=mu)


# ---------------------------------------------------------------------------
# convergence studies
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceRow:
    nu: float
    level: int
    h: float
    n_u: int
    n_p: int
    l2_u: float
    h1_u: float
    l2_p: float


@dataclass
class ConvergenceReport:
    form: str
    condensed: bool
    levels: list
    nus: list
    rows: list = field(default_factory=list)
    rates: dict = field(default_factory=dict)        # nu -> {'l2_u': r, ...}
    constants: dict = field(default_factory=dict)    # nu -> {'l2_u': C, ...} fit intercepts

    def rows_for(self, nu: float) -> list:
        return [r for r in self.rows if r.nu == nu]


def _generate(generator: str, n: int, perturb: float, seed: int) -> PrimalMesh:
    if generator == "quads":
        return generate_structured_quads(n, n, perturb=perturb, seed=seed)
    if generator == "triangles":
        return generate_structured_triangles(n, n)
    raise ValueError(f"unknown generator {generator!r}")


def solve_manufactured(n: int, problem: ManufacturedProblem, form: str = "eps",
                       condensed: bool = False, kappa: float = 1.0,
                       generator: str = "quads", perturb: float = 0.0,
                       seed: int = 0, opts: SolveOptions | None = None,
                       degree: int = 4):
    """Solve one manufactured case and return (errors, solution, meshes)."""
    primal = _generate(generator, n, perturb, seed)
    dual = build_dual(primal)
    third = build_third(primal, dual)
    dofs = classify_nodes(third, dual)
    f = problem.body_force(form=form, kappa=kappa)
    system = build_saddle_system(third, dual, dofs, problem.mu, f,
                                 form=form, kappa=kappa)
    if condensed:
        csys = condense(system, dofs)
        sol = solve_saddle(csys, problem.lam, opts)
        u_field = reconstruct(sol.U, sol.P, csys.F_full, csys.elim)
    else:
        sol = solve_saddle(system, problem.lam, opts)
        u_field = DisplacementField.from_dof_vector(dofs, sol.U)
    p_field = PressureField(third=third, values=sol.P)
    errs = error_norms(u_field, p_field, problem, third, dual, degree=degree)
    return errs, sol, (primal, dual, third, dofs)


def fit_rate(hs, errs, drop_coarsest: bool = True):
    """Least-squares slope and intercept of log err = log C + r log h."""
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if drop_coarsest and len(hs) >= 3:
        hs, errs = hs[1:], errs[1:]
    r, logc = np.polyfit(np.log(hs), np.log(errs), 1)
    return float(r), float(np.exp(logc))


def convergence_study(levels, nus, form: str = "eps", condensed: bool = False,
                      E: float = 1.0, kappa: float = 1.0,
                      generator: str = "quads", perturb: float = 0.0,
                      seed: int = 0, opts: SolveOptions | None = None) -> ConvergenceReport:
    """Manufactured-solution convergence over nested levels and Poisson ratios.

    Levels must halve the mesh size (each entry double the previous).  Rates
    are least-squares fits on log h / log error, excluding the coarsest level
    as pre-asymptotic when three or more levels are present.
    """
    levels = list(levels)
    for a, b in zip(levels, levels[1:]):
        if b != 2 * a:
            raise ValueError(f"levels must double ({a} -> {b} does not)")

    report = ConvergenceReport(form=form, condensed=condensed,
                               levels=levels, nus=list(nus))
    for nu in nus:
        mat = MaterialParams.from_young_poisson(E, nu)
        problem = manufactured_problem(mat.lam, mat.mu)
        for n in levels:
            (l2u, h1u, l2p), sol, (_, _, _, dofs) = solve_manufactured(
                n, problem, form=form, condensed=condensed, kappa=kappa,
                generator=generator, perturb=perturb, seed=seed, opts=opts)
            report.rows.append(ConvergenceRow(
                nu=nu, level=n, h=1.0 / n,
                n_u=len(sol.U), n_p=len(sol.P),
                l2_u=l2u, h1_u=h1u, l2_p=l2p))
        hs = [1.0 / n for n in levels]
        rates, consts = {}, {}
        for name in ("l2_u", "h1_u", "l2_p"):
            errs = [getattr(r, name) for r in report.rows_for(nu)]
            rates[name], consts[name] = fit_rate(hs, errs)
        report.rates[nu] = rates
        report.constants[nu] = consts
    return report


# ---------------------------------------------------------------------------
# locking baseline
# ---------------------------------------------------------------------------

def locking_baseline(third: ThirdMesh, dofs: DofMap, params: MaterialParams,
                     f) -> DisplacementField:
    """Pure-displacement P1 solve of a(u, v) + lambda int div u div v = (f, v).

    This is the textbook low-order discretization that locks as lambda grows;
    it shares the third mesh and load with the mixed scheme so errors compare
    one to one.
    """
    areas, grads = triangle_geometry(third.nodes, third.triangles)
    sdof = dofs.u_scalar[third.triangles]
    ns = dofs.n_u_scalar
    rows, cols, vals = [], [], []
    for k in range(2):
        for l in range(2):
            for i in range(3):
                for j in range(3):
                    mask = (sdof[:, i] >= 0) & (sdof[:, j] >= 0)
                    if not mask.any():
                        continue
                    entry = params.lam * areas * grads[:, i, k] * grads[:, j, l]
                    rows.append(k * ns + sdof[mask, i])
                    cols.append(l * ns + sdof[mask, j])
                    vals.append(entry[mask])
    D = accumulate_csr(np.concatenate(rows), np.concatenate(cols),
                       np.concatenate(vals), (2 * ns, 2 * ns))
    K = assemble_A(third, dofs, params.mu, form="eps") + D
    F = assemble_F(third, dofs, f)
    u = spla.spsolve(K.tocsc(), F)
    return DisplacementField.from_dof_vector(dofs, u)


@dataclass
class LockingRow:
    nu: float
    level: int
    h: float
    l2_u_mixed: float
    l2_u_baseline: float
    ratio: float


def locking_comparison(level: int, nus, E: float = 1.0,
                       opts: SolveOptions | None = None) -> list:
    """Side-by-side L2 displacement errors: mixed scheme vs P1 baseline."""
    out = []
    for nu in nus:
        mat = MaterialParams.from_young_poisson(E, nu)
        problem = manufactured_problem(mat.lam, mat.mu)
        (l2u, _, _), _, (primal, dual, third, dofs) = solve_manufactured(
            level, problem, form="eps", opts=opts)
        u_base = locking_baseline(third, dofs, mat, problem.f)
        zero_p = PressureField(third=third, values=np.zeros(dofs.n_p))
        l2b, _, _ = error_norms(u_base, zero_p, problem, third, dual)
        out.append(LockingRow(nu=nu, level=level, h=1.0 / level,
                              l2_u_mixed=l2u, l2_u_baseline=l2b,
                              ratio=l2b / l2u))
    return out
