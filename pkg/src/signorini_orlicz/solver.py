"""Minimisers of the discrete Orlicz energy under thin and classical obstacles.

All three problems share one engine: projected gradient descent with a
Barzilai-Borwein step, Armijo backtracking on the regularised energy, and an
outer continuation in the flux regularisation ``epsilon``.  The constraint is
a separable lower bound at each free vertex, so the projection is a clamp.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import energy as en
from .errors import ConstraintError, DomainError, ParameterError, CatalogError, ShapeError
from .mesh import VertexTag

__all__ = [
    "BoundaryData",
    "BOUNDARY_CATALOG",
    "SolveOptions",
    "SolveReport",
    "KKTReport",
    "gradient_operator",
    "stiffness_matrix",
    "solve_linear_dirichlet",
    "solve_thin_obstacle",
    "solve_dirichlet_g_harmonic",
    "solve_classical_obstacle",
    "kkt_check",
    "projected_residual",
]

DEFAULT_EPSILONS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)

BOUNDARY_CATALOG = {
    "constant": ("c",),
    "linear": ("a", "b", "c"),
    "signorini_trace": ("scale",),
    "harmonic_quadratic": ("a", "c"),
}
_BOUNDARY_DEFAULTS = {
    "constant": {"c": 1.0},
    "linear": {"a": 0.0, "b": -1.0, "c": 0.0},
    "signorini_trace": {"scale": 1.0},
    "harmonic_quadratic": {"a": 1.0, "c": 0.0},
}
# entries whose values on {x2 = 0} are >= 0 for every admissible parameter set
_H2_COMPATIBLE = {"signorini_trace"}


@dataclass(frozen=True)
class BoundaryData:
    """Closed catalog of Dirichlet data.

    ``constant c``, ``linear a x1 + b x2 + c``, ``signorini_trace``
    ``scale * Re((x1 + i x2)^{3/2})`` and ``harmonic_quadratic``
    ``a (x1^2 - x2^2) + c``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in BOUNDARY_CATALOG:
            raise CatalogError(f"unknown boundary data {self.kind!r}; expected one of {sorted(BOUNDARY_CATALOG)}")
        merged = dict(_BOUNDARY_DEFAULTS[self.kind])
        for key, val in self.params.items():
            if key not in BOUNDARY_CATALOG[self.kind]:
                raise ParameterError(f"unknown parameter {key!r} for boundary data {self.kind!r}", name=key)
            val = float(val)
            if not np.isfinite(val):
                raise ParameterError(f"parameter {key!r} must be finite", name=key)
            merged[key] = val
        object.__setattr__(self, "params", merged)

    @classmethod
    def create(cls, kind, **params):
        return cls(kind, params)

    @property
    def claims_h2(self):
        return self.kind in _H2_COMPATIBLE

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        x1, x2 = x[..., 0], x[..., 1]
        p = self.params
        if self.kind == "constant":
            return np.full(x1.shape, p["c"])
        if self.kind == "linear":
            return p["a"] * x1 + p["b"] * x2 + p["c"]
        if self.kind == "signorini_trace":
            return p["scale"] * en.signorini_exact(x)
        return p["a"] * (x1 * x1 - x2 * x2) + p["c"]

    def scaled(self, factor):
        """Data multiplied by ``factor`` (used for normalisation checks)."""
        p = dict(self.params)
        for k in BOUNDARY_CATALOG[self.kind]:
            p[k] *= factor
        return BoundaryData(self.kind, p)

    def to_dict(self):
        return {"kind": self.kind, **self.params}


@dataclass
class SolveOptions:
    tol_kkt: float = None  # default 1e-8 * sup |phi|
    max_iters: int = 200_000
    epsilon_schedule: tuple = DEFAULT_EPSILONS
    step_rule: str = "backtracking"
    step_size: float = None  # only for step_rule == "fixed"
    armijo_beta: float = 0.5
    armijo_c: float = 1e-4
    max_backtracks: int = 60

    def validate(self):
        if self.tol_kkt is not None and not self.tol_kkt > 0:
            raise ParameterError(f"tol_kkt must be positive, got {self.tol_kkt}", name="tol_kkt")
        eps = np.asarray(self.epsilon_schedule, dtype=float)
        if eps.size == 0 or np.any(eps < 0) or np.any(np.diff(eps) >= 0) or eps[-1] > 1e-8:
            raise ParameterError("epsilon_schedule must be strictly decreasing and end at or below 1e-8", name="epsilon_schedule")
        if self.step_rule not in ("fixed", "backtracking"):
            raise ParameterError(f"unknown step rule {self.step_rule!r}", name="step_rule")
        if self.step_rule == "fixed" and not (self.step_size and self.step_size > 0):
            raise ParameterError("fixed step rule needs a positive step_size", name="step_size")
        if int(self.max_iters) < 1:
            raise ParameterError("max_iters must be at least 1", name="max_iters")


@dataclass
class KKTReport:
    residual_free: float
    min_active_flux: float
    complementarity: float
    tol: float
    n_active: int

    @property
    def ok(self):
        return (self.residual_free <= self.tol and self.min_active_flux >= -self.tol
                and self.complementarity <= self.tol)

    def to_dict(self):
        return {"residual_free": self.residual_free, "min_active_flux": self.min_active_flux,
                "complementarity": self.complementarity, "tol": self.tol,
                "n_active": self.n_active, "ok": bool(self.ok)}


@dataclass
class SolveReport:
    problem: str
    converged: bool
    iterations: list
    energy_trace: list
    epsilon_stages: list
    residual: float
    tol_kkt: float
    flux_scale: float
    active_set: list
    active_set_stable: int
    energy: float
    kkt: dict = None
    wall_time: float = 0.0
    message: str = ""

    @property
    def total_iterations(self):
        return int(sum(self.iterations))

    def energy_monotone(self, tol=1e-12):
        """True when every stage trace is nonincreasing up to ``tol * (1 + |J|)``."""
        for trace in self.energy_trace:
            t = np.asarray(trace)
            if t.size > 1 and np.any(np.diff(t) > tol * (1.0 + np.abs(t[:-1]))):
                return False
        return True

    def to_dict(self):
        return {
            "problem": self.problem,
            "converged": bool(self.converged),
            "iterations": [int(i) for i in self.iterations],
            "energy_trace": [[float(e) for e in tr] for tr in self.energy_trace],
            "epsilon_stages": [float(e) for e in self.epsilon_stages],
            "residual": float(self.residual),
            "tol_kkt": float(self.tol_kkt),
            "energy": float(self.energy),
            "kkt": self.kkt,
            "active_set": [int(i) for i in self.active_set],
            "message": self.message,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def gradient_operator(mesh):
    """Sparse ``(Dx, Dy)`` with ``Dx @ u`` the per-triangle x-derivative."""
    M = mesh.n_triangles
    rows = np.repeat(np.arange(M), 3)
    cols = mesh.triangles.ravel()
    b = mesh.basis_gradients
    shape = (M, mesh.n_vertices)
    dx = sp.csr_matrix((b[:, :, 0].ravel(), (rows, cols)), shape=shape)
    dy = sp.csr_matrix((b[:, :, 1].ravel(), (rows, cols)), shape=shape)
    return dx, dy


def stiffness_matrix(mesh, weights=None):
    """P1 stiffness matrix with per-triangle weights (default 1)."""
    dx, dy = gradient_operator(mesh)
    w = mesh.areas if weights is None else mesh.areas * weights
    W = sp.diags(w)
    return (dx.T @ W @ dx + dy.T @ W @ dy).tocsr()


def solve_linear_dirichlet(mesh, fixed_mask, fixed_values):
    """Discrete Laplace solve with natural conditions off ``fixed_mask``."""
    K = stiffness_matrix(mesh)
    free = ~fixed_mask
    u = np.zeros(mesh.n_vertices)
    u[fixed_mask] = fixed_values[fixed_mask]
    if np.any(free):
        rhs = -K[free][:, fixed_mask] @ u[fixed_mask]
        u[free] = spla.spsolve(K[free][:, free].tocsc(), rhs)
    return u


class _Problem:
    """Everything the iteration needs, with the sparse operators cached."""

    def __init__(self, mesh, f, fixed_mask, lower):
        self.mesh, self.f = mesh, f
        self.dx, self.dy = gradient_operator(mesh)
        self.dxT, self.dyT = self.dx.T.tocsr(), self.dy.T.tocsr()
        self.areas = mesh.areas
        self.free = ~fixed_mask
        self.lower = lower  # full-length array, -inf where unconstrained

    def evaluate(self, u, eps, need_grad=True):
        gx, gy = self.dx @ u, self.dy @ u
        t = np.hypot(gx, gy)
        s = np.sqrt(t * t + eps * eps) if eps > 0 else t
        J = float(np.sum(self.areas * self.f.G(s)))
        if not need_grad:
            return J, None, t
        c = self.areas * self.f.flux_coefficient(t, eps)
        r = self.dxT @ (c * gx) + self.dyT @ (c * gy)
        return J, r, t

    def project(self, u):
        return np.maximum(u, self.lower)

    def projected(self, u, r):
        """Residual with admissible-sign entries at bound vertices removed."""
        pr = np.where(self.free, r, 0.0)
        at_bound = self.free & (u <= self.lower) & (pr > 0)
        pr[at_bound] = 0.0
        return pr

    def flux_scale(self, t):
        return float(np.max(self.f.g(t), initial=0.0))


def _run(problem, u0, opts, tol, name):
    """Projected BB iteration with continuation; returns ``(u, SolveReport)``."""
    t_start = time.perf_counter()
    u = problem.project(u0.copy())
    free = problem.free
    iterations, traces, stages = [], [], []
    converged = True
    res = np.inf
    F = 0.0
    active_hist = []
    schedule = list(opts.epsilon_schedule)
    for stage, eps in enumerate(schedule):
        final = stage == len(schedule) - 1
        stage_tol = tol if final else max(tol, eps)
        J, r, t = problem.evaluate(u, eps)
        trace = [J]
        pr = problem.projected(u, r)
        F = problem.flux_scale(t)
        res = float(np.max(np.abs(pr), initial=0.0))
        alpha = opts.step_size if opts.step_rule == "fixed" else 1.0 / max(res, 1e-300) * 1e-2
        it = 0
        stage_ok = res <= stage_tol * (1.0 + F)
        u_prev = r_prev = None
        while not stage_ok and it < opts.max_iters:
            it += 1
            if opts.step_rule == "backtracking" and u_prev is not None:
                s = (u - u_prev)[free]
                y = (r - r_prev)[free]
                sy = float(s @ y)
                if sy > 0:
                    alpha = float(s @ s) / sy
            u_prev, r_prev = u, r
            step = alpha
            accepted = False
            for _ in range(opts.max_backtracks + 1):
                trial = u.copy()
                trial[free] = u[free] - step * r[free]
                trial = problem.project(trial)
                d = trial - u
                if opts.step_rule == "fixed":
                    J_new, r_new, t_new = problem.evaluate(trial, eps)
                    accepted = True
                    break
                J_new, _, _ = problem.evaluate(trial, eps, need_grad=False)
                slack = 1e-14 * max(abs(J), 1.0)
                if J_new <= J + opts.armijo_c * float(r @ d) + slack:
                    accepted = True
                    _, r_new, t_new = problem.evaluate(trial, eps)
                    break
                step *= opts.armijo_beta
            if not accepted or not np.any(d):
                # no admissible decrease left at working precision
                u_prev = None
                stage_ok = res <= stage_tol * (1.0 + F)
                break
            u, J, r, t = trial, J_new, r_new, t_new
            trace.append(J)
            pr = problem.projected(u, r)
            F = problem.flux_scale(t)
            res = float(np.max(np.abs(pr), initial=0.0))
            stage_ok = res <= stage_tol * (1.0 + F)
            if final:
                active_hist.append(np.flatnonzero(free & (u <= problem.lower)))
                if len(active_hist) > 11:
                    active_hist.pop(0)
        iterations.append(it)
        traces.append(trace)
        stages.append(float(eps))
        if not stage_ok:
            converged = False
            if final or it >= opts.max_iters:
                break
    active = np.flatnonzero(free & (u <= problem.lower) & np.isfinite(problem.lower))
    stable = 0
    for prev in reversed(active_hist):
        if prev.shape == active.shape and np.array_equal(prev, active):
            stable += 1
        else:
            break
    report = SolveReport(
        problem=name, converged=converged, iterations=iterations, energy_trace=traces,
        epsilon_stages=stages, residual=res, tol_kkt=tol, flux_scale=F,
        active_set=active.tolist(), active_set_stable=stable,
        energy=en.energy(problem.mesh, u, problem.f),
        wall_time=time.perf_counter() - t_start,
        message="converged" if converged else "iteration limit or stagnation before tolerance",
    )
    return u, report


def _resolve(opts, phi_values):
    opts = SolveOptions() if opts is None else opts
    opts.validate()
    tol = opts.tol_kkt
    if tol is None:
        scale = float(np.max(np.abs(phi_values), initial=0.0))
        tol = 1e-8 * scale if scale > 0 else 1e-8
    return opts, tol


def _is_linear_flux(f):
    """True for g(t) = c t, where the problem is quadratic."""
    t = np.array([1e-3, 1.0, 1e3])
    return bool(np.allclose(f.ratio(t), 1.0, rtol=0, atol=1e-14))


def _boundary_values(mesh, data, mask):
    if callable(data):
        vals = np.zeros(mesh.n_vertices)
        vals[mask] = data(mesh.vertices[mask])
        return vals
    vals = np.asarray(data, dtype=float)
    if vals.shape != (mesh.n_vertices,):
        raise ShapeError(f"boundary values have shape {vals.shape}, expected ({mesh.n_vertices},)")
    return vals


def _g_harmonic(mesh, f, fixed_mask, phi_vals, opts, tol, lower=None, name="dirichlet"):
    """Minimise the energy with ``u = phi`` on ``fixed_mask`` and optional bounds."""
    u0 = solve_linear_dirichlet(mesh, fixed_mask, phi_vals)
    if lower is None:
        lower = np.full(mesh.n_vertices, -np.inf)
    problem = _Problem(mesh, f, fixed_mask, lower)
    return _run(problem, u0, opts, tol, name)


def solve_thin_obstacle(mesh, f, phi, opts=None):
    """Minimise ``J`` with ``u = phi`` on the arc and ``u >= 0`` on the thin boundary."""
    if mesh.kind != "half":
        raise DomainError("solve_thin_obstacle needs a half-disc mesh")
    dmask = mesh.dirichlet_mask
    phi_vals = _boundary_values(mesh, phi, dmask)
    corners = mesh.tag_mask(VertexTag.RIM_CORNER)
    if np.any(phi_vals[corners] < -1e-12):
        raise ConstraintError("boundary data is negative at a rim corner, "
                              "incompatible with u >= 0 on the thin boundary")
    opts, tol = _resolve(opts, phi_vals[dmask])
    thin = mesh.tag_mask(VertexTag.THIN)
    lower = np.full(mesh.n_vertices, -np.inf)
    lower[thin] = 0.0

    u0 = solve_linear_dirichlet(mesh, dmask, phi_vals)
    if not _is_linear_flux(f):
        # loose unconstrained g-harmonic start
        start_opts = SolveOptions(tol_kkt=max(1e-4 * max(tol / 1e-8, 1.0), tol),
                                  max_iters=min(opts.max_iters, 5000),
                                  epsilon_schedule=(1e-2, 1e-8))
        free_problem = _Problem(mesh, f, dmask, np.full(mesh.n_vertices, -np.inf))
        u0, _ = _run(free_problem, u0, start_opts, start_opts.tol_kkt, "start")
    u0[thin] = np.maximum(u0[thin], 0.0)
    problem = _Problem(mesh, f, dmask, lower)
    u, report = _run(problem, u0, opts, tol, "thin_obstacle")
    u[dmask] = phi_vals[dmask]
    # same scale-aware tolerance as the stopping rule
    report.kkt = kkt_check(mesh, u, f, tol * (1.0 + report.flux_scale),
                           epsilon=opts.epsilon_schedule[-1]).to_dict()
    return u, report


def solve_dirichlet_g_harmonic(mesh, f, data, opts=None):
    """Unconstrained minimiser with ``u = data`` on every boundary vertex."""
    bmask = mesh.boundary_mask
    vals = _boundary_values(mesh, data, bmask)
    opts, tol = _resolve(opts, vals[bmask])
    u, report = _g_harmonic(mesh, f, bmask, vals, opts, tol, name="dirichlet")
    u[bmask] = vals[bmask]
    return u, report


def solve_classical_obstacle(mesh, f, psi, data, opts=None):
    """Minimise ``J`` with ``u >= psi`` and ``u = data`` on the outer boundary.

    ``psi`` is a nodal array; ``-inf`` entries leave a vertex unconstrained.
    """
    bmask = mesh.boundary_mask
    vals = _boundary_values(mesh, data, bmask)
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (mesh.n_vertices,):
        raise ShapeError(f"obstacle has shape {psi.shape}, expected ({mesh.n_vertices},)")
    if np.any(psi[bmask] > vals[bmask] + 1e-12):
        raise ConstraintError("obstacle exceeds boundary data on the outer boundary")
    opts, tol = _resolve(opts, vals[bmask])
    lower = np.where(bmask, -np.inf, psi)
    u0 = solve_linear_dirichlet(mesh, bmask, vals)
    problem = _Problem(mesh, f, bmask, lower)
    u, report = _run(problem, u0, opts, tol, "classical_obstacle")
    u[bmask] = vals[bmask]
    fl = problem.lower
    J, r, t = problem.evaluate(u, opts.epsilon_schedule[-1])
    active = problem.free & (u <= fl)
    inactive = problem.free & ~active
    report.kkt = {
        "residual_free": float(np.max(np.abs(r[inactive]), initial=0.0)),
        "min_active_flux": float(np.min(r[active], initial=np.inf)) if active.any() else None,
        "tol": float(tol * (1.0 + report.flux_scale)),
        "n_active": int(active.sum()),
    }
    return u, report


def projected_residual(mesh, u, f, epsilon=0.0):
    """Residual at free vertices with the admissible sign removed on the contact set."""
    res = en.first_variation(mesh, u, f, epsilon).active_values
    thin = mesh.tag_mask(VertexTag.THIN)
    res[thin & (u <= 0) & (res > 0)] = 0.0
    return res


def kkt_check(mesh, u, f, tol, epsilon=0.0, contact_tol=None):
    """Discrete Euler-Lagrange diagnostics on a half-disc field.

    ``residual_free`` is the largest residual over interior and inactive thin
    vertices, ``min_active_flux`` the smallest residual over the contact set
    and ``complementarity`` the largest ``|min(u_i, R_i)|`` on the thin
    boundary.  Contact means ``u_i <= contact_tol`` (default 0).
    """
    u = en.check_field(mesh, u)
    R = en.first_variation(mesh, u, f, epsilon).active_values
    thin = mesh.tag_mask(VertexTag.THIN)
    interior = mesh.tag_mask(VertexTag.INTERIOR)
    ctol = 0.0 if contact_tol is None else contact_tol
    active = thin & (u <= ctol)
    inactive_thin = thin & ~active
    free_vals = R[interior | inactive_thin]
    res_free = float(np.max(np.abs(free_vals), initial=0.0))
    min_active = float(np.min(R[active])) if active.any() else 0.0
    comp = float(np.max(np.abs(np.minimum(u[thin], R[thin])), initial=0.0)) if thin.any() else 0.0
    return KKTReport(residual_free=res_free, min_active_flux=min_active,
                     complementarity=comp, tol=float(tol), n_active=int(active.sum()))
