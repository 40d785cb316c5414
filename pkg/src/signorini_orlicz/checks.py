"""Property suites shared by the ``verify`` command and the demos.

Each check returns a :class:`CheckResult` with a pass flag and a small dict
of measured quantities.  Random inputs come from an explicit generator.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import energy as en
from . import regularity as rg
from .extension import energy_identity_holds, even_extension_solve
from .mesh import VertexTag, build_half_disc, mirror_permutation
from .nodal import contact_sets, nodal_set, stratify
from .orlicz import combine, default_t_grid, lieberman_estimate, luxemburg_norm, make_nfunction, modular, normalized
from .solver import BoundaryData, SolveOptions, solve_dirichlet_g_harmonic, solve_thin_obstacle

__all__ = [
    "CheckResult",
    "catalog_functions",
    "algebra_examples",
    "check_lieberman",
    "check_growth_envelope",
    "check_luxemburg_duality",
    "check_ellipticity",
    "check_pre1_random",
    "check_pre2_random",
    "check_comparison",
    "check_symmetry",
    "check_normalization",
    "check_energy_optimality",
    "check_linear_exact",
    "check_signorini_convergence",
    "check_extension",
    "check_nonhomogeneous",
    "check_degiorgi",
    "check_nodal",
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  ({self.seconds:.1f}s)"


def _timed(fn):
    def wrapper(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def catalog_functions():
    """The three benchmark families."""
    return {
        "power(1)": make_nfunction("power", [1]),
        "power_log(2,1,1)": make_nfunction("power_log", [2, 1, 1]),
        "double_power(2,3,1,3)": make_nfunction("double_power", [2, 3, 1, 3]),
    }


def algebra_examples():
    """Five examples with their expected (delta0, g0)."""
    t1, t2, t3 = (make_nfunction("power", [p]) for p in (1, 2, 3))
    return {
        "power(1)": (t1, (1.0, 1.0)),
        "power_log(2,1,1)": (make_nfunction("power_log", [2, 1, 1]), (2.0, 3.0)),
        "double_power(2,3,1,3)": (make_nfunction("double_power", [2, 3, 1, 3]), (1.0, 3.0)),
        "product(t, t^2)": (combine("product", t1, t2), (3.0, 3.0)),
        "composition(t^2, t^3)": (combine("composition", t2, t3), (6.0, 6.0)),
    }


@_timed
def check_lieberman(tol=0.02, mode="bracket"):
    """Grid estimates against assigned constants.

    ``mode="bracket"``: assigned constants enclose the estimate within
    ``tol``.  ``mode="match"``: estimate equals the expected pair within ``tol``.
    """
    detail, ok = {}, True
    grid = default_t_grid()
    for name, (f, expected) in algebra_examples().items():
        lo, hi = lieberman_estimate(f, grid)
        if mode == "match":
            good = abs(lo - expected[0]) <= tol and abs(hi - expected[1]) <= tol
        else:
            good = f.delta0 <= lo + tol and hi <= f.g0 + tol
        detail[name] = {"estimate": [lo, hi], "assigned": [f.delta0, f.g0], "ok": bool(good)}
        ok &= good
    return CheckResult(f"lieberman_{mode}", bool(ok), detail)


@_timed
def check_growth_envelope(rng, n=1000, rtol=1e-8):
    detail, ok = {}, True
    for name, (f, _) in algebra_examples().items():
        t = 10 ** rng.uniform(-3, 3, n)
        s = 10 ** rng.uniform(-3, 3, n)
        gs, gts = f.g(s), f.g(t * s)
        lo = np.minimum(t ** f.delta0, t ** f.g0) * gs
        hi = np.maximum(t ** f.delta0, t ** f.g0) * gs
        bad = int(np.count_nonzero((gts < lo * (1 - rtol)) | (gts > hi * (1 + rtol))))
        detail[name] = bad
        ok &= bad == 0
    return CheckResult("growth_envelope", bool(ok), detail)


@_timed
def check_luxemburg_duality(rng, h=0.1, n=5):
    mesh = build_half_disc(1.0, h)
    worst = 0.0
    for f in catalog_functions().values():
        for _ in range(n):
            field_ = rng.normal(size=mesh.n_vertices) * 10 ** rng.uniform(-2, 2)
            nrm = luxemburg_norm(mesh, field_, f)
            worst = max(worst, abs(modular(mesh, field_ / nrm, f) - 1.0))
    return CheckResult("luxemburg_duality", worst <= 1e-8, {"worst": worst})


@_timed
def check_ellipticity(rng, n=1000, rtol=1e-8):
    detail, ok = {}, True
    for name, f in catalog_functions().items():
        mag = 10 ** rng.uniform(-3, 3, n)
        ang = rng.uniform(0, 2 * np.pi, n)
        p = np.column_stack([mag * np.cos(ang), mag * np.sin(ang)])
        xi = rng.normal(size=(n, 2))
        a = en.linearized_coefficients(f, p)
        q = np.einsum("ni,nij,nj->n", xi, a, xi)
        x2 = np.sum(xi * xi, axis=1)
        lo, hi = min(1.0, f.delta0) * x2, max(1.0, f.g0) * x2
        bad = int(np.count_nonzero((q < lo * (1 - rtol)) | (q > hi * (1 + rtol))))
        detail[name] = bad
        ok &= bad == 0
    return CheckResult("aij_ellipticity", bool(ok), detail)


@_timed
def check_pre1_random(rng, n=10_000):
    counts = {}
    for _ in range(n):
        v = rg.check_pre1(**rg.random_pre1_instance(rng))
        counts[v] = counts.get(v, 0) + 1
    return CheckResult("pre1_random", counts.get("conclusion_violated", 0) == 0
                       and counts.get("hypothesis_violated", 0) == 0, counts)


@_timed
def check_pre2_random(rng, n=10_000):
    counts = {}
    for _ in range(n):
        v = rg.check_pre2(**rg.random_pre2_instance(rng))
        counts[v] = counts.get(v, 0) + 1
    eq = rg.pre2_extremal_sequence(1.0, 2.0, 1.0, 0.25, 30)
    exact = bool(np.array_equal(eq, 2.0 ** -np.arange(30) / 4))
    verdict = rg.check_pre2(eq, 1.0, 2.0, 1.0)
    counts["equality_exact"] = exact
    counts["equality_verdict"] = verdict
    ok = counts.get("conclusion_violated", 0) == 0 and exact and verdict == "conclusion_holds"
    return CheckResult("pre2_random", bool(ok), counts)


_COMPARISON_PAIRS = (
    (BoundaryData("linear", {"a": 0.0, "b": -1.0, "c": 0.0}), BoundaryData("harmonic_quadratic", {"a": 1.0, "c": 1.0})),
    (BoundaryData("signorini_trace"), BoundaryData("constant", {"c": 1.0})),
)


@_timed
def check_comparison(h=0.1, tol=1e-8):
    mesh = build_half_disc(1.0, h)
    worst = -np.inf
    for f in catalog_functions().values():
        for lo, hi in _COMPARISON_PAIRS:
            u1, r1 = solve_dirichlet_g_harmonic(mesh, f, lo)
            u2, r2 = solve_dirichlet_g_harmonic(mesh, f, hi)
            worst = max(worst, float(np.max(u1 - u2)))
    return CheckResult("comparison_principle", worst <= tol, {"max_u1_minus_u2": worst})


@_timed
def check_symmetry(h=0.1, tol=1e-10):
    mesh = build_half_disc(1.0, h)
    perm = mirror_permutation(mesh)
    data = BoundaryData("harmonic_quadratic", {"a": 1.0, "c": 0.0})
    worst = 0.0
    for f in catalog_functions().values():
        u, rep = solve_thin_obstacle(mesh, f, data)
        worst = max(worst, float(np.max(np.abs(u - u[perm]))))
    return CheckResult("x1_symmetry", worst <= tol, {"max_asymmetry": worst})


@_timed
def check_normalization(h=0.1, Ks=(0.5, 2.0, 10.0), tol=1e-8, families=None):
    mesh = build_half_disc(1.0, h)
    fams = catalog_functions() if families is None else families
    phi = BoundaryData("signorini_trace")
    opts = SolveOptions(tol_kkt=1e-13)
    worst = 0.0
    for f in fams.values():
        u, _ = solve_thin_obstacle(mesh, f, phi, opts)
        for K in Ks:
            w, _ = solve_thin_obstacle(mesh, normalized(f, K), phi.scaled(1.0 / K),
                                       SolveOptions(tol_kkt=1e-13 / K))
            worst = max(worst, float(np.max(np.abs(w - u / K))))
    return CheckResult("normalization", worst <= tol, {"max_deviation": worst})


@_timed
def check_energy_optimality(rng, h=0.1, n=100):
    mesh = build_half_disc(1.0, h)
    phi = BoundaryData("signorini_trace")
    thin = mesh.tag_mask(VertexTag.THIN)
    dmask = mesh.dirichlet_mask
    worst = -np.inf
    for f in catalog_functions().values():
        u, rep = solve_thin_obstacle(mesh, f, phi)
        J = en.energy(mesh, u, f)
        for _ in range(n):
            w = rng.normal(size=mesh.n_vertices) * 10 ** rng.uniform(-6, -2)
            w[dmask] = 0.0
            v = u + w
            v[thin] = np.maximum(v[thin], 0.0)
            worst = max(worst, J - en.energy(mesh, v, f) - rep.tol_kkt)
    return CheckResult("energy_optimality", worst <= 0.0, {"worst_gain_minus_tol": worst})


@_timed
def check_linear_exact(h=0.05):
    mesh = build_half_disc(1.0, h)
    f = make_nfunction("power", [1])
    u, rep = solve_thin_obstacle(mesh, f, BoundaryData("linear", {"a": 0.0, "b": -1.0, "c": 0.0}))
    err = float(np.max(np.abs(u + mesh.vertices[:, 1])))
    J = en.energy(mesh, u, f)
    ok = err <= 1e-6 and abs(J - np.pi / 4) <= 1e-3
    return CheckResult("linear_exact", bool(ok), {"error_linf": err, "energy": J})


@_timed
def check_signorini_convergence(hs=(0.08, 0.04, 0.02)):
    f = make_nfunction("power", [1])
    errs, beta, offset = [], None, None
    for h in hs:
        mesh = build_half_disc(1.0, h)
        u, rep = solve_thin_obstacle(mesh, f, BoundaryData("signorini_trace"))
        errs.append(float(np.max(np.abs(u - en.signorini_exact(mesh.vertices)))))
    _, fb = contact_sets(mesh, u)
    if len(fb):
        d = np.linalg.norm(fb.points, axis=1)
        x0 = fb.points[int(np.argmin(d))]
        offset = float(d.min())
        beta = rg.holder_fit(mesh, u, x0).beta
    ok = (all(a > b for a, b in zip(errs, errs[1:])) and errs[-1] <= 0.05 and beta is not None
          and 0.4 <= beta <= 0.6 and offset <= 2 * hs[-1])
    return CheckResult("signorini_convergence", bool(ok),
                       {"h": list(hs), "error_linf": errs, "beta_fit": beta, "free_boundary_offset": offset})


@_timed
def check_extension(h=0.04):
    mesh = build_half_disc(1.0, h)
    f = make_nfunction("power", [1])
    detail, ok = {}, True
    for phi in (BoundaryData("constant"), BoundaryData("linear"), BoundaryData("signorini_trace")):
        rep, u_half, _ = even_extension_solve(mesh, f, phi)
        ratio_ok, half, full = energy_identity_holds(mesh, u_half, f)
        good = rep.discrepancy_sup <= rep.bound and ratio_ok
        detail[phi.kind] = {"discrepancy": rep.discrepancy_sup, "bound": rep.bound,
                            "energy_identity": [half, full]}
        ok &= good
    return CheckResult("extension", bool(ok), detail)


@_timed
def check_nonhomogeneous(hs=(0.04, 0.02)):
    detail, ok = {}, True
    fams = {k: v for k, v in catalog_functions().items() if k != "power(1)"}
    for name, f in fams.items():
        Cs, betas, conv = [], [], []
        for h in hs:
            mesh = build_half_disc(1.0, h)
            u, rep = solve_thin_obstacle(mesh, f, BoundaryData("signorini_trace"))
            conv.append(bool(rep.converged and rep.kkt["ok"]))
            _, fb = contact_sets(mesh, u)
            x0 = fb.points[int(np.argmin(np.linalg.norm(fb.points, axis=1)))] if len(fb) else (0.0, 0.0)
            betas.append(rg.holder_fit(mesh, u, x0).beta)
            Cs.append(rg.distance_law_fit(mesh, u, fb).C)
        stable = bool(np.isfinite(Cs).all() and abs(Cs[-1] - Cs[0]) <= 0.25 * abs(Cs[0]))
        good = all(conv) and np.isfinite(betas[-1]) and 0 < betas[-1] < 1 and stable
        detail[name] = {"converged": conv, "beta": betas, "C": Cs}
        ok &= bool(good)
    return CheckResult("nonhomogeneous", bool(ok), detail)


@_timed
def check_degiorgi(rng, h=0.04, n_probes=100):
    detail, ok = {}, True
    for name, f in catalog_functions().items():
        mesh = build_half_disc(1.0, h)
        u, rep = solve_thin_obstacle(mesh, f, BoundaryData("signorini_trace"))
        v = en.vertex_gradient(mesh, u)[:, 0]
        res = [rg.caccioppoli_check(mesh, u, f, 0, c * float(v.max()), 0.25, 0.5) for c in (0.25, 0.5, 1.0)]
        cac = all(r.passed for r in res)
        ks = rng.uniform(v.min(), v.max(), (n_probes, 2))
        rs = rng.uniform(0.05, 1.0, (n_probes, 2))
        mono = True
        for (k1, k2), (r1, r2) in zip(np.sort(ks, axis=1), np.sort(rs, axis=1)):
            m11 = rg.level_measure(mesh, v, k1, r1).measure
            mono &= rg.level_measure(mesh, v, k2, r1).measure <= m11
            mono &= rg.level_measure(mesh, v, k1, r2).measure >= m11
        detail[name] = {"caccioppoli": [(r.lhs, r.rhs) for r in res], "monotone": bool(mono)}
        ok &= cac and mono
    return CheckResult("degiorgi", bool(ok), detail)


@_timed
def check_nodal(h=0.02):
    mesh = build_half_disc(1.0, h)
    f = make_nfunction("power", [1])
    u, _ = solve_thin_obstacle(mesh, f, BoundaryData("signorini_trace"))
    n1 = nodal_set(mesh, u)
    thin = set(np.flatnonzero(mesh.tag_mask(VertexTag.THIN)).tolist())
    on_thin = n1.ids() <= thin
    near = float(np.min(np.linalg.norm(n1.points, axis=1))) if len(n1) else np.inf
    strata = stratify(n1, 8 * h) if len(n1) else {"dominant": None, "counts": {}}
    ok = on_thin and near > 2 * h and strata["dominant"] == 1
    return CheckResult("nodal", bool(ok), {"n_points": len(n1), "min_origin_distance": near,
                                           "strata": strata["counts"]})
