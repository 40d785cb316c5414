"""Acceptance criteria, one test per criterion.

Every test records a one-line verdict; ``conftest.py`` prints them at the
end of the run.  Run this file directly to print the lines without pytest.
Tolerances are pinned in the constants below.
"""

import math
import time

import numpy as np
import pytest

from oracles import ENERGY_LINEAR, LIEBERMAN
from signorini_orlicz import checks as ck
from signorini_orlicz import energy as en
from signorini_orlicz import regularity as rg
from signorini_orlicz.extension import energy_identity_holds, even_extension_solve
from signorini_orlicz.mesh import VertexTag, build_half_disc
from signorini_orlicz.nodal import contact_sets, nodal_set, stratify
from signorini_orlicz.orlicz import default_t_grid, lieberman_estimate, make_nfunction
from signorini_orlicz.solver import BoundaryData, solve_thin_obstacle

TOL_LINEAR_SUP = 1e-6
TOL_LINEAR_ENERGY = 1e-3
MAX_SECONDS_LINEAR = 5.0
HS = (0.08, 0.04, 0.02)
TOL_SIGNORINI_SUP = 0.05
BETA_RANGE = (0.4, 0.6)
FB_FACTOR = 2.0
MAX_SECONDS_SIGNORINI = 120.0
ENVELOPE_STABILITY = 0.25
CACCIOPPOLI_FACTOR = 1.1
LEVEL_FRACTIONS = (0.25, 0.5, 1.0)
N_MONOTONE_PROBES = 100
N_LEMMA_INSTANCES = 10_000
ENERGY_RATIO_RTOL = 1e-12
LIEBERMAN_TOL = 0.02
N_ENVELOPE_PAIRS = 1000
ENVELOPE_RTOL = 1e-8
N_ELLIPTIC_STATES = 1000

RESULTS = {}

G_LINEAR = make_nfunction("power", [1])
NONHOMOGENEOUS = {
    "t^2 log(1+t)": make_nfunction("power_log", [2, 1, 1]),
    "2t + 3t^3": make_nfunction("double_power", [2, 3, 1, 3]),
}


def record(n, passed, detail):
    RESULTS[n] = (bool(passed), detail)
    return bool(passed)


def verdict_lines():
    return [f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}" for n, (ok, detail) in sorted(RESULTS.items())]


def nearest_free_boundary(mesh, u):
    _, fb = contact_sets(mesh, u)
    if not len(fb):
        return fb, None, math.inf
    d = np.linalg.norm(fb.points, axis=1)
    return fb, fb.points[int(np.argmin(d))], float(d.min())


def test_criterion_1_linear_exact():
    t0 = time.perf_counter()
    mesh = build_half_disc(1.0, 0.05)
    u, rep = solve_thin_obstacle(mesh, G_LINEAR, BoundaryData("linear", {"a": 0.0, "b": -1.0, "c": 0.0}))
    secs = time.perf_counter() - t0
    err = float(np.max(np.abs(u + mesh.vertices[:, 1])))
    J = en.energy(mesh, u, G_LINEAR)
    ok = err <= TOL_LINEAR_SUP and abs(J - ENERGY_LINEAR) <= TOL_LINEAR_ENERGY and secs < MAX_SECONDS_LINEAR
    assert record(1, ok, f"sup err {err:.2e} (<= {TOL_LINEAR_SUP:g}), energy {J:.6f} vs pi/4 "
                         f"(+-{TOL_LINEAR_ENERGY:g}), {secs:.2f}s (< {MAX_SECONDS_LINEAR:g}s)")


def test_criterion_2_signorini_benchmark():
    t0 = time.perf_counter()
    errs, offsets = [], []
    for h in HS:
        mesh = build_half_disc(1.0, h)
        u, rep = solve_thin_obstacle(mesh, G_LINEAR, BoundaryData("signorini_trace"))
        errs.append(float(np.max(np.abs(u - en.signorini_exact(mesh.vertices)))))
        _, x0, off = nearest_free_boundary(mesh, u)
        offsets.append(off / h)
    beta = rg.holder_fit(mesh, u, x0).beta  # finest mesh: the only one with three radii above 4h
    secs = time.perf_counter() - t0
    ok = (all(a > b for a, b in zip(errs, errs[1:])) and errs[-1] <= TOL_SIGNORINI_SUP
          and BETA_RANGE[0] <= beta <= BETA_RANGE[1] and max(offsets) <= FB_FACTOR
          and secs < MAX_SECONDS_SIGNORINI)
    assert record(2, ok, f"errors {', '.join(f'{e:.2e}' for e in errs)} (decreasing, last <= "
                         f"{TOL_SIGNORINI_SUP:g}), beta {beta:.3f} in {list(BETA_RANGE)}, "
                         f"free-boundary offset/h {max(offsets):.2f} (<= {FB_FACTOR:g}), {secs:.1f}s")


def test_criterion_3_nonhomogeneous():
    parts, ok = [], True
    for name, f in NONHOMOGENEOUS.items():
        Cs, conv = [], []
        for h in (0.04, 0.02):
            mesh = build_half_disc(1.0, h)
            u, rep = solve_thin_obstacle(mesh, f, BoundaryData("signorini_trace"))
            conv.append(rep.converged and rep.kkt["ok"])
            fb, x0, _ = nearest_free_boundary(mesh, u)
            Cs.append(rg.distance_law_fit(mesh, u, fb).C)
        beta = rg.holder_fit(mesh, u, x0).beta
        drift = abs(Cs[1] - Cs[0]) / abs(Cs[0])
        good = all(conv) and 0 < beta < 1 and all(map(math.isfinite, Cs)) and drift <= ENVELOPE_STABILITY
        ok &= good
        parts.append(f"{name}: kkt ok {all(conv)}, beta {beta:.3f}, C {Cs[0]:.3f}->{Cs[1]:.3f} "
                     f"(drift {drift:.1%} <= {ENVELOPE_STABILITY:.0%})")
    assert record(3, ok, "; ".join(parts))


def test_criterion_4_degiorgi():
    rng = np.random.default_rng(4)
    mesh = build_half_disc(1.0, 0.04)
    parts, ok = [], True
    fams = {"t": G_LINEAR, **NONHOMOGENEOUS}
    for name, f in fams.items():
        u, _ = solve_thin_obstacle(mesh, f, BoundaryData("signorini_trace"))
        v = en.vertex_gradient(mesh, u)[:, 0]
        vmax = float(v.max())
        res = [rg.caccioppoli_check(mesh, u, f, 0, c * vmax, 0.25, 0.5, factor=CACCIOPPOLI_FACTOR)
               for c in LEVEL_FRACTIONS]
        mono = True
        for _ in range(N_MONOTONE_PROBES):
            k1, k2 = np.sort(rng.uniform(v.min(), vmax, 2))
            r1, r2 = np.sort(rng.uniform(0.05, 1.0, 2))
            m11 = rg.level_measure(mesh, v, k1, r1).measure
            mono &= rg.level_measure(mesh, v, k2, r1).measure <= m11
            mono &= rg.level_measure(mesh, v, k1, r2).measure >= m11
        good = all(r.passed for r in res) and mono
        ok &= good
        parts.append(f"g={name}: lhs/rhs " + ", ".join(f"{r.lhs / r.rhs:.2e}" if r.rhs else "0/0" for r in res)
                     + f", monotone {mono}")
    assert record(4, ok, "; ".join(parts))


def test_criterion_5_iteration_lemmas():
    rng = np.random.default_rng(5)
    v1, v2 = {}, {}
    for _ in range(N_LEMMA_INSTANCES):
        a = rg.check_pre1(**rg.random_pre1_instance(rng))
        b = rg.check_pre2(**rg.random_pre2_instance(rng))
        v1[a] = v1.get(a, 0) + 1
        v2[b] = v2.get(b, 0) + 1
    seq = rg.pre2_extremal_sequence(1.0, 2.0, 1.0, 0.25, 30)
    exact = bool(np.array_equal(seq, 2.0 ** -np.arange(30) / 4))
    ok = (v1.get("conclusion_violated", 0) == 0 and v2.get("conclusion_violated", 0) == 0 and exact
          and rg.check_pre2(seq, 1.0, 2.0, 1.0) == "conclusion_holds")
    assert record(5, ok, f"pre1 {v1}, pre2 {v2}, equality case exact {exact}")


def test_criterion_6_extension():
    mesh = build_half_disc(1.0, 0.04)
    parts, ok = [], True
    for phi in (BoundaryData("constant"), BoundaryData("linear"), BoundaryData("signorini_trace")):
        rep, u_half, _ = even_extension_solve(mesh, G_LINEAR, phi)
        ident, half, full = energy_identity_holds(mesh, u_half, G_LINEAR, rtol=ENERGY_RATIO_RTOL)
        good = rep.discrepancy_sup <= rep.bound and ident
        ok &= good
        ratio = f"{full / half:.15f}" if half > 0 else "0/0"
        parts.append(f"{phi.kind}: discrepancy {rep.discrepancy_sup:.2e} <= {rep.bound:.2e}, ratio {ratio}")
    assert record(6, ok, "; ".join(parts))


def test_criterion_7_nfunction_algebra():
    rng = np.random.default_rng(7)
    parts, ok = [], True
    grid = default_t_grid()
    for name, (f, _) in ck.algebra_examples().items():
        expected = LIEBERMAN[name]
        lo, hi = lieberman_estimate(f, grid)
        match = abs(lo - expected[0]) <= LIEBERMAN_TOL and abs(hi - expected[1]) <= LIEBERMAN_TOL
        t = 10 ** rng.uniform(-3, 3, N_ENVELOPE_PAIRS)
        s = 10 ** rng.uniform(-3, 3, N_ENVELOPE_PAIRS)
        gts, gs = f.g(t * s), f.g(s)
        env = bool(np.all(gts >= np.minimum(t ** f.delta0, t ** f.g0) * gs * (1 - ENVELOPE_RTOL))
                   and np.all(gts <= np.maximum(t ** f.delta0, t ** f.g0) * gs * (1 + ENVELOPE_RTOL)))
        ok &= match and env
        parts.append(f"{name}: ({lo:.4f}, {hi:.4f}) vs {expected}{'' if match else ' MISMATCH'}, envelope {env}")
    assert record(7, ok, f"grid 1e-6..1e6 x{grid.size}, tol {LIEBERMAN_TOL}; " + "; ".join(parts))


def test_criterion_8_structural():
    rng = np.random.default_rng(8)
    suites = [ck.check_comparison(), ck.check_symmetry(), ck.check_normalization(Ks=(0.5, 2.0, 10.0)),
              ck.check_energy_optimality(rng)]
    worst = 0.0
    lam_ok = True
    for f in ck.catalog_functions().values():
        p = rng.normal(size=(N_ELLIPTIC_STATES, 2)) * 10 ** rng.uniform(-3, 3, (N_ELLIPTIC_STATES, 1))
        ev = np.linalg.eigvalsh(en.linearized_coefficients(f, p))
        lo, hi = min(1.0, f.delta0), max(1.0, f.g0)
        lam_ok &= bool(np.all(ev >= lo * (1 - 1e-10)) and np.all(ev <= hi * (1 + 1e-10)))
        worst = max(worst, float(np.max(ev)))
    ok = all(s.passed for s in suites) and lam_ok
    assert record(8, ok, ", ".join(f"{s.name} {'ok' if s.passed else 'FAIL'}" for s in suites)
                  + f", a^ij bounds {'ok' if lam_ok else 'FAIL'} ({N_ELLIPTIC_STATES} states per g)")


def test_criterion_9_nodal():
    h = 0.02
    mesh = build_half_disc(1.0, h)
    u, _ = solve_thin_obstacle(mesh, G_LINEAR, BoundaryData("signorini_trace"))
    n1 = nodal_set(mesh, u)
    thin = set(np.flatnonzero(mesh.tag_mask(VertexTag.THIN)).tolist())
    on_thin = n1.ids() <= thin
    near = float(np.min(np.linalg.norm(n1.points, axis=1))) if len(n1) else math.inf
    dom = stratify(n1, 8 * h)["dominant"] if len(n1) else None
    ok = len(n1) > 0 and on_thin and near > FB_FACTOR * h and dom == 1
    assert record(9, ok, f"{len(n1)} points, on thin boundary {on_thin}, min |x| {near / h:.1f}h "
                         f"(> {FB_FACTOR:g}h), dominant dimension {dom}")


if __name__ == "__main__":
    for name, fn in sorted((k, v) for k, v in dict(globals()).items() if k.startswith("test_criterion_")):
        try:
            fn()
        except AssertionError:
            pass
    print("\n".join(verdict_lines()))
