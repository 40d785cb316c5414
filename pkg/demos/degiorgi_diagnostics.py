"""
De Giorgi type diagnostics on a minimiser
=========================================

For ``v = u_{x1}`` the Caccioppoli inequality bounds the energy of
``(v - k)^+`` on a small ball by its L^2 mass on a larger one.  The level-set
measures and the sup bound feed the usual iteration; the two iteration
lemmas are exercised on random instances that satisfy their hypotheses.
"""

import numpy as np

from signorini_orlicz import energy as en
from signorini_orlicz import regularity as rg
from signorini_orlicz.mesh import build_half_disc
from signorini_orlicz.orlicz import make_nfunction
from signorini_orlicz.solver import BoundaryData, solve_thin_obstacle

mesh = build_half_disc(1.0, 0.04)
g = make_nfunction("power_log", [2, 1, 1])
u, rep = solve_thin_obstacle(mesh, g, BoundaryData("signorini_trace"))
v = en.vertex_gradient(mesh, u)[:, 0]
print(f"solve converged={rep.converged} in {rep.total_iterations} iterations, sup v = {v.max():.3f}")

# %%
# Caccioppoli at three levels.  The constants grow quickly with the growth
# exponents, so the right-hand side dominates by orders of magnitude.

for c in (0.25, 0.5, 1.0):
    r = rg.caccioppoli_check(mesh, u, g, 0, c * v.max(), 0.25, 0.5)
    print(f"k={c:.2f} sup v: lhs {r.lhs:.3e}  rhs {r.rhs:.3e}  C2 {r.C2:.3g}  C3 {r.C3:.3g}  pass {r.passed}")

# %%
# Level-set profile on B_{1/2}^+ and the sup bound with C4 = 10.

prof = rg.level_set_profile(mesh, v, 0.5, np.linspace(0, v.max(), 6)[1:])
for k, frac in zip(prof["k"], prof["fraction"]):
    print(f"  |A({k:.3f}) cap B| / |B| = {frac:.3f}")
sb = rg.sup_bound_check(mesh, v, 0.5 * v.max(), 0.5, 10.0)
print(f"sup bound: lhs {sb.lhs_sup:.3f} <= rhs {sb.rhs_value:.3f} (alpha {sb.alpha:.5f})")

# %%
# Iteration lemmas on random instances.

rng = np.random.default_rng(0)
for name, gen, check in (("pre1", rg.random_pre1_instance, rg.check_pre1),
                         ("pre2", rg.random_pre2_instance, rg.check_pre2)):
    counts = {}
    for _ in range(2000):
        verdict = check(**gen(rng))
        counts[verdict] = counts.get(verdict, 0) + 1
    print(name, counts)
print("extremal sequence:", rg.pre2_extremal_sequence(1.0, 2.0, 1.0, 0.25, 6))
