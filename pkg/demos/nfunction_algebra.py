"""
N-functions and their growth indices
====================================

Every N-function carries assigned constants ``delta0 <= t g'(t)/g(t) <= g0``.
The catalog families and the closure operations fix those constants
symbolically; ``lieberman_estimate`` measures the ratio on a grid.
"""

import numpy as np

from signorini_orlicz.mesh import build_half_disc
from signorini_orlicz.orlicz import (combine, default_t_grid, lieberman_estimate, luxemburg_norm,
                                     make_nfunction, modular, normalized)

t1, t2, t3 = (make_nfunction("power", [p]) for p in (1, 2, 3))
examples = {
    "t": t1,
    "t^2 log(1+t)": make_nfunction("power_log", {"a": 2, "b": 1, "c": 1}),
    "2t + 3t^3": make_nfunction("double_power", {"a": 2, "b": 3, "p": 1, "q": 3}),
    "t * t^2": combine("product", t1, t2),
    "(t^3)^2": combine("composition", t2, t3),
    "t + t": combine("sum", t1, t1),
}

# %%
# Assigned constants next to grid estimates on [1e-6, 1e6].

grid = default_t_grid()
for name, f in examples.items():
    lo, hi = lieberman_estimate(f, grid)
    print(f"{name:14s} assigned ({f.delta0:g}, {f.g0:g})  measured ({lo:.4f}, {hi:.4f})")

# %%
# The logarithmic family is the slow one: ``t g'/g = 2 + t/((1+t) log(1+t))``
# reaches 2 only as ``1/log t``.  Stretching the grid shows the drift.

f = examples["t^2 log(1+t)"]
for top in (6, 12, 24, 48):
    lo, _ = lieberman_estimate(f, np.logspace(-6, top, 601))
    print(f"grid up to 1e{top:<3d} min ratio {lo:.4f}")

# %%
# Normalisation ``g*(t) = g(Kt)/g(K)`` keeps the constants and sets g*(1) = 1.

gK = normalized(f, 10.0)
print("g*(1) =", float(gK.g(1.0)), " constants", (gK.delta0, gK.g0))

# %%
# Modular and Luxemburg norm of a constant field on the half disc.  For
# G(t) = t^2/2 and h = 2 the norm is 2 sqrt(|D|/2), close to sqrt(pi).

mesh = build_half_disc(1.0, 0.05)
h = np.full(mesh.n_vertices, 2.0)
print(f"modular {modular(mesh, h, t1):.5f}  norm {luxemburg_norm(mesh, h, t1):.5f}  "
      f"sqrt(pi) {np.sqrt(np.pi):.5f}")
