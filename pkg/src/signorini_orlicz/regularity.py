"""Regularity diagnostics: Lipschitz and Hoelder fits, De Giorgi inequalities.

The level-set quantities use ``A(k) = {v >= k}`` for a vertex field ``v``
obtained from a derivative of ``u`` by area-weighted recovery.  Integrals
of ``((v - k)^+)^2`` use the three edge-midpoint rule; indicator sets use
the value at the centroid.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import energy as en
from .errors import DomainError, InputError
from .mesh import ball_patch

__all__ = [
    "RegularityReport",
    "LevelSetStats",
    "lipschitz_ratio",
    "fit_power_law",
    "dyadic_radii",
    "holder_fit",
    "distance_law_fit",
    "degiorgi_constants",
    "iteration_constant",
    "caccioppoli_check",
    "level_measure",
    "level_set_profile",
    "sup_bound_alpha",
    "sup_bound_check",
    "check_pre1",
    "check_pre2",
    "pre2_extremal_sequence",
    "random_pre1_instance",
    "random_pre2_instance",
]


@dataclass
class RegularityReport:
    beta: float
    C: float
    radii: list
    residual: float
    values: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def ok(self):
        return not ({"insufficient_radii", "empty_free_boundary"} & set(self.flags))

    def to_dict(self):
        return {"beta": _json_float(self.beta), "C": _json_float(self.C),
                "radii": [float(r) for r in self.radii], "residual": _json_float(self.residual),
                "values": [float(v) for v in self.values], "flags": list(self.flags)}


@dataclass(frozen=True)
class LevelSetStats:
    k: float
    r: float
    measure: float


def _json_float(x):
    return None if x is None or not np.isfinite(x) else float(x)


def _midpoint_values(mesh, v):
    """Values at the three edge midpoints of each triangle, shape (M, 3)."""
    vt = v[mesh.triangles]
    return 0.5 * (vt + np.roll(vt, -1, axis=1))


def _positive_part_sq_integral(mesh, v, k, tri_ids):
    mids = _midpoint_values(mesh, v)[tri_ids]
    return float(np.sum(mesh.areas[tri_ids] * np.mean(np.maximum(mids - k, 0.0) ** 2, axis=1)))


def lipschitz_ratio(mesh, u, r=0.75):
    """``sup_{B_r^+} |grad u| / sup |u|``; infinite when ``u`` vanishes."""
    u = en.check_field(mesh, u)
    denom = float(np.max(np.abs(u)))
    patch = ball_patch(mesh, (0.0, 0.0), r * mesh.radius)
    t = en.gradient_norms(mesh, u)[patch.triangle_ids]
    num = float(np.max(t, initial=0.0))
    if denom < 1e-300:
        return math.inf
    return num / denom


def fit_power_law(r, y):
    """Least squares ``log y = log C + beta log r``; returns ``(beta, C, residual)``.

    ``residual`` is the largest absolute log-residual.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    if r.size < 2 or np.any(r <= 0) or np.any(y <= 0):
        raise DomainError("power-law fit needs at least two positive (r, y) pairs")
    X = np.column_stack([np.ones_like(r), np.log(r)])
    coef, *_ = np.linalg.lstsq(X, np.log(y), rcond=None)
    resid = np.log(y) - X @ coef
    return float(coef[1]), float(np.exp(coef[0])), float(np.max(np.abs(resid)))


def dyadic_radii(h, r_max=0.5, min_factor=4.0):
    """Dyadic radii ``r_max, r_max/2, ...`` down to the last one ``>= min_factor*h``."""
    out = []
    r = r_max
    while r >= min_factor * h * (1 - 1e-12):
        out.append(r)
        r *= 0.5
    return out


def holder_fit(mesh, u, x0=(0.0, 0.0), radii=None, min_factor=4.0):
    """Fit ``sup_{B_r^+(x0)} |grad u| ~ C r^beta`` over dyadic radii.

    Radii below ``min_factor * h`` are discarded and flagged.  A slope with
    ``|beta| < 1e-6`` is flagged as degenerate.
    """
    u = en.check_field(mesh, u)
    h = mesh.h_target
    if radii is None:
        radii = dyadic_radii(h, 0.5 * mesh.radius, min_factor)
    radii = [float(r) for r in radii]
    flags = []
    admitted = [r for r in radii if r >= min_factor * h * (1 - 1e-12)]
    if len(admitted) < len(radii):
        flags.append("radii_below_resolution")
    t = en.gradient_norms(mesh, u)
    sups = []
    for r in admitted:
        ids = ball_patch(mesh, x0, r).triangle_ids
        sups.append(float(np.max(t[ids], initial=0.0)))
    if len(admitted) < 3:
        flags.append("insufficient_radii")
        return RegularityReport(math.nan, math.nan, admitted, math.nan, sups, flags)
    if min(sups) <= 0:
        flags.append("zero_gradient")
        return RegularityReport(math.nan, 0.0, admitted, math.nan, sups, flags)
    beta, C, res = fit_power_law(admitted, sups)
    if abs(beta) < 1e-6:
        flags.append("degenerate_slope")
    return RegularityReport(beta, C, admitted, res, sups, flags)


def distance_law_fit(mesh, u, free_boundary, region_radius=0.5, n_bins=20, quantile=95.0,
                     min_per_bin=3):
    """Upper-envelope fit ``|grad u|_T <= C dist(c_T, FB)^beta``.

    ``free_boundary`` is an (P, 2) array (or a point set with ``.points``).
    Triangles inside ``B_{region_radius}^+`` are binned by distance into
    ``n_bins`` log-spaced bins; the ``quantile`` of each bin is regressed.
    """
    pts = getattr(free_boundary, "points", free_boundary)
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        return RegularityReport(math.nan, math.nan, [], math.nan, [], ["empty_free_boundary"])
    u = en.check_field(mesh, u)
    ids = ball_patch(mesh, (0.0, 0.0), region_radius * mesh.radius).triangle_ids
    c = mesh.centroids[ids]
    d = np.min(np.linalg.norm(c[:, None, :] - pts[None, :, :], axis=2), axis=1)
    t = en.gradient_norms(mesh, u)[ids]
    keep = d > 0
    d, t = d[keep], t[keep]
    edges = np.geomspace(d.min(), d.max() * (1 + 1e-12), n_bins + 1)
    which = np.clip(np.searchsorted(edges, d, side="right") - 1, 0, n_bins - 1)
    dist, env = [], []
    for b in range(n_bins):
        sel = which == b
        if np.count_nonzero(sel) < min_per_bin:
            continue
        q = float(np.percentile(t[sel], quantile))
        if q > 0:
            dist.append(float(np.exp(np.mean(np.log(d[sel])))))
            env.append(q)
    if len(dist) < 3:
        return RegularityReport(math.nan, math.nan, dist, math.nan, env, ["insufficient_radii"])
    beta, C, res = fit_power_law(dist, env)
    return RegularityReport(beta, C, dist, res, env, [])


def degiorgi_constants(delta0, g0, k, C1M, n=2):
    """Constants of the Caccioppoli inequality for the level ``k``.

    Returns a dict with ``ktilde``, ``C3``, ``C2`` and the internal ``lam``
    (midpoint of the admissible interval ``(sqrt(q), 1)``, ``q = C3/(C3+ktilde)``).
    """
    if not k > 0:
        raise DomainError(f"level k must be positive, got {k}")
    lam_e, Lam_e = min(1.0, delta0), max(1.0, g0)
    ktilde = min(k ** (1 + delta0), k ** (1 + g0))
    C3 = Lam_e * n * n / lam_e * max(C1M ** (1 + g0), C1M ** (1 + delta0))
    q = C3 / (C3 + ktilde)
    lam = 0.5 * (math.sqrt(q) + 1.0)
    C2 = 1.0 / ((1.0 - lam) * (1.0 - q / lam ** 2))
    return {"ktilde": ktilde, "C3": C3, "C2": C2, "lam": lam, "eta": q}


def iteration_constant(alpha, eta):
    """``C(alpha, eta) = (1-lam)^-alpha (1 - eta lam^-alpha)^-1``, lam mid of ``(eta^{1/alpha}, 1)``."""
    lam = 0.5 * (eta ** (1.0 / alpha) + 1.0)
    return (1.0 - lam) ** (-alpha) / (1.0 - eta * lam ** (-alpha)), lam


def _derivative_field(mesh, u, direction):
    return en.vertex_gradient(mesh, u)[:, direction]


@dataclass
class CaccioppoliResult:
    lhs: float
    rhs: float
    C2: float
    C3: float
    ktilde: float
    passed: bool
    factor: float = 1.1

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "C2": self.C2, "C3": self.C3,
                "ktilde": self.ktilde, "pass": bool(self.passed)}


def caccioppoli_check(mesh, u, f, direction=0, k=1.0, s=0.25, t=0.5, C1M=None, factor=1.1, n=2):
    """Both sides of the Caccioppoli inequality for ``v = d u / d x_{direction+1}``.

    ``C1M`` defaults to ``sup_{B_{3/4}^+} |grad u|``, the measured product
    of the Lipschitz constant and ``||u||_inf``.
    """
    if not k > 0:
        raise DomainError(f"level k must be positive, got {k}")
    if not 0 < s < t < 0.75:
        raise DomainError(f"need 0 < s < t < 3/4, got s={s}, t={t}")
    u = en.check_field(mesh, u)
    if C1M is None:
        C1M = lipschitz_ratio(mesh, u) * float(np.max(np.abs(u)))
    v = _derivative_field(mesh, u, direction)
    consts = degiorgi_constants(f.delta0, f.g0, k, C1M, n)
    gv = en.gradient_norms(mesh, v) ** 2
    in_s = ball_patch(mesh, (0.0, 0.0), s).triangle_ids
    cen = v[mesh.triangles].mean(axis=1)
    sel = in_s[cen[in_s] >= k]
    lhs = float(np.sum(mesh.areas[sel] * gv[sel]))
    in_t = ball_patch(mesh, (0.0, 0.0), t).triangle_ids
    integral = _positive_part_sq_integral(mesh, v, k, in_t)
    kt, C3, C2 = consts["ktilde"], consts["C3"], consts["C2"]
    rhs = C2 / (t - s) ** 2 * (2 * kt * C3 + C3 * C3) / kt ** 2 * integral
    return CaccioppoliResult(lhs=lhs, rhs=float(rhs), C2=C2, C3=C3, ktilde=kt,
                             passed=bool(lhs <= rhs * factor), factor=factor)


def level_measure(mesh, v, k, r, center=(0.0, 0.0)):
    """Area of ``{v >= k} ∩ B_r^+`` by the centroid rule."""
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    v = en.check_field(mesh, v)
    ids = ball_patch(mesh, center, r).triangle_ids
    cen = v[mesh.triangles[ids]].mean(axis=1)
    return LevelSetStats(k=float(k), r=float(r), measure=float(np.sum(mesh.areas[ids][cen >= k])))


def level_set_profile(mesh, v, r, ks):
    """Measures of ``A(k) ∩ B_r^+`` for increasing ``k``, with the ball area."""
    stats = [level_measure(mesh, v, k, r) for k in ks]
    total = ball_patch(mesh, (0.0, 0.0), r).area(mesh)
    return {"r": float(r), "ball_area": total, "k": [s.k for s in stats],
            "measure": [s.measure for s in stats],
            "fraction": [s.measure / total if total > 0 else 0.0 for s in stats]}


def sup_bound_alpha(n=2):
    """Positive root of ``alpha^2 + alpha - 2/n = 0``."""
    return 0.5 * (-1.0 + math.sqrt(1.0 + 8.0 / n))


@dataclass
class SupBoundResult:
    lhs_sup: float
    rhs_value: float
    alpha: float
    passed: bool

    @property
    def slack(self):
        return self.rhs_value - self.lhs_sup

    def to_dict(self):
        return {"lhs_sup": self.lhs_sup, "rhs_value": self.rhs_value, "alpha": self.alpha,
                "pass": bool(self.passed), "slack": self.slack}


def sup_bound_check(mesh, v, k0, rho, C4, n=2):
    """Compare ``sup_{B_{rho/2}^+} v`` with the level-set bound of radius ``rho``."""
    if not k0 > 0:
        raise DomainError(f"k0 must be positive, got {k0}")
    if not 0 < rho < 0.75:
        raise DomainError(f"need 0 < rho < 3/4, got {rho}")
    v = en.check_field(mesh, v)
    alpha = sup_bound_alpha(n)
    half = ball_patch(mesh, (0.0, 0.0), rho / 2)
    verts = np.unique(mesh.triangles[half.triangle_ids])
    lhs = float(np.max(v[verts])) if verts.size else -math.inf
    ids = ball_patch(mesh, (0.0, 0.0), rho).triangle_ids
    integral = _positive_part_sq_integral(mesh, v, k0, ids)
    measure = level_measure(mesh, v, k0, rho).measure
    rhs = C4 * math.sqrt(integral / rho ** n) * (measure / rho ** n) ** (alpha / 2) + k0
    return SupBoundResult(lhs_sup=lhs, rhs_value=float(rhs), alpha=alpha, passed=bool(lhs <= rhs))


def check_pre1(z_samples, A, B, C, alpha, beta, eta, rtol=1e-12):
    """Verdict for the iteration lemma on sampled ``(t, z(t))`` pairs.

    The hypothesis ``z(t) <= A|s-t|^-alpha + B|s-t|^-beta + C + eta z(s)`` is
    checked for every sampled ``t < s``; if it holds, the conclusion at
    ``rho = min t`` is checked against ``C(alpha, eta)``.
    """
    zs = np.asarray(z_samples, dtype=float)
    if zs.ndim != 2 or zs.shape[1] != 2 or zs.shape[0] < 2:
        raise InputError("z_samples must be a list of at least two (t, z) pairs")
    if not np.all(np.isfinite(zs)) or np.any(zs[:, 1] < 0):
        raise InputError("z values must be finite and nonnegative")
    if not (alpha > beta > 0) or not (0 < eta < 1) or min(A, B, C) < 0:
        raise InputError("need alpha > beta > 0, eta in (0, 1) and A, B, C >= 0")
    order = np.argsort(zs[:, 0], kind="stable")
    t, z = zs[order, 0], zs[order, 1]
    if np.any(np.diff(t) <= 0):
        raise InputError("sample abscissae must be distinct")
    gap = t[None, :] - t[:, None]  # gap[i, j] = t_j - t_i
    upper = gap > 0
    safe = np.where(upper, gap, 1.0)
    bound = np.where(upper, A * safe ** (-alpha) + B * safe ** (-beta), 0.0)
    bound = bound + C + eta * z[None, :]
    lhs = np.broadcast_to(z[:, None], bound.shape)
    if np.any(upper & (lhs > bound * (1 + rtol) + rtol)):
        return "hypothesis_violated"
    rho, R = t[0], t[-1]
    const, _ = iteration_constant(alpha, eta)
    rhs = const * (A * (R - rho) ** (-alpha) + B * (R - rho) ** (-beta) + C)
    return "conclusion_holds" if z[0] <= rhs * (1 + rtol) + rtol else "conclusion_violated"


def check_pre2(psi=None, C=1.0, B=2.0, alpha=1.0, log_psi=None, rtol=1e-12):
    """Verdict for the geometric-decay lemma on a positive sequence.

    Work is done in log space; pass ``log_psi`` directly for sequences that
    would underflow.  Verdicts: ``hypothesis_violated``,
    ``threshold_violated``, ``conclusion_holds``, ``conclusion_violated``.
    """
    if (psi is None) == (log_psi is None):
        raise InputError("pass exactly one of psi and log_psi")
    if not (C > 0 and B > 1 and alpha > 0):
        raise InputError("need C > 0, B > 1 and alpha > 0")
    if log_psi is None:
        psi = np.asarray(psi, dtype=float)
        if psi.ndim != 1 or psi.size == 0:
            raise InputError("psi must be a nonempty sequence")
        if np.any(~np.isfinite(psi)) or np.any(psi <= 0):
            raise InputError("psi entries must be positive and finite")
        lp = np.log(psi)
    else:
        lp = np.asarray(log_psi, dtype=float)
        if lp.ndim != 1 or lp.size == 0 or np.any(~np.isfinite(lp)):
            raise InputError("log_psi must be a nonempty finite sequence")
    lC, lB = math.log(C), math.log(B)
    i = np.arange(1, lp.size)

    def leq(a, b):
        return a <= b + rtol * (1.0 + np.abs(b))

    if not np.all(leq(lp[1:], lC + i * lB + (1 + alpha) * lp[:-1])):
        return "hypothesis_violated"
    if not leq(lp[0], -lC / alpha - (1 + alpha) / alpha ** 2 * lB):
        return "threshold_violated"
    ii = np.arange(lp.size)
    ok = leq(lp, lp[0] - ii / alpha * lB)
    return "conclusion_holds" if np.all(ok) else "conclusion_violated"


def pre2_extremal_sequence(C, B, alpha, psi1, n):
    """``psi_{i+1} = C B^i psi_i^{1+alpha}`` started at ``psi1``."""
    out = [float(psi1)]
    for i in range(1, n):
        out.append(C * B ** i * out[-1] ** (1 + alpha))
    return np.array(out)


def random_pre1_instance(rng, n_samples=24):
    """A bounded ``z`` on ``[rho, R]`` satisfying the hypothesis on the whole interval.

    Two families: nondecreasing ``z`` with ``C >= (1-eta) sup z``, and
    arbitrary ``z`` below the smallest right-hand side.  Both satisfy the
    hypothesis for every ``t < s``, not only at the samples.
    """
    rho = rng.uniform(0.0, 1.0)
    R = rho + rng.uniform(0.05, 2.0)
    t = np.sort(rng.uniform(rho, R, n_samples - 2))
    t = np.concatenate([[rho], t, [R]])
    beta = rng.uniform(0.1, 2.0)
    alpha = beta + rng.uniform(0.05, 2.0)
    eta = rng.uniform(0.01, 0.99)
    A = rng.uniform(0, 2) * (rng.random() < 0.7)
    B = rng.uniform(0, 2) * (rng.random() < 0.7)
    if rng.random() < 0.5:
        z = np.cumsum(rng.exponential(1.0, t.size)) * 10 ** rng.uniform(-3, 3)
        C = (1 - eta) * z.max() * rng.uniform(1.0, 2.0)
    else:
        C = 10 ** rng.uniform(-3, 2)
        floor = A * (R - rho) ** (-alpha) + B * (R - rho) ** (-beta) + C
        z = floor * rng.uniform(0, 1, t.size)
    return {"z_samples": np.column_stack([t, z]), "A": A, "B": B, "C": C,
            "alpha": alpha, "beta": beta, "eta": eta}


def random_pre2_instance(rng, max_len=25):
    """Log-space sequence satisfying the recursion and the smallness threshold.

    Entries are built as ``line_i + e_i`` where ``line_i`` is the extremal
    sequence at the threshold and ``e_i = (1 + alpha) e_{i-1} - X_i`` with
    ``X_i >= 0``.  Running the recursion forward instead would amplify
    rounding by ``(1 + alpha)^i``.
    """
    alpha = rng.uniform(0.1, 3.0)
    B = 1.0 + 10 ** rng.uniform(-2, 1)
    C = 10 ** rng.uniform(-3, 3)
    lC, lB = math.log(C), math.log(B)
    n = int(rng.integers(1, max_len + 1))
    thr = -lC / alpha - (1 + alpha) / alpha ** 2 * lB
    e = np.empty(n)
    e[0] = -rng.exponential(1.0) * (rng.random() < 0.8)
    for i in range(1, n):
        e[i] = (1 + alpha) * e[i - 1] - rng.exponential(1.0) * (rng.random() < 0.5)
    lp = thr - np.arange(n) / alpha * lB + e
    return {"log_psi": lp, "C": C, "B": B, "alpha": alpha}
