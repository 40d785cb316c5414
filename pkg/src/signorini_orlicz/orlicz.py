"""N-functions, Lieberman constants, modular and Luxemburg norm.

An N-function is described by its derivative ``g``; the primitive
``G(t) = int_0^t g`` is evaluated in closed form whenever the family admits
one and by adaptive Simpson quadrature otherwise.  Every ``NFunction`` carries
the pair ``(delta0, g0)`` bounding ``t g'(t) / g(t)`` from below and above.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import hyp2f1

from .errors import CatalogError, DomainError, EvaluationError, ParameterError, ShapeError

__all__ = [
    "NFunction",
    "make_nfunction",
    "combine",
    "normalized",
    "lieberman_estimate",
    "modular",
    "luxemburg_norm",
    "adaptive_simpson",
    "parse_nfunction_spec",
    "nfunction_from_mapping",
    "default_t_grid",
    "CATALOG",
]

#: parameter names of each catalog family, in positional order
CATALOG = {
    "power": ("p",),
    "power_log": ("a", "b", "c"),
    "double_power": ("a", "b", "p", "q"),
}

COMBINE_OPS = ("sum", "product", "composition", "positive_scale")

# ratios t g'/g are only evaluated above this threshold (underflow)
T_MIN_EVAL = 1e-300


def default_t_grid():
    """Log-spaced validation grid on [1e-6, 1e6] with 601 points."""
    return np.logspace(-6.0, 6.0, 601)


def adaptive_simpson(f, upper, tol=1e-12, max_depth=60):
    """Integrate ``f`` over ``[0, u]`` for every ``u`` in ``upper``.

    Vectorised adaptive Simpson: all intervals that have not met their share
    of the absolute tolerance are bisected together in each pass.  ``tol``
    may be an array broadcastable to ``upper``.  A relative
    floor of ``1e-15 * |S|`` keeps huge integrals from exhausting the depth
    budget.
    """
    upper = np.asarray(upper, dtype=float)
    shape = upper.shape
    b = upper.ravel()
    out = np.zeros(b.size)
    owner = np.flatnonzero(b > 0)
    lo = np.zeros(owner.size)
    hi = b[owner].copy()
    mid = 0.5 * (lo + hi)
    f_lo, f_mid, f_hi = f(lo), f(mid), f(hi)
    whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
    eps = np.broadcast_to(np.asarray(tol, dtype=float), shape).ravel()[owner].copy()
    depth = 0
    while owner.size:
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        f_lm, f_rm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lm + f_mid)
        right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rm + f_hi)
        both = left + right
        delta = both - whole
        done = np.abs(delta) <= 15.0 * np.maximum(eps, 1e-15 * np.abs(both))
        if depth >= max_depth:
            done[:] = True
        np.add.at(out, owner[done], (both + delta / 15.0)[done])
        keep = ~done
        owner = np.concatenate([owner[keep], owner[keep]])
        lo, mid, hi = (
            np.concatenate([lo[keep], mid[keep]]),
            np.concatenate([lm[keep], rm[keep]]),
            np.concatenate([mid[keep], hi[keep]]),
        )
        f_lo, f_mid, f_hi = (
            np.concatenate([f_lo[keep], f_mid[keep]]),
            np.concatenate([f_lm[keep], f_rm[keep]]),
            np.concatenate([f_mid[keep], f_hi[keep]]),
        )
        whole = np.concatenate([left[keep], right[keep]])
        eps = np.concatenate([eps[keep], eps[keep]]) / 2.0
        depth += 1
    return out.reshape(shape)


@dataclass(frozen=True, eq=False)
class NFunction:
    """An N-function ``G`` given through ``g = G'`` and ``g'``.

    Instances are immutable; evaluation methods are vectorised over numpy
    arrays and accept scalars.
    """

    kind: str
    params: dict
    delta0: float
    g0: float
    primitive_mode: str
    _g: Callable = field(repr=False)
    _dg: Callable = field(repr=False)
    _G: Optional[Callable] = field(default=None, repr=False)
    operands: tuple = field(default=(), repr=False)

    def g(self, t):
        return self._g(np.asarray(t, dtype=float))

    def dg(self, t):
        return self._dg(np.asarray(t, dtype=float))

    def G(self, t):
        t = np.asarray(t, dtype=float)
        if self.primitive_mode == "closed_form":
            return self._G(t)
        # G(t) >= t g(t) / (g0 + 1) gives a relative tolerance
        with np.errstate(invalid="ignore", over="ignore"):
            scale = np.where(t > 0, t * self._g(t) / (self.g0 + 1.0), 0.0)
        return adaptive_simpson(self._g, t, tol=np.maximum(1e-13 * scale, 1e-300))

    def ratio(self, t):
        """``t g'(t) / g(t)``."""
        t = np.asarray(t, dtype=float)
        return t * self.dg(t) / self.g(t)

    def flux_coefficient(self, t, epsilon=0.0):
        """Regularised ``g(s)/s`` with ``s = sqrt(t^2 + epsilon^2)``.

        With ``epsilon == 0`` entries below ``1e-300`` get coefficient 0.
        """
        t = np.asarray(t, dtype=float)
        s = np.sqrt(t * t + epsilon * epsilon) if epsilon > 0 else t
        out = np.zeros_like(s)
        ok = s > T_MIN_EVAL
        out[ok] = self._g(s[ok]) / s[ok]
        return out

    def describe(self):
        d = {"kind": self.kind, "delta0": self.delta0, "g0": self.g0,
             "primitive_mode": self.primitive_mode}
        d.update({k: v for k, v in self.params.items() if k != "operands"})
        if self.operands:
            d["operands"] = [op.describe() for op in self.operands]
        return d


def _check_positive(params, names):
    for name in names:
        value = params[name]
        if not np.isfinite(value) or value <= 0:
            raise ParameterError(f"parameter {name} must be positive, got {value}", name=name)


def _power_log_primitive(a, b, c):
    ks = np.arange(1, 80, dtype=float)

    def G(t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.zeros(flat.size)
        z = b * flat / c
        small = (z < 0.5) & (flat > 0)
        if small.any():
            ts, zs = flat[small], z[small][:, None]
            series = np.sum((-1.0) ** (ks + 1) * zs ** ks / (ks * (a + 1 + ks)), axis=1)
            out[small] = ts ** (a + 1) * (np.log(c) / (a + 1) + series)
        large = z >= 0.5
        if large.any():
            tl = flat[large]
            out[large] = (tl ** (a + 1) / (a + 1) * np.log(b * tl + c)
                          - b / (a + 1) * tl ** (a + 2) / (c * (a + 2))
                          * hyp2f1(1.0, a + 2.0, a + 3.0, -b * tl / c))
        return out.reshape(t.shape) if t.shape else out[0]

    return G


def make_nfunction(kind, params, primitive_mode=None):
    """Build a catalog N-function.

    ``params`` is a mapping of named parameters or a sequence in the order of
    ``CATALOG[kind]``.  ``primitive_mode="quadrature"`` forces numerical
    integration of ``G`` even when a closed form exists.
    """
    if kind not in CATALOG:
        raise CatalogError(f"unknown N-function kind {kind!r}; expected one of {sorted(CATALOG)}")
    names = CATALOG[kind]
    if isinstance(params, dict):
        missing = [n for n in names if n not in params]
        if missing:
            raise ParameterError(f"{kind} requires parameters {names}, missing {missing}",
                                 name=missing[0])
        extra = [k for k in params if k not in names]
        if extra:
            raise ParameterError(f"{kind} does not take parameter {extra[0]!r}", name=extra[0])
        vals = {n: float(params[n]) for n in names}
    else:
        params = list(params)
        if len(params) != len(names):
            raise ParameterError(f"{kind} takes {len(names)} parameters {names}")
        vals = {n: float(v) for n, v in zip(names, params)}
    _check_positive(vals, names)

    if kind == "power":
        p = vals["p"]
        g = lambda t: t ** p
        dg = lambda t: p * t ** (p - 1.0)
        G = lambda t: t ** (p + 1.0) / (p + 1.0)
        d0 = g0 = p
    elif kind == "power_log":
        a, b, c = vals["a"], vals["b"], vals["c"]
        if c < 1.0:
            # log(bt + c) < 0 near t = 0, so g would be negative there
            raise ParameterError(f"power_log requires c >= 1 (g must be positive), got c={c}",
                                 name="c")
        g = lambda t: t ** a * np.log(b * t + c)
        dg = lambda t: a * t ** (a - 1.0) * np.log(b * t + c) + b * t ** a / (b * t + c)
        G = _power_log_primitive(a, b, c)
        d0, g0 = a, a + 1.0
    else:
        a, b, p, q = vals["a"], vals["b"], vals["p"], vals["q"]
        g = lambda t: a * t ** p + b * t ** q
        dg = lambda t: a * p * t ** (p - 1.0) + b * q * t ** (q - 1.0)
        G = lambda t: a * t ** (p + 1.0) / (p + 1.0) + b * t ** (q + 1.0) / (q + 1.0)
        d0, g0 = min(p, q), max(p, q)

    mode = primitive_mode or "closed_form"
    if mode not in ("closed_form", "quadrature"):
        raise ParameterError(f"unknown primitive_mode {mode!r}", name="primitive_mode")
    return NFunction(kind=kind, params=vals, delta0=float(d0), g0=float(g0),
                     primitive_mode=mode, _g=g, _dg=dg, _G=G)


def combine(op, f1, f2=None, *, scale=None):
    """Combine N-functions; constants follow the closure rules for the growth bounds.

    ``sum`` uses the envelope ``(min delta0, max g0)``, ``product`` adds the
    constants, ``composition`` (``g1(g2(t))``) multiplies them and
    ``positive_scale`` keeps them.
    """
    if op not in COMBINE_OPS:
        raise CatalogError(f"unknown combine op {op!r}; expected one of {COMBINE_OPS}")
    closed = f1.primitive_mode == "closed_form" and (f2 is None or f2.primitive_mode == "closed_form")
    if op == "positive_scale":
        if scale is None or not np.isfinite(scale) or scale <= 0:
            raise ParameterError(f"positive_scale needs scale > 0, got {scale}", name="scale")
        c = float(scale)
        return NFunction(kind="combined", params={"op": op, "scale": c},
                         delta0=f1.delta0, g0=f1.g0,
                         primitive_mode="closed_form" if closed else "quadrature",
                         _g=lambda t: c * f1._g(t), _dg=lambda t: c * f1._dg(t),
                         _G=(lambda t: c * f1._G(t)) if closed else None, operands=(f1,))
    if f2 is None:
        raise ParameterError(f"{op} needs two operands", name="f2")
    if op == "sum":
        return NFunction(kind="combined", params={"op": op},
                         delta0=min(f1.delta0, f2.delta0), g0=max(f1.g0, f2.g0),
                         primitive_mode="closed_form" if closed else "quadrature",
                         _g=lambda t: f1._g(t) + f2._g(t), _dg=lambda t: f1._dg(t) + f2._dg(t),
                         _G=(lambda t: f1._G(t) + f2._G(t)) if closed else None,
                         operands=(f1, f2))
    if op == "product":
        return NFunction(kind="combined", params={"op": op},
                         delta0=f1.delta0 + f2.delta0, g0=f1.g0 + f2.g0,
                         primitive_mode="quadrature",
                         _g=lambda t: f1._g(t) * f2._g(t),
                         _dg=lambda t: f1._dg(t) * f2._g(t) + f1._g(t) * f2._dg(t),
                         operands=(f1, f2))
    return NFunction(kind="combined", params={"op": op},
                     delta0=f1.delta0 * f2.delta0, g0=f1.g0 * f2.g0,
                     primitive_mode="quadrature",
                     _g=lambda t: f1._g(f2._g(t)),
                     _dg=lambda t: f1._dg(f2._g(t)) * f2._dg(t),
                     operands=(f1, f2))


def normalized(f, K):
    """``g*(t) = g(K t) / g(K)``; same Lieberman constants as ``f``."""
    K = float(K)
    if not np.isfinite(K) or K <= 0:
        raise ParameterError(f"normalisation constant must be positive, got {K}", name="K")
    gK = float(f.g(K))
    closed = f.primitive_mode == "closed_form"
    return NFunction(kind="combined", params={"op": "normalize", "K": K},
                     delta0=f.delta0, g0=f.g0,
                     primitive_mode="closed_form" if closed else "quadrature",
                     _g=lambda t: f._g(K * t) / gK, _dg=lambda t: K * f._dg(K * t) / gK,
                     _G=(lambda t: f._G(K * t) / (K * gK)) if closed else None,
                     operands=(f,))


def lieberman_estimate(f, t_grid=None):
    """Return ``(min, max)`` of ``t g'(t)/g(t)`` over a sorted positive grid."""
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float).ravel()
    if t.size == 0:
        raise DomainError("t_grid is empty")
    if not np.all(np.isfinite(t)) or np.any(t <= 0):
        raise DomainError("t_grid must contain finite strictly positive values")
    if np.any(t < T_MIN_EVAL):
        raise DomainError(f"t_grid values below {T_MIN_EVAL} are not evaluated")
    if np.any(np.diff(t) < 0):
        raise DomainError("t_grid must be sorted")
    gt = f.g(t)
    if np.any(gt == 0):
        bad = t[np.flatnonzero(gt == 0)[0]]
        raise EvaluationError(f"g(t) = 0 at grid point t={bad}")
    r = t * f.dg(t) / gt
    if not np.all(np.isfinite(r)):
        raise EvaluationError("t g'(t)/g(t) is not finite on the grid")
    return float(r.min()), float(r.max())


def _triangle_magnitudes(mesh, h):
    h = np.asarray(h, dtype=float)
    if h.ndim == 2 and h.shape == (mesh.n_triangles, 2):
        return np.hypot(h[:, 0], h[:, 1])
    if h.ndim == 1 and h.size == mesh.n_vertices:
        return np.abs(h[mesh.triangles].mean(axis=1))
    if h.ndim == 1 and h.size == mesh.n_triangles:
        return np.abs(h)
    raise ShapeError(f"field of shape {h.shape} matches neither {mesh.n_vertices} vertices "
                     f"nor {mesh.n_triangles} triangles")


def modular(mesh, h, f):
    """Modular ``rho_G(h) = sum_T |T| G(|h|_T)`` with centroid quadrature.

    ``h`` may be nodal (interpolated at centroids), per-triangle scalar, or a
    per-triangle vector field (its Euclidean magnitude is used).
    """
    mags = _triangle_magnitudes(mesh, h)
    return float(np.sum(mesh.areas * f.G(mags)))


def luxemburg_norm(mesh, h, f, rtol=1e-13):
    """``inf{t > 0 : rho_G(h/t) <= 1}`` by bisection on ``log t``."""
    mags = _triangle_magnitudes(mesh, h)
    if not np.all(np.isfinite(mags)):
        raise DomainError("field contains non-finite values")
    if not np.any(mags > 0):
        return 0.0
    areas = mesh.areas

    def rho(t):
        return float(np.sum(areas * f.G(mags / t)))

    hi = float(mags.max())
    while rho(hi) > 1.0:
        hi *= 2.0
    lo = hi / 2.0
    while rho(lo) <= 1.0:
        hi, lo = lo, lo / 2.0
    while hi - lo > rtol * hi:
        mid = np.sqrt(lo * hi)
        if rho(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def nfunction_from_mapping(spec):
    """Build an N-function from ``{"kind": ..., <param>: value, ...}``."""
    spec = dict(spec)
    try:
        kind = spec.pop("kind")
    except KeyError:
        raise ParameterError("N-function spec needs a 'kind' entry", name="kind") from None
    mode = spec.pop("primitive_mode", None)
    values = {}
    for key, raw in spec.items():
        try:
            values[key] = float(raw)
        except (TypeError, ValueError):
            raise ParameterError(f"parameter {key} is not numeric: {raw!r}", name=key) from None
    return make_nfunction(kind, values, primitive_mode=mode)


def parse_nfunction_spec(text):
    """Parse ``"kind=power_log, a=2, b=1, c=1"``."""
    spec = {}
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ParameterError(f"malformed N-function spec entry {item!r}", name=item)
        key, value = (s.strip() for s in item.split("=", 1))
        spec[key] = value
    return nfunction_from_mapping(spec)
