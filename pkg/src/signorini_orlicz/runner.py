"""Config-driven experiments and the verification suite.

A config is an INI file::

    [domain]
    radius = 1.0
    h = 0.04

    [nfunction]
    kind = power
    p = 1

    [boundary]
    kind = signorini_trace

    [solver]
    tol_kkt = 1e-8
    max_iters = 200000
    epsilon_schedule = 1e-2, 1e-4, 1e-6, 1e-8

    [diagnostics]
    holder = true
    caccioppoli = true
    nodal = true
    extension_check = false

    [run]
    benchmark = signorini
    output = out
    seed = 0

``benchmark`` selects boundary data with a known exact solution and makes
``error_linf`` available; ``[boundary]`` may then be omitted.
"""

import configparser
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checks as ck
from . import energy as en
from . import regularity as rg
from .errors import CatalogError, ConfigError, ParameterError, SignoriniError
from .extension import even_extension_solve
from .mesh import build_half_disc, write_mesh_csv
from .nodal import contact_sets, nodal_set, stratify
from .orlicz import lieberman_estimate, nfunction_from_mapping
from .solver import BoundaryData, SolveOptions, solve_thin_obstacle

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "BENCHMARKS",
    "DIAGNOSTICS_KEYS",
    "SUMMARY_KEYS",
    "load_config",
    "parse_config",
    "run_experiment",
    "diagnose",
    "verify_suite",
    "SUITES",
    "thread_cap",
]

BENCHMARKS = {
    "signorini": (BoundaryData("signorini_trace"), en.signorini_exact),
    "linear": (BoundaryData("linear", {"a": 0.0, "b": -1.0, "c": 0.0}), lambda x: -x[:, 1]),
    "constant": (BoundaryData("constant", {"c": 1.0}), lambda x: np.ones(x.shape[0])),
}

DIAGNOSTICS_KEYS = ("config", "summary", "checks", "lipschitz", "holder", "distance_law",
                    "degeo1", "degeo2_stats", "degeo3", "pre1", "pre2", "nodal", "extension")
SUMMARY_KEYS = ("converged", "energy", "error_linf", "beta_fit", "free_boundary_offset",
                "iterations", "n_active")

_SECTIONS = {
    "domain": {"radius", "h"},
    "boundary": None,
    "nfunction": None,
    "solver": {"tol_kkt", "max_iters", "epsilon_schedule", "step_rule", "step_size"},
    "diagnostics": {"holder", "caccioppoli", "nodal", "extension_check", "c4", "n_random"},
    "run": {"benchmark", "output", "seed"},
}
_TOGGLES = ("holder", "caccioppoli", "nodal", "extension_check")


@dataclass
class ExperimentConfig:
    radius: float = 1.0
    h: float = 0.04
    nfunction: dict = field(default_factory=lambda: {"kind": "power", "p": 1.0})
    boundary: BoundaryData = None
    benchmark: str = None
    solver: SolveOptions = field(default_factory=SolveOptions)
    diagnostics: dict = field(default_factory=lambda: {"holder": True, "caccioppoli": True,
                                                       "nodal": True, "extension_check": False})
    c4: float = 10.0
    n_random: int = 1000
    output_dir: str = "out"
    seed: int = 0

    def make_nfunction(self):
        try:
            return nfunction_from_mapping(self.nfunction)
        except ParameterError as exc:
            raise ConfigError(str(exc), key=exc.name) from None
        except CatalogError as exc:
            raise ConfigError(str(exc), key="kind") from None

    def boundary_data(self):
        if self.boundary is not None:
            return self.boundary
        if self.benchmark is None:
            raise ConfigError("config needs a [boundary] section or run.benchmark", key="boundary")
        return BENCHMARKS[self.benchmark][0]

    def exact(self):
        return None if self.benchmark is None else BENCHMARKS[self.benchmark][1]

    def with_h(self, h):
        out = ExperimentConfig(**{**self.__dict__})
        out.h = float(h)
        return out

    def to_dict(self):
        return {
            "radius": self.radius, "h": self.h, "nfunction": dict(self.nfunction),
            "boundary": self.boundary_data().to_dict(), "benchmark": self.benchmark,
            "solver": {"tol_kkt": self.solver.tol_kkt, "max_iters": int(self.solver.max_iters),
                       "epsilon_schedule": [float(e) for e in self.solver.epsilon_schedule],
                       "step_rule": self.solver.step_rule},
            "diagnostics": {k: bool(self.diagnostics[k]) for k in _TOGGLES},
            "c4": self.c4, "n_random": self.n_random, "seed": self.seed,
        }

    def validate(self):
        if not (self.radius > 0):
            raise ConfigError(f"radius must be positive, got {self.radius}", key="radius")
        if not (0 < self.h < self.radius):
            raise ConfigError(f"need 0 < h < radius, got h={self.h}", key="h")
        if self.benchmark is not None and self.benchmark not in BENCHMARKS:
            raise ConfigError(f"unknown benchmark {self.benchmark!r}; expected one of {sorted(BENCHMARKS)}",
                              key="benchmark")
        self.make_nfunction()
        self.boundary_data()
        try:
            self.solver.validate()
        except ParameterError as exc:
            raise ConfigError(str(exc), key=exc.name) from None
        return self


def _float(section, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} is not a number: {raw!r}", key=key) from None


def _bool(section, key, raw):
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key} is not a boolean: {raw!r}", key=key)


def parse_config(text, base_dir=None):
    """Parse INI text into a validated :class:`ExperimentConfig`."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}", key=None) from None
    cfg = ExperimentConfig()
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]", key=section)
        allowed = _SECTIONS[section]
        if allowed is not None:
            for key in cp[section]:
                if key not in allowed:
                    raise ConfigError(f"unknown key {key!r} in [{section}]", key=key)
    if cp.has_section("domain"):
        d = cp["domain"]
        if "radius" in d:
            cfg.radius = _float("domain", "radius", d["radius"])
        if "h" in d:
            cfg.h = _float("domain", "h", d["h"])
    if cp.has_section("nfunction"):
        cfg.nfunction = dict(cp["nfunction"])
    if cp.has_section("boundary"):
        b = dict(cp["boundary"])
        kind = b.pop("kind", None)
        if kind is None:
            raise ConfigError("[boundary] needs a kind", key="kind")
        try:
            cfg.boundary = BoundaryData(kind, {k: _float("boundary", k, v) for k, v in b.items()})
        except ParameterError as exc:
            raise ConfigError(str(exc), key=exc.name) from None
        except CatalogError as exc:
            raise ConfigError(str(exc), key="kind") from None
    if cp.has_section("solver"):
        s = cp["solver"]
        opts = SolveOptions()
        if "tol_kkt" in s:
            opts.tol_kkt = _float("solver", "tol_kkt", s["tol_kkt"])
        if "max_iters" in s:
            opts.max_iters = int(_float("solver", "max_iters", s["max_iters"]))
        if "epsilon_schedule" in s:
            opts.epsilon_schedule = tuple(_float("solver", "epsilon_schedule", x)
                                          for x in s["epsilon_schedule"].split(","))
        if "step_rule" in s:
            opts.step_rule = s["step_rule"].strip()
        if "step_size" in s:
            opts.step_size = _float("solver", "step_size", s["step_size"])
        cfg.solver = opts
    if cp.has_section("diagnostics"):
        dg = cp["diagnostics"]
        for key in _TOGGLES:
            if key in dg:
                cfg.diagnostics[key] = _bool("diagnostics", key, dg[key])
        if "c4" in dg:
            cfg.c4 = _float("diagnostics", "c4", dg["c4"])
        if "n_random" in dg:
            cfg.n_random = int(_float("diagnostics", "n_random", dg["n_random"]))
    if cp.has_section("run"):
        r = cp["run"]
        if "benchmark" in r:
            cfg.benchmark = r["benchmark"].strip()
        if "output" in r:
            out = Path(r["output"].strip())
            if base_dir is not None and not out.is_absolute():
                out = Path(base_dir) / out
            cfg.output_dir = str(out)
        if "seed" in r:
            cfg.seed = int(_float("run", "seed", r["seed"]))
    return cfg.validate()


def load_config(path):
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def diagnose(mesh, u, f, toggles=None, c4=10.0, n_random=1000, seed=0, exact=None, C1M=None):
    """All field diagnostics as a dict keyed by :data:`DIAGNOSTICS_KEYS` (minus config)."""
    toggles = {"holder": True, "caccioppoli": True, "nodal": True} if toggles is None else toggles
    rng = np.random.default_rng(seed)
    out = {k: None for k in DIAGNOSTICS_KEYS if k != "config"}
    checks = {}
    contact, fb = contact_sets(mesh, u)
    offset = float(np.min(np.linalg.norm(fb.points, axis=1))) if len(fb) else None
    x0 = fb.points[int(np.argmin(np.linalg.norm(fb.points, axis=1)))] if len(fb) else np.zeros(2)
    out["lipschitz"] = {"ratio": rg.lipschitz_ratio(mesh, u)}
    beta = None
    if toggles.get("holder", True):
        hf = rg.holder_fit(mesh, u, x0)
        out["holder"] = {"x0": [float(x0[0]), float(x0[1])], **hf.to_dict()}
        beta = hf.beta
        out["distance_law"] = rg.distance_law_fit(mesh, u, fb).to_dict()
    if toggles.get("caccioppoli", True):
        v = en.vertex_gradient(mesh, u)[:, 0]
        vmax = float(np.max(v))
        if vmax > 0:
            res = [rg.caccioppoli_check(mesh, u, f, 0, c * vmax, 0.25, 0.5, C1M=C1M) for c in (0.25, 0.5, 1.0)]
            out["degeo1"] = [{"k": c * vmax, **r.to_dict()} for c, r in zip((0.25, 0.5, 1.0), res)]
            checks["caccioppoli"] = all(r.passed for r in res)
            out["degeo2_stats"] = rg.level_set_profile(mesh, v, 0.5, list(np.linspace(0, vmax, 9)[1:]))
            sb = rg.sup_bound_check(mesh, v, 0.5 * vmax, 0.5, c4)
            out["degeo3"] = {"k0": 0.5 * vmax, "rho": 0.5, "C4": c4, **sb.to_dict()}
            checks["sup_bound"] = sb.passed
        else:
            out["degeo1"] = []
            out["degeo2_stats"] = {}
            out["degeo3"] = {}
        p1 = ck.check_pre1_random(rng, n_random)
        p2 = ck.check_pre2_random(rng, n_random)
        out["pre1"] = {"n": n_random, "verdicts": p1.detail}
        out["pre2"] = {"n": n_random, "verdicts": {k: v for k, v in p2.detail.items()}}
        checks["pre1"], checks["pre2"] = p1.passed, p2.passed
    if toggles.get("nodal", True):
        n1 = nodal_set(mesh, u)
        strata = stratify(n1, 8 * mesh.h_target) if len(n1) else {"counts": {0: 0, 1: 0, 2: 0}, "dominant": None}
        out["nodal"] = {"contact": len(contact), "free_boundary": len(fb), "nodal_1": len(n1),
                        "strata": strata["counts"], "dominant": strata["dominant"]}
    err = None
    if exact is not None:
        err = float(np.max(np.abs(u - exact(mesh.vertices))))
    out["summary"] = dict.fromkeys(SUMMARY_KEYS)
    out["summary"].update(error_linf=err, beta_fit=beta, free_boundary_offset=offset,
                          energy=en.energy(mesh, u, f))
    out["checks"] = checks
    return out, (contact, fb)


@dataclass
class ExperimentResult:
    exit_code: int
    report: object
    diagnostics: dict
    paths: dict


def run_experiment(cfg):
    """Solve, diagnose and write the report bundle into ``cfg.output_dir``."""
    cfg.validate()
    f = cfg.make_nfunction()
    phi = cfg.boundary_data()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: str(out / name) for k, name in
             (("mesh", "mesh.csv"), ("field", "field.csv"), ("solve", "solve.json"),
              ("diagnostics", "diagnostics.json"), ("points", "points.csv"))}
    mesh = build_half_disc(cfg.radius, cfg.h)
    write_mesh_csv(mesh, paths["mesh"])
    try:
        u, report = solve_thin_obstacle(mesh, f, phi, cfg.solver)
    except SignoriniError as exc:
        raise ConfigError(str(exc), key="boundary") from exc
    en.write_field_csv(u, paths["field"])
    dump_json(report.to_dict(), paths["solve"])

    diag, (contact, fb) = diagnose(mesh, u, f, cfg.diagnostics, cfg.c4, cfg.n_random, cfg.seed, cfg.exact())
    diag["checks"]["kkt"] = bool(report.kkt["ok"])
    if cfg.diagnostics.get("extension_check"):
        ext, _, _ = even_extension_solve(mesh, f, phi, cfg.solver)
        diag["extension"] = {**ext.to_dict(), "bound": ext.bound}
        diag["checks"]["extension"] = ext.discrepancy_sup <= ext.bound
    diag["summary"].update(converged=bool(report.converged), energy=report.energy,
                           iterations=report.total_iterations, n_active=len(report.active_set))
    diag["config"] = cfg.to_dict()
    if cfg.diagnostics.get("nodal", True):
        n1 = nodal_set(mesh, u)
        if len(n1):
            stratify(n1, 8 * mesh.h_target)
        _write_point_sets(paths["points"], (contact, fb, n1))
    dump_json(diag, paths["diagnostics"])
    ok = report.converged and all(diag["checks"].values())
    return ExperimentResult(0 if ok else 1, report, diag, paths)


def _write_point_sets(path, sets):
    with open(path, "w") as fh:
        fh.write("x,y,label,local_dim\n")
        for ps in sets:
            for i, (x, y) in enumerate(ps.points):
                ld = "" if ps.local_dim is None else int(ps.local_dim[i])
                fh.write(f"{float(x)!r},{float(y)!r},{ps.label.value},{ld}\n")


def thread_cap(default=None):
    """Worker count from the ``THREADS`` environment variable."""
    raw = os.environ.get("THREADS")
    n = (os.cpu_count() or 1) if default is None else default
    if raw:
        try:
            n = min(n, max(1, int(raw)))
        except ValueError:
            raise ConfigError(f"THREADS must be an integer, got {raw!r}", key="THREADS") from None
    return max(1, n)


def _suite_table(level):
    n_rand = 1000 if level == "quick" else 10_000
    quick = [
        ("orlicz_algebra", lambda rng: ck.check_lieberman(mode="bracket")),
        ("growth_envelope", lambda rng: ck.check_growth_envelope(rng)),
        ("luxemburg_duality", lambda rng: ck.check_luxemburg_duality(rng)),
        ("aij_ellipticity", lambda rng: ck.check_ellipticity(rng)),
        ("pre1", lambda rng: ck.check_pre1_random(rng, n_rand)),
        ("pre2", lambda rng: ck.check_pre2_random(rng, n_rand)),
        ("comparison", lambda rng: ck.check_comparison()),
        ("symmetry", lambda rng: ck.check_symmetry()),
        ("normalization", lambda rng: ck.check_normalization(
            families={"double_power(2,3,1,3)": ck.catalog_functions()["double_power(2,3,1,3)"]})),
        ("energy_optimality", lambda rng: ck.check_energy_optimality(rng)),
        ("linear_exact", lambda rng: ck.check_linear_exact()),
    ]
    if level == "quick":
        return quick
    full = [(n, fn) for n, fn in quick if n != "normalization"]
    full += [
        ("normalization", lambda rng: ck.check_normalization()),
        ("signorini_convergence", lambda rng: ck.check_signorini_convergence()),
        ("extension", lambda rng: ck.check_extension()),
        ("nonhomogeneous", lambda rng: ck.check_nonhomogeneous()),
        ("degiorgi", lambda rng: ck.check_degiorgi(rng)),
        ("nodal", lambda rng: ck.check_nodal()),
    ]
    return full


SUITES = {"quick": [n for n, _ in _suite_table("quick")], "full": [n for n, _ in _suite_table("full")]}


def verify_suite(level="quick", seed=0, faults=(), only=None, log=None):
    """Run the named suites; returns ``(all_passed, [(name, CheckResult), ...])``.

    ``faults`` names suites whose pass condition is inverted, which is how
    the harness itself is tested.
    """
    if level not in SUITES:
        raise ConfigError(f"unknown level {level!r}; expected quick or full", key="level")
    unknown = set(faults) - set(SUITES[level])
    if unknown:
        raise ConfigError(f"unknown suite(s) {sorted(unknown)}", key="fault")
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in _suite_table(level):
        if only is not None and name not in only:
            continue
        res = fn(rng)
        if name in faults:
            res.passed = not res.passed
        res.name = name
        results.append((name, res))
        if log is not None:
            log(res.line())
    return all(r.passed for _, r in results), results


def nfunction_report(f):
    """Assigned and measured Lieberman constants plus the growth-envelope check."""
    lo, hi = lieberman_estimate(f)
    rng = np.random.default_rng(0)
    t = 10 ** rng.uniform(-3, 3, 1000)
    s = 10 ** rng.uniform(-3, 3, 1000)
    gs, gts = f.g(s), f.g(t * s)
    bad = int(np.count_nonzero((gts < np.minimum(t ** f.delta0, t ** f.g0) * gs * (1 - 1e-8))
                               | (gts > np.maximum(t ** f.delta0, t ** f.g0) * gs * (1 + 1e-8))))
    return {"nfunction": f.describe(), "delta0": f.delta0, "g0": f.g0,
            "estimate": [lo, hi], "grid": [1e-6, 1e6, 601],
            "brackets": bool(f.delta0 <= lo + 0.02 and hi <= f.g0 + 0.02),
            "envelope_violations": bad}
