"""Command line entry point (``signorini-orlicz``).

Exit codes: 0 success, 1 a check or the solver failed, 2 bad input.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import energy as en
from .errors import SignoriniError
from .mesh import read_mesh_csv
from .orlicz import parse_nfunction_spec
from .runner import (SUITES, _clean, diagnose, dump_json, load_config, nfunction_report,
                     run_experiment, thread_cap, verify_suite)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _print_json(obj):
    print(json.dumps(_clean(obj), sort_keys=True, indent=2))


def cmd_solve(args):
    cfg = load_config(args.config)
    if args.output:
        cfg.output_dir = args.output
    res = run_experiment(cfg)
    s = res.diagnostics["summary"]
    print(f"converged={s['converged']} energy={s['energy']:.12g} iterations={s['iterations']}")
    for name, ok in sorted(res.diagnostics["checks"].items()):
        print(f"  {name}: {'pass' if ok else 'FAIL'}")
    print(f"wrote {cfg.output_dir}")
    return res.exit_code


def cmd_analyze(args):
    mesh = read_mesh_csv(args.mesh)
    u = en.read_field_csv(args.field, mesh.n_vertices)
    f = parse_nfunction_spec(args.nfunction)
    toggles = {"holder": not args.no_holder, "caccioppoli": not args.no_caccioppoli,
               "nodal": not args.no_nodal}
    diag, _ = diagnose(mesh, u, f, toggles, c4=args.c4, n_random=args.n_random, seed=args.seed)
    diag["config"] = {"mesh": str(args.mesh), "field": str(args.field), "nfunction": f.describe()}
    if args.output:
        dump_json(diag, args.output)
    else:
        _print_json(diag)
    return EXIT_OK if all(diag["checks"].values()) else EXIT_FAIL


def cmd_check_nfunction(args):
    f = parse_nfunction_spec(args.spec)
    rep = nfunction_report(f)
    _print_json(rep)
    return EXIT_OK if rep["brackets"] and rep["envelope_violations"] == 0 else EXIT_FAIL


def cmd_verify(args):
    faults = tuple(x for x in (args.fault or "").split(",") if x)
    ok, results = verify_suite(args.level, seed=args.seed, faults=faults, log=print)
    failed = [n for n, r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    if failed:
        print("failing: " + ", ".join(failed))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_convergence(args):
    base = load_config(args.config)
    try:
        hs = [float(x) for x in args.h.split(",") if x.strip()]
    except ValueError:
        print(f"error: --h must be comma separated numbers, got {args.h!r}", file=sys.stderr)
        return EXIT_INPUT
    root = Path(args.output or base.output_dir)
    cfgs = []
    for h in hs:
        c = base.with_h(h)
        c.output_dir = str(root / f"h{h:g}")
        cfgs.append(c.validate())
    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        results = list(pool.map(run_experiment, cfgs))
    rows = []
    for h, r in zip(hs, results):
        s = r.diagnostics["summary"]
        rows.append(_clean({"h": h, "converged": s["converged"], "error_linf": s["error_linf"],
                            "energy": s["energy"], "beta_fit": s["beta_fit"],
                            "free_boundary_offset": s["free_boundary_offset"]}))
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "convergence.csv", "w") as fh:
        keys = list(rows[0])
        fh.write(",".join(keys) + "\n")
        for row in rows:
            fh.write(",".join("" if row[k] is None else repr(row[k]) for k in keys) + "\n")
    for row in rows:
        err = "n/a" if row["error_linf"] is None else f"{row['error_linf']:.3e}"
        print(f"h={row['h']:<6g} error_linf={err} energy={row['energy']:.10g} converged={row['converged']}")
    return EXIT_OK if all(r.exit_code == 0 for r in results) else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="signorini-orlicz",
                                description="Thin-obstacle problems in Orlicz spaces on the half disc.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one configured experiment")
    s.add_argument("config")
    s.add_argument("-o", "--output", help="override the output directory")
    s.set_defaults(func=cmd_solve)

    a = sub.add_parser("analyze", help="diagnostics for a stored mesh and field")
    a.add_argument("mesh")
    a.add_argument("field")
    a.add_argument("--nfunction", default="kind=power, p=1")
    a.add_argument("--no-holder", action="store_true")
    a.add_argument("--no-caccioppoli", action="store_true")
    a.add_argument("--no-nodal", action="store_true")
    a.add_argument("--c4", type=float, default=10.0)
    a.add_argument("--n-random", type=int, default=1000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("-o", "--output", help="write JSON here instead of stdout")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("check-nfunction", help="measured growth indices of an N-function")
    c.add_argument("spec", help='e.g. "kind=power_log, a=2, b=1, c=1"')
    c.set_defaults(func=cmd_check_nfunction)

    v = sub.add_parser("verify", help="run the verification suites")
    v.add_argument("--level", choices=sorted(SUITES), default="quick")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--fault", help="comma separated suites whose verdict is inverted")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("convergence", help="run one config over several mesh sizes")
    g.add_argument("config")
    g.add_argument("--h", default="0.08,0.04,0.02")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_convergence)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SignoriniError, OSError) as exc:
        key = getattr(exc, "key", None)
        print(f"error{f' [{key}]' if key else ''}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
