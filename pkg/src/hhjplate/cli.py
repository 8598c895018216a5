"""Command-line driver: ``run`` for one AFEM experiment, ``table1`` for the uniform study."""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from .adaptivity import QUANTITIES, AfemConfig, afem_loop, fit_order
from .io import (ensure_dir, table1_rows, write_convergence_csv, write_mesh_svg,
                 write_summary)
from .manufactured import PROBLEMS, get_problem

log = logging.getLogger("hhjplate")

TABLE1_COLUMNS = ("moment_L2", "pih_closeness", "kh_error", "rh_error")


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _theta(s):
    v = float(s)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"theta must lie in (0, 1], got {s}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="hhjplate", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log every loop")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the adaptive (or uniform) loop on one problem")
    r.add_argument("--problem", choices=sorted(PROBLEMS), default="square-smooth")
    r.add_argument("--estimator", choices=("eta", "zeta"), default="eta")
    r.add_argument("--theta", type=_theta, default=0.6)
    r.add_argument("--refine", choices=("adaptive", "uniform"), default="adaptive")
    r.add_argument("--max-loops", type=_positive_int, default=8)
    r.add_argument("--max-elements", type=_positive_int, default=None)
    r.add_argument("--quad-degree", type=_positive_int, default=6)
    r.add_argument("--out", default="out")
    r.add_argument("--snapshot-every", type=_positive_int, default=1,
                   help="write meshes/mesh_<loop>.svg every k loops (and at the last loop)")
    r.add_argument("--fit-skip", type=int, default=None,
                   help="loops skipped before fitting orders (default 6 adaptive, 1 uniform)")

    t = sub.add_parser("table1", help="uniform refinement study on the smooth square problem")
    t.add_argument("--out", default=None, help="also write table1.csv here")
    t.add_argument("--rows", type=_positive_int, default=5)
    return p


def cmd_run(args):
    out = ensure_dir(args.out)
    meshes = ensure_dir(os.path.join(out, "meshes"))
    cfg = AfemConfig(get_problem(args.problem), estimator=args.estimator, theta=args.theta,
                     refine=args.refine, max_loops=args.max_loops, max_elements=args.max_elements,
                     quad_degree=args.quad_degree)

    def snapshot(rec, mesh):
        if rec.loop % args.snapshot_every == 0 or rec.loop + 1 == cfg.max_loops:
            write_mesh_svg(mesh, os.path.join(meshes, f"mesh_{rec.loop}.svg"))

    t0 = time.perf_counter()
    records = afem_loop(cfg, on_record=snapshot)
    write_convergence_csv(records, os.path.join(out, "convergence.csv"))
    skip = args.fit_skip if args.fit_skip is not None else (6 if cfg.refine == "adaptive" else 1)
    skip = min(skip, max(len(records) - 2, 0))
    header = [f"problem: {args.problem}", f"estimator: {cfg.estimator}, theta: {cfg.theta}, "
              f"refine: {cfg.refine}", f"wall time: {time.perf_counter() - t0:.1f} s"]
    text = write_summary(records, os.path.join(out, "summary.txt"), QUANTITIES, skip, header)
    print(text, end="")
    return 0


def cmd_table1(args):
    cfg = AfemConfig(get_problem("square-smooth"), estimator="zeta", refine="uniform",
                     max_loops=args.rows)
    records = afem_loop(cfg)
    rows = table1_rows(records)
    head = f"{'N':>8}  {'|s-s_h|':>11}  {'|P_hs-s_h|':>11}  {'|s-K_hs_h|':>11}  {'|s-R_hs_h|':>11}"
    print(head)
    for r in rows:
        print(f"{int(r[0]):>8}  " + "  ".join(f"{v:>11.3e}" for v in r[1:]))
    if len(records) >= 3:
        orders = [fit_order(records, q, "vs_h", skip=1) for q in TABLE1_COLUMNS]
        print(f"{'order':>8}  " + "  ".join(f"{o:>11.3f}" for o in orders))
    if args.out:
        ensure_dir(args.out)
        with open(os.path.join(args.out, "table1.csv"), "w") as fh:
            fh.write("N,moment_L2,pih_closeness,kh_error,rh_error\n")
            for r in rows:
                fh.write(f"{int(r[0])}," + ",".join(f"{v:.5e}" for v in r[1:]) + "\n")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return {"run": cmd_run, "table1": cmd_table1}[args.command](args)
    except Exception as exc:    # single-line diagnostic, nonzero exit
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"hhjplate: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
