"""Command-line interface: solve, gen, and validate subcommands.

Exit codes: 0 on success, 2 for invalid input, 3 when an enumeration guard
trips. Reports go to stdout as CSV (fixed column set) or JSON (same fields
plus per-run audit details). Output is byte-identical across reruns with the
same flags and seeds; wall-clock timing is only filled in under --timing.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from .bipoint import bipoint_solve, fractional_cost
from .fileio import FORMATS, read_instance, write_instance
from .generators import gen_euclidean, gen_gap
from .instance import Instance, KMedianError, cost, validate
from .oracle import GuardExceeded, brute_force
from .sparsify import solve_detailed
from .stars import pseudo_approx

CSV_COLUMNS = ["instanceName", "nF", "nC", "k", "method", "cost", "opened",
               "ratioVsOpt", "seed", "timeMs"]


@dataclass(frozen=True)
class ExperimentRecord:
    instanceName: str
    nF: int
    nC: int
    k: int
    method: str
    cost: float
    opened: int
    ratioVsOpt: float | None
    seed: int
    timeMs: int


def worker_count() -> int:
    """Machine parallelism, capped by the KMF_THREADS environment variable."""
    n = os.cpu_count() or 1
    cap = os.environ.get("KMF_THREADS")
    if cap is not None:
        n = max(1, min(n, int(cap)))
    return n


def _run_one(inst: Instance, mode: str, eps: float, seed: int, trials: int,
             t_cap: int | None, timing: bool) -> tuple[dict, dict]:
    start = time.perf_counter()
    audit: dict = {"mode": mode}
    if mode == "exact":
        res = brute_force(inst, inst.k)
        c, opened = res.cost, len(res.best)
        audit["enumerated"] = res.enumerated
    elif mode == "bipoint":
        bp = bipoint_solve(inst)
        c, opened = fractional_cost(bp), inst.k
        audit.update(a=bp.a, b=bp.b, d1=bp.d1, d2=bp.d2,
                     size1=len(bp.s1), size2=len(bp.s2))
    elif mode == "pseudo":
        out = pseudo_approx(inst, eps, seed=seed, trials=trials)
        c, opened = cost(inst, out.open), len(out.open)
        audit.update(regime=out.regime, additive_budget=out.additive_budget,
                     winning_seed=out.seed)
    elif mode == "pipeline":
        rep = solve_detailed(inst, eps, seed=seed, t_cap=t_cap, trials=trials)
        c, opened = rep.cost, len(rep.best)
        audit.update(t=rep.t, t_enumerated=rep.t_enumerated,
                     residuals=rep.n_residuals)
        if rep.heuristic:
            audit["label"] = "heuristic-t"
    else:
        raise KMedianError(f"unknown mode {mode!r}")
    elapsed = int(round(1000.0 * (time.perf_counter() - start))) if timing else 0
    return ({"cost": c, "opened": opened, "timeMs": elapsed}, audit)


def _emit(records: list[tuple[ExperimentRecord, dict]], fmt: str,
          dest) -> None:
    records.sort(key=lambda ra: (ra[0].instanceName, ra[0].method, ra[0].seed))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec, _ in records:
            row = asdict(rec)
            row["cost"] = repr(rec.cost)
            row["ratioVsOpt"] = "" if rec.ratioVsOpt is None else repr(rec.ratioVsOpt)
            w.writerow([row[c] for c in CSV_COLUMNS])
        dest.write(buf.getvalue())
    else:
        payload = []
        for rec, audit in records:
            d = asdict(rec)
            if d["ratioVsOpt"] is None:
                del d["ratioVsOpt"]
            d["audit"] = audit
            payload.append(d)
        dest.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _cmd_solve(args) -> int:
    inst = read_instance(args.input, args.format, strict=args.strict)
    seeds = [int(s) for s in str(args.seed).split(",")]
    opt_cost = None
    if args.oracle:
        opt_cost = brute_force(inst, inst.k).cost

    def task(seed: int):
        core, audit = _run_one(inst, args.mode, args.eps, seed, args.trials,
                               args.t_cap, args.timing)
        ratio = None
        if opt_cost is not None:
            ratio = core["cost"] / opt_cost if opt_cost > 0 else (
                1.0 if core["cost"] == 0 else float("inf"))
        rec = ExperimentRecord(
            instanceName=inst.name, nF=inst.n_facilities, nC=inst.n_clients,
            k=inst.k, method=args.mode, cost=core["cost"],
            opened=core["opened"], ratioVsOpt=ratio, seed=seed,
            timeMs=core["timeMs"])
        return rec, audit

    if len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            records = list(pool.map(task, seeds))
    else:
        records = [task(seeds[0])]
    dest = open(args.output, "w") if args.output else sys.stdout
    try:
        _emit(records, args.out, dest)
    finally:
        if args.output:
            dest.close()
    return 0


def _cmd_gen(args) -> int:
    if args.family == "gap":
        inst = gen_gap(args.k)
        fmt = args.format or "matrix"
    else:
        inst = gen_euclidean(args.nf, args.nc, args.k, dim=args.dim,
                             seed=args.seed)
        fmt = args.format or "coord"
    write_instance(args.output, inst, fmt)
    print(f"wrote {inst.name} to {args.output} ({fmt})")
    return 0


def _cmd_validate(args) -> int:
    inst = read_instance(args.input, args.format, strict=False)
    report = validate(inst)
    if report.ok:
        print(f"{inst.name}: ok ({inst.n_facilities} facilities, "
              f"{inst.n_clients} clients, k={inst.k})")
        return 0
    for line in report.lines():
        print(line)
    return 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kmedian",
                                description="k-median approximation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve an instance file")
    ps.add_argument("--input", required=True)
    ps.add_argument("--format", required=True, choices=FORMATS)
    ps.add_argument("--mode", default="pipeline",
                    choices=["exact", "bipoint", "pseudo", "pipeline"])
    ps.add_argument("--eps", type=float, default=1.0)
    ps.add_argument("--seed", default="0",
                    help="seed or comma-separated seeds (fans out over workers)")
    ps.add_argument("--trials", type=int, default=32)
    ps.add_argument("--t-cap", dest="t_cap", type=int, default=1,
                    help="cap on the residual enumeration depth")
    ps.add_argument("--oracle", action="store_true",
                    help="also brute-force the optimum for the ratio column")
    ps.add_argument("--out", default="csv", choices=["csv", "json"])
    ps.add_argument("--output", default=None, help="write report here instead of stdout")
    ps.add_argument("--strict", action="store_true",
                    help="reject instances violating metric axioms")
    ps.add_argument("--timing", action="store_true",
                    help="fill timeMs with wall-clock time (breaks byte-stable output)")
    ps.set_defaults(fn=_cmd_solve)

    pg = sub.add_parser("gen", help="generate an instance file")
    pg.add_argument("family", choices=["gap", "euclidean"])
    pg.add_argument("--k", type=int, required=True)
    pg.add_argument("--nf", type=int, default=10)
    pg.add_argument("--nc", type=int, default=15)
    pg.add_argument("--dim", type=int, default=2, choices=[1, 2, 3])
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--format", default=None, choices=["matrix", "coord"])
    pg.add_argument("--output", required=True)
    pg.set_defaults(fn=_cmd_gen)

    pv = sub.add_parser("validate", help="check a file against the metric axioms")
    pv.add_argument("--input", required=True)
    pv.add_argument("--format", required=True, choices=FORMATS)
    pv.set_defaults(fn=_cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except GuardExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (KMedianError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
