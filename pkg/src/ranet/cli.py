"""Command-line front end.

Exit codes: 0 success, 1 a checked invariant failed, 2 bad arguments,
3 input/output problem.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from itertools import permutations
from pathlib import Path

from ranet import asymptotics, branching, urn
from ranet.core import generate_ran, validate
from ranet.harness import (
    InvariantFailure,
    emit,
    longest_path_result,
    longest_path_trial,
    metrics_trial,
    parse_float_grid,
    parse_int_grid,
    pool_runner,
    run_trials,
    trial_seeds,
)
from ranet.metrics import compute_metrics
from ranet.serialize import ParseError, read_network, write_network

EXIT_OK, EXIT_INVARIANT, EXIT_ARGS, EXIT_IO = 0, 1, 2, 3

METRIC_FIELDS = ("n", "seed", "diameter", "radius", "ah", "avg_dist_est", "stderr", "diameter_over_log_n", "problems")
PATH_FIELDS = ("n", "seed", "m", "method", "perm", "vertex_count", "edge_count", "bound", "bound_ok", "problems")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed + i (default 0)")
    g.add_argument("--trials", type=int, default=1, help="number of trials (default 1)")
    g.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    g.add_argument("--out", default=None, help="output file (directory for generate); default stdout")
    g.add_argument("--tol", type=float, default=None, help="numeric tolerance override")
    g.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="ranet", description="Random Apollonian network experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write trace, edge list and JSON for a RAN")
    p.add_argument("--n", required=True, type=parse_int_grid, help="vertex count")
    p.add_argument("--check", action="store_true", help="run the full invariant validation")

    p = sub.add_parser("metrics", parents=[common], help="diameter, radius, ah and mean distance")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="trace or JSON file")
    src.add_argument("--n", type=parse_int_grid, help="comma-separated n grid, e.g. 2^10,2^12")
    p.add_argument("--num-pairs", type=int, default=10_000, help="sampled pairs for the mean distance")

    p = sub.add_parser("longest-path", parents=[common], help="exact, constructive or brute-force path")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="trace or JSON file")
    src.add_argument("--n", type=parse_int_grid, help="comma-separated n grid")
    p.add_argument("--method", choices=("exact", "constructive", "brute"), default="exact")
    p.add_argument("--perm", default="0,1,2", help="outer-vertex order for constructive, or 'all'")

    p = sub.add_parser("constants", parents=[common], help="analytic constants and the rho_k table")
    p.add_argument("--k-max", type=int, default=60)

    p = sub.add_parser("branching", parents=[common], help="auxiliary-height growth of the branching process")
    p.add_argument("--variant", choices=branching.VARIANTS, default="hat")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--t-grid", type=parse_float_grid, default=parse_float_grid("4:8:0.5"),
                   help="comma list or start:stop:step (default 4:8:0.5)")
    p.add_argument("--budget-gib", type=float, default=8.0)

    p = sub.add_parser("urn", parents=[common], help="urn limit and face-split experiments")
    p.add_argument("--mode", choices=("limit", "face-split", "conditional", "equivalence"), default="limit")
    p.add_argument("--w", type=int, default=1)
    p.add_argument("--b", type=int, default=2)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--m", type=parse_int_grid, default=(1001,), help="face counts (face-split, conditional)")
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--t", type=float, default=0.3, help="conditioning fraction for X1/m")
    p.add_argument("--width", type=float, default=0.05)
    p.add_argument("--k", type=int, default=6, help="subdivisions (equivalence)")

    p = sub.add_parser("zeta-integral", parents=[common], help="the split-region double integral")
    p.add_argument("--zeta", type=float, default=0.88)
    return parser


@contextlib.contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", newline="") as fh:
        yield fh


def _perms(text: str):
    if text == "all":
        return list(permutations(range(3)))
    perm = tuple(int(x) for x in text.split(","))
    if sorted(perm) != [0, 1, 2]:
        raise ValueError(f"--perm must be a permutation of 0,1,2 or 'all', got {text!r}")
    return [perm]


def _raise_if(problems: list[str]) -> None:
    if problems:
        raise InvariantFailure("; ".join(problems[:5]) + (" ..." if len(problems) > 5 else ""))


def cmd_generate(a) -> None:
    if len(a.n) != 1:
        raise ValueError("generate takes a single n")
    out = Path(a.out or ".")
    for seed in trial_seeds(a.seed, a.trials):
        graph, tree = generate_ran(a.n[0], seed)
        if a.check:
            rep = validate(graph, tree)
            if not rep:
                raise InvariantFailure(f"seed {seed}: {rep.check}: {rep.detail}")
        for path in write_network(graph, tree, out):
            print(path)


def cmd_metrics(a) -> None:
    if a.input:
        graph, tree = read_network(a.input)
        rep = compute_metrics(graph, tree, num_pairs=a.num_pairs, seed=a.seed)
        rows = [dict(zip(rep.FIELDS, rep.row()), problems="; ".join(rep.check()))]
    else:
        jobs = [(n, s) for n in a.n for s in trial_seeds(a.seed, a.trials)]
        rows = run_trials(metrics_trial, ([j[0] for j in jobs], [j[1] for j in jobs], [a.num_pairs] * len(jobs)),
                          a.threads)
    with _output(a.out) as fh:
        emit(rows, METRIC_FIELDS, a.fmt, fh)
    _raise_if([f"n={r['n']} seed={r['seed']}: {r['problems']}" for r in rows if r["problems"]])


def cmd_longest_path(a) -> None:
    perms = _perms(a.perm)
    if a.method != "constructive" and a.perm != "0,1,2":
        raise ValueError("--perm only applies to --method constructive")
    if a.method == "brute":
        from ranet.paths.bruteforce import MAX_VERTICES

        sizes = [read_network(a.input)[0].n] if a.input else list(a.n)
        if max(sizes) > MAX_VERTICES:
            raise ValueError(f"brute force is limited to n <= {MAX_VERTICES}")
    rows = []
    if a.input:
        graph, tree = read_network(a.input)
        for p in perms:
            rows.append(dict(longest_path_result(graph, tree, a.method, p), perm=",".join(map(str, p))))
    else:
        jobs = [(n, s, p) for n in a.n for s in trial_seeds(a.seed, a.trials) for p in perms]
        res = run_trials(longest_path_trial, ([j[0] for j in jobs], [j[1] for j in jobs],
                                              [a.method] * len(jobs), [j[2] for j in jobs]), a.threads)
        rows = [dict(r, perm=",".join(map(str, j[2]))) for r, j in zip(res, jobs)]
    with _output(a.out) as fh:
        emit(rows, PATH_FIELDS, a.fmt, fh)
    _raise_if([f"n={r['n']} seed={r['seed']}: {r['problems']}" for r in rows if r["problems"]])


def cmd_constants(a) -> None:
    tol = a.tol if a.tol is not None else asymptotics.DEFAULT_TOL
    ctx = asymptotics.build_context(tol=tol, k_max=a.k_max)
    with _output(a.out) as fh:
        if a.fmt == "json":
            fh.write(ctx.to_json(indent=1) + "\n")
        else:
            rows = [dict(name=r[0], value=repr(r[1]), definition=r[2], tolerance=r[3]) for r in ctx.report_rows()]
            emit(rows, ("name", "value", "definition", "tolerance"), "csv", fh)
    if not ctx.zeta_integral > 1 / 6:
        raise InvariantFailure(f"zeta integral {ctx.zeta_integral} does not exceed 1/6")


def cmd_branching(a) -> None:
    budget = int(a.budget_gib * 2**30)
    res = branching.growth_experiment(a.variant, a.k, a.t_grid, a.trials, a.seed, budget=budget,
                                      runner=pool_runner(a.threads))
    rows = [dict(zip(res.CSV_FIELDS, r)) for r in res.rows()]
    summary = {
        "variant": a.variant,
        "k": a.k,
        "trials": a.trials,
        "aux_slope": res.aux_slope,
        "count_slope": res.count_slope,
        "per_t": [dict(t=t, mean_aux=m, ci95=c) for t, m, c in res.summary_rows()],
    }
    with _output(a.out) as fh:
        if a.fmt == "json":
            json.dump({"rows": rows, "summary": summary}, fh, indent=1)
            fh.write("\n")
        else:
            emit(rows, res.CSV_FIELDS, "csv", fh)
    print(f"# aux-height slope {res.aux_slope:.4f}, log-count slope {res.count_slope:.4f} "
          f"({a.trials} trials)", file=sys.stderr)


def cmd_urn(a) -> None:
    if a.mode == "limit":
        w = urn.urn_final_counts(a.w, a.b, a.s, a.draws, a.trials, a.seed)
        frac = w / (a.w + a.b + a.draws * a.s)
        params = urn.BetaParams(a.w / a.s, a.b / a.s)
        ks = urn.ks_distance(frac, lambda x: urn.beta_cdf(params, min(max(x, 0.0), 1.0)))
        crit = urn.ks_critical(a.trials)
        rows = [dict(w=a.w, b=a.b, s=a.s, draws=a.draws, trials=a.trials, ks_stat=ks, ks_critical=crit,
                     passed=ks < crit)]
        fields = tuple(rows[0])
        problems = [] if ks < crit else [f"KS {ks:.5f} >= critical {crit:.5f}"]
    elif a.mode == "face-split":
        res = urn.face_split_experiment(a.m, a.eps, a.trials, a.seed)
        rows = [dict(zip(urn.FaceSplitRow.FIELDS, r.row())) for r in res]
        fields = urn.FaceSplitRow.FIELDS
        problems = []
    elif a.mode == "conditional":
        rows = []
        for m in a.m:
            samples, ks, crit = urn.conditional_split_experiment(m, a.t, a.width, a.trials, a.seed)
            rows.append(dict(m=m, t=a.t, width=a.width, samples=samples.size, ks_stat=ks, ks_critical=crit))
        fields = ("m", "t", "width", "samples", "ks_stat", "ks_critical")
        problems = []
    else:
        stat, pval = urn.urn_equivalence_test(a.k, a.trials, a.seed)
        rows = [dict(k=a.k, trials=a.trials, chi2=stat, p_value=pval)]
        fields = ("k", "trials", "chi2", "p_value")
        problems = [] if pval > 1e-3 else [f"chi-square p-value {pval:.3g} below 1e-3"]
    with _output(a.out) as fh:
        emit(rows, fields, a.fmt, fh)
    _raise_if(problems)


def cmd_zeta(a) -> None:
    val = asymptotics.zeta_integral(a.zeta)
    rows = [dict(zeta=a.zeta, value=val, exceeds_one_sixth=val > 1 / 6)]
    with _output(a.out) as fh:
        emit(rows, ("zeta", "value", "exceeds_one_sixth"), a.fmt, fh)


COMMANDS = {
    "generate": cmd_generate,
    "metrics": cmd_metrics,
    "longest-path": cmd_longest_path,
    "constants": cmd_constants,
    "branching": cmd_branching,
    "urn": cmd_urn,
    "zeta-integral": cmd_zeta,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if a.trials < 1 or a.threads < 1 or a.seed < 0:
        print("error: --trials and --threads must be >= 1 and --seed >= 0", file=sys.stderr)
        return EXIT_ARGS
    try:
        COMMANDS[a.command](a)
    except InvariantFailure as exc:
        print(f"invariant failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ParseError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, branching.MemoryGuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
