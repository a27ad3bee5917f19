"""Command-line front end.

Subcommands: solve, analyze, reduce, generate, verify (plus an
undocumented `oracle` group for the brute-force references).  All output
is deterministic for fixed inputs, seed, and a single thread; figures are
rendered to files when --plot is given.

Exit codes: solve returns 0 when at least one embedding exists, 1 when
none does, 2 on errors; verify returns 0 iff the embedding is feasible.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .geometry import DEFAULT_TOL, GeometryError, ToleranceConfig
from .instance import (DgpInstance, InstanceError, SubsetSumInstance,
                       format_instance, generate_random_yes, parse_pruning_spec,
                       partition_edges, read_instance, reduce_subset_sum,
                       validate, write_instance)
from .oracle import (brute_force_embeddings, reduction_count_oracle,
                     subset_sum_solutions)
from .solver import (InvalidInstanceError, Solution, format_solutions,
                     read_solutions, solve, stats_csv, verify_embedding,
                     write_solutions)
from .symmetry import chirality, predicted_solution_count
from .width import classify, crosscheck, predict_profile

EXIT_OK = 0
EXIT_NO_SOLUTION = 1
EXIT_ERROR = 2


def _tolerances(args) -> ToleranceConfig:
    kwargs = {}
    if getattr(args, "tol_prune", None) is not None:
        kwargs["prune_abs"] = args.tol_prune
    if getattr(args, "tol_geom", None) is not None:
        kwargs["geometry"] = args.tol_geom
    if not kwargs:
        return DEFAULT_TOL
    base = {f: getattr(DEFAULT_TOL, f) for f in
            ("geometry", "degeneracy", "disc", "prune_abs", "prune_rel",
             "cluster_rel")}
    base.update(kwargs)
    return ToleranceConfig(**base)


def _parse_values(text: str) -> SubsetSumInstance:
    try:
        return SubsetSumInstance(tuple(int(t) for t in text.split(",") if t))
    except ValueError as exc:
        raise InstanceError(f"bad value list {text!r}: {exc}") from None


def _load_instance(path) -> DgpInstance:
    try:
        return read_instance(path)
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from None


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    tol = _tolerances(args)
    result = solve(inst, mode=args.mode, tol=tol, threads=args.threads)
    if args.output:
        write_solutions(args.output, result.solutions)
    if args.stats:
        with open(args.stats, "w", encoding="utf-8") as fh:
            fh.write(stats_csv(result.stats))
    if args.plot:
        from .plotting import save_search_stats
        save_search_stats(result.stats, args.plot,
                          title=f"search tree, n={inst.n} K={inst.K}")
    if args.format == "csv":
        sys.stdout.write(stats_csv(result.stats))
    else:
        print(f"solutions {result.count}")
        print(f"nodes {int(result.stats.nodes_per_level.sum())}")
        print(f"pruned {int(result.stats.pruned_per_level.sum())}")
        if args.mode != "count" and not args.output and result.solutions:
            sys.stdout.write(format_solutions(result.solutions))
    return EXIT_OK if result.count > 0 else EXIT_NO_SOLUTION


def cmd_analyze(args) -> int:
    inst = _load_instance(args.instance)
    tol = _tolerances(args)
    if args.crosscheck:
        report = crosscheck(inst, tol=tol, paper_window=args.paper_window,
                            threads=args.threads)
        profile = report.profile
    else:
        report = None
        profile = predict_profile(inst, paper_window=args.paper_window)
    label = classify(inst)
    exponent = predicted_solution_count(inst, paper_window=args.paper_window)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(profile.csv())
    if args.plot:
        from .plotting import save_width_profile
        save_width_profile(profile, args.plot,
                           title=f"width profile, n={inst.n} K={inst.K}")
    if args.format == "csv":
        sys.stdout.write(profile.csv())
    else:
        print(label.summary(K=inst.K))
        print(f"predicted_solutions 2^{exponent}")
        if report is not None:
            print(f"measured_solutions {report.solution_count}")
            print(f"profile_match {'yes' if report.all_match else 'no'}")
            if report.no_instance:
                print("warning: no embedding exists; width prediction "
                      "applies to YES instances only")
    return EXIT_OK


def cmd_reduce(args) -> int:
    values = _parse_values(args.subset_sum)
    inst = reduce_subset_sum(values, args.K)
    if args.output:
        write_instance(inst, args.output)
    else:
        sys.stdout.write(format_instance(inst))
    if args.format == "csv":
        print(f"n,{inst.n}")
        print(f"K,{inst.K}")
        print(f"edges,{len(inst.edges)}")
    elif args.output:
        print(f"wrote n={inst.n} K={inst.K} instance to {args.output}")
    return EXIT_OK


def cmd_generate(args) -> int:
    spec = parse_pruning_spec(args.pruning)
    tol = _tolerances(args)
    inst, coords = generate_random_yes(args.n, args.K, pruning=spec,
                                       seed=args.seed, tol=tol)
    write_instance(inst, args.output)
    truth_path = args.truth or (str(args.output) + ".sol")
    truth = Solution(chirality=chirality(inst, coords, tol), coords=coords)
    write_solutions(truth_path, [truth])
    pruning_count = len(partition_edges(inst).pruning)
    if args.format == "csv":
        print(f"n,{inst.n}")
        print(f"K,{inst.K}")
        print(f"pruning_edges,{pruning_count}")
        print(f"instance,{args.output}")
        print(f"truth,{truth_path}")
    else:
        print(f"wrote n={inst.n} K={inst.K} instance with {pruning_count} "
              f"pruning edges to {args.output}")
        print(f"wrote ground-truth embedding to {truth_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    tol = _tolerances(args)
    try:
        embeddings = read_solutions(args.embedding)
    except (OSError, ValueError) as exc:
        raise InstanceError(f"cannot read embedding: {exc}") from None
    if not embeddings:
        raise InstanceError(f"no embeddings in {args.embedding}")
    feasible = True
    if args.format == "csv":
        print("embedding,u,v,required,measured")
    for i, sol in enumerate(embeddings, start=1):
        report = verify_embedding(inst, sol.coords, tol)
        feasible = feasible and report.ok
        if args.format == "csv":
            for (u, v, req, meas) in report.violations:
                print(f"{i},{u},{v},{req:.17g},{meas:.17g}")
        else:
            state = "feasible" if report.ok else \
                f"{len(report.violations)} violated edges"
            print(f"embedding {i}: {state} "
                  f"(max residual {report.max_residual:.3e})")
            for (u, v, req, meas) in report.violations:
                print(f"  edge {u} {v}: required {req:.12g} got {meas:.12g}")
    return EXIT_OK if feasible else EXIT_NO_SOLUTION


def cmd_oracle(args) -> int:
    if args.oracle_cmd == "subset-sum":
        hits = subset_sum_solutions(_parse_values(args.values),
                                    fix_first=args.fix_first)
        for s in hits:
            print("".join("+" if x > 0 else "-" for x in s))
        print(f"count {len(hits)}")
    elif args.oracle_cmd == "reduction-count":
        print(reduction_count_oracle(_parse_values(args.values), args.K))
    else:  # brute-force
        inst = _load_instance(args.instance)
        sols = brute_force_embeddings(inst, _tolerances(args))
        sys.stdout.write(format_solutions(sols))
        print(f"count {len(sols)}")
    return EXIT_OK


def _add_common(p, with_tol=True) -> None:
    p.add_argument("--format", choices=("text", "csv"), default="text",
                   help="stdout format")
    if with_tol:
        p.add_argument("--tol-prune", type=float, default=None, metavar="X",
                       help="absolute pruning tolerance (default 1e-6)")
        p.add_argument("--tol-geom", type=float, default=None, metavar="X",
                       help="geometric tolerance (default 1e-8)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmdgp",
        description="Solve, analyze and generate discretizable distance "
                    "geometry instances in R^K.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="{solve,analyze,reduce,generate,verify}")

    p = sub.add_parser("solve", help="run the branch-and-prune search")
    p.add_argument("instance", help="instance file")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--all", dest="mode", action="store_const",
                       const="all", help="enumerate every embedding (default)")
    group.add_argument("--first", dest="mode", action="store_const",
                       const="first", help="stop at the first embedding")
    group.add_argument("--count", dest="mode", action="store_const",
                       const="count", help="count embeddings only")
    p.set_defaults(mode="all")
    p.add_argument("-o", "--output", help="write solutions to this file")
    p.add_argument("--stats", help="write per-level stats CSV to this file")
    p.add_argument("--plot", help="render the per-level stats to this image")
    p.add_argument("--threads", type=int, default=1,
                   help="subtree parallelism for --all/--count")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("analyze",
                       help="predict widths, classify, optionally crosscheck")
    p.add_argument("instance")
    p.add_argument("--crosscheck", action="store_true",
                   help="also run the solver and compare measured widths")
    p.add_argument("--paper-window",
                   action="store_true",
                   help="use the off-by-one generator window [u+K, v] "
                        "instead of the corrected [u+K+1, v]")
    p.add_argument("-o", "--output", help="write the profile CSV here")
    p.add_argument("--plot", help="render the width profile to this image")
    p.add_argument("--threads", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reduce",
                       help="build the hard instance encoding a subset-sum")
    p.add_argument("--subset-sum", required=True, metavar="a1,a2,...",
                   help="comma-separated positive integers")
    p.add_argument("--K", type=int, required=True, help="dimension (>= 2)")
    p.add_argument("-o", "--output", help="instance file to write")
    _add_common(p, with_tol=False)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("generate", help="random YES instance + ground truth")
    p.add_argument("-n", type=int, required=True, help="vertex count")
    p.add_argument("-K", type=int, required=True, help="dimension")
    p.add_argument("--pruning", default="none",
                   help="none | density:P | prop1:V0 | prop2:V0 | prop3:V0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="instance file")
    p.add_argument("--truth", help="ground-truth embedding file "
                                   "(default: <output>.sol)")
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="check an embedding against an instance")
    p.add_argument("instance")
    p.add_argument("embedding", help="solution-format embedding file")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    # undocumented: brute-force references for debugging
    p = sub.add_parser("oracle")
    osub = p.add_subparsers(dest="oracle_cmd", required=True)
    q = osub.add_parser("subset-sum")
    q.add_argument("--values", required=True)
    q.add_argument("--fix-first", action="store_true")
    _add_common(q, with_tol=False)
    q = osub.add_parser("reduction-count")
    q.add_argument("--values", required=True)
    q.add_argument("--K", type=int, required=True)
    _add_common(q, with_tol=False)
    q = osub.add_parser("brute-force")
    q.add_argument("instance")
    _add_common(q)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(exc.report.summary(), file=sys.stderr)
        return EXIT_ERROR
    except (InstanceError, GeometryError, MemoryError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
