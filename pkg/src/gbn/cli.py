"""Command-line front end.

Subcommands: learn, gf-check, gf-simulate, bench, sample, causes. Exit
codes: 0 on success, 1 on runtime refusals (budget, encoding, extension
failures; the reason is also written as JSON to the output path when one
was given), 2 on usage errors and malformed inputs. Standard output is
human text; machine consumers read the written files.
"""

import argparse
import json
import os
import sys

from . import fileio, report
from .errors import GbnError, InputFormatError
from .experiments import gf_prevalence, run_benchmark
from .bayesnet import forward_sample
from .grouplearn import (
    check_groupwise_faithfulness,
    group_causes_from_vstructures,
    learn_group_dag,
    METHOD_NAMES,
)

VOLATILE_DIAGNOSTICS = ("runtime_s",)


def _stable_diagnostics(diag):
    return {k: v for k, v in diag.items() if k not in VOLATILE_DIAGNOSTICS}


def _require_full_partition(grouping, n_variables, grouping_path):
    if grouping.node_count != n_variables:
        raise InputFormatError(
            f"{grouping_path}: grouping covers {grouping.node_count} of "
            f"{n_variables} variables"
        )


def _print_edges(cpdag, names, indent="  "):
    for u, v in sorted(cpdag.directed_edges):
        print(f"{indent}{names[u]} -> {names[v]}")
    for u, v in sorted(cpdag.undirected_edges):
        print(f"{indent}{names[u]} -- {names[v]}")
    if not cpdag.directed_edges and not cpdag.undirected_edges:
        print(f"{indent}(no edges)")


def _cmd_learn(args):
    data = fileio.read_dataset_csv(args.data)
    grouping = fileio.read_grouping_file(args.grouping, data.names)
    _require_full_partition(grouping, data.n_variables, args.grouping)
    result = learn_group_dag(
        args.method,
        data,
        grouping,
        alpha=args.alpha,
        ess=args.ess,
        max_parents=args.max_parents,
    )
    causes = group_causes_from_vstructures(result.group_cpdag)
    result.diagnostics = _stable_diagnostics(result.diagnostics)
    fileio.write_result_json(
        args.out,
        result,
        grouping.names,
        sorted(causes),
        variable_names=data.names,
        extra={"seed": args.seed, "alpha": args.alpha, "ess": args.ess,
               "max_parents": args.max_parents},
    )
    print(f"method {result.method}: learned group structure over {grouping.k} groups")
    _print_edges(result.group_cpdag, grouping.names)
    if causes:
        print("group causes (v-structure criterion):")
        for i, j in sorted(causes):
            print(f"  {grouping.names[i]} causes {grouping.names[j]}")
    else:
        print("group causes (v-structure criterion): none")
    print(f"wrote {args.out}")
    return 0


def _cmd_gf_check(args):
    dag, names = fileio.read_dag_file(args.dag)
    grouping = fileio.read_grouping_file(args.grouping, names)
    _require_full_partition(grouping, dag.node_count, args.grouping)
    faithful, learned = check_groupwise_faithfulness(dag, grouping)
    print("faithful" if faithful else "unfaithful")
    _print_edges(learned, grouping.names)
    if args.out:
        payload = {
            "format": "gbn.gf-check",
            "version": 1,
            "faithful": faithful,
            "groups": list(grouping.names),
            "group_edges": {
                "directed": sorted(
                    [grouping.names[u], grouping.names[v]]
                    for u, v in learned.directed_edges
                ),
                "undirected": sorted(
                    [grouping.names[u], grouping.names[v]]
                    for u, v in learned.undirected_edges
                ),
            },
        }
        fileio._write_json(args.out, payload)
        print(f"wrote {args.out}")
    return 0


def _parse_floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _parse_ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _cmd_gf_simulate(args):
    cells = gf_prevalence(
        args.nodes,
        _parse_floats(args.p_grid),
        _parse_ints(args.group_sizes),
        args.graphs,
        args.groupings,
        args.seed,
    )
    fileio.write_prevalence_csv(args.out, cells)
    print(f"wrote {args.out}")
    if not args.no_figure:
        fig_path = args.figure or _with_suffix(args.out, ".png")
        report.render_prevalence_figure(cells, fig_path)
        print(f"wrote {fig_path}")
    return 0


def _with_suffix(path, suffix):
    base = path[: path.rfind(".")] if "." in path.split("/")[-1] else path
    return base + suffix


def _cmd_bench(args):
    config = fileio.read_bench_config(args.config)
    result = run_benchmark(config)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "results.csv")
    json_path = os.path.join(args.out_dir, "results.json")
    fileio.write_bench_csv(csv_path, result)
    fileio.write_bench_json(json_path, result, config_echo={"path": args.config})
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    if not args.no_figure:
        png_path = os.path.join(args.out_dir, "results.png")
        report.render_benchmark_figure(result, png_path)
        print(f"wrote {png_path}")
    for row in result.rows:
        shd_txt = "n/a" if row.mean_shd is None else f"{row.mean_shd:.2f}"
        print(
            f"  {row.structure} {row.method} m={row.sample_size}: "
            f"mean SHD {shd_txt} ({row.n_ok} ok, {row.n_failed} failed)"
        )
    return 0


def _cmd_sample(args):
    bn, names = fileio.read_network_json(args.network)
    data = forward_sample(bn, args.m, args.seed, names=names)
    fileio.write_dataset_csv(args.out, data)
    print(f"wrote {args.out} ({data.n_rows} rows)")
    return 0


def _cmd_causes(args):
    payload, group_cpdag = fileio.read_result_json(args.result)
    names = payload["groups"]
    pairs = sorted(group_causes_from_vstructures(group_cpdag))
    if pairs:
        for i, j in pairs:
            print(f"{names[i]} causes {names[j]}")
    else:
        print("no v-structure cause pairs")
    if args.out:
        fileio._write_json(
            args.out,
            {
                "format": "gbn.causes",
                "version": 1,
                "cause_pairs": [[names[i], names[j]] for i, j in pairs],
            },
        )
        print(f"wrote {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gbn",
        description="Bayesian-network structure learning over known variable groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="learn a group structure from a dataset")
    p.add_argument("data", help="dataset CSV")
    p.add_argument("grouping", help="grouping file")
    p.add_argument("--method", required=True, choices=METHOD_NAMES)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--ess", type=float, default=1.0)
    p.add_argument("--max-parents", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="result JSON path")
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("gf-check", help="check groupwise faithfulness of a DAG")
    p.add_argument("dag", help="DAG file")
    p.add_argument("grouping", help="grouping file")
    p.add_argument("--out", help="optional JSON report path")
    p.set_defaults(func=_cmd_gf_check)

    p = sub.add_parser(
        "gf-simulate", help="prevalence of groupwise faithfulness in random DAGs"
    )
    p.add_argument("--nodes", type=int, default=20)
    p.add_argument("--p-grid", default="0.1,0.3,0.5,0.7,0.9")
    p.add_argument("--group-sizes", default="2,3,4,5")
    p.add_argument("--graphs", type=int, default=100)
    p.add_argument("--groupings", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="proportions CSV path")
    p.add_argument("--figure", help="figure path (default: CSV path with .png)")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_gf_simulate)

    p = sub.add_parser("bench", help="run an SHD benchmark from a config file")
    p.add_argument("config", help="benchmark config JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("sample", help="forward-sample a network JSON file")
    p.add_argument("network", help="network JSON")
    p.add_argument("-m", type=int, required=True, help="number of rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="dataset CSV path")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("causes", help="re-extract cause pairs from a result file")
    p.add_argument("result", help="result JSON from gbn learn")
    p.add_argument("--out", help="optional JSON output")
    p.set_defaults(func=_cmd_causes)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GbnError as exc:
        out = getattr(args, "out", None)
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                json.dump(
                    {
                        "format": "gbn.error",
                        "version": 1,
                        "error": type(exc).__name__,
                        "message": str(exc),
                    },
                    fh,
                    indent=2,
                    sort_keys=True,
                )
                fh.write("\n")
        print(f"refused: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
