"""Command line entry point.

::

    ttplan plan --map map1 --mode heuristic --source 0 --dest 7
    ttplan exp1 --out results/exp1
    ttplan exp2 --bundles 20 80 --regression-nos 2 5 9 --out results/exp2
    ttplan gen-table --map map2 --max-k 50 --out table.csv

Flags given on the command line override the matching field of ``--config``.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .harness import ConfigError, ExperimentConfig
from .planner import MODES, K_MODES, NoPathError, execute_path, shortest_path
from .topomap import MapFormatError, MapValidationError
from .worldsim import BatteryExhausted

log = logging.getLogger("ttplan")


def _common(p):
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--out", help="output directory (file for gen-table)")
    p.add_argument("--score", choices=harness.SCORES, help="per-plan score (default executed)")
    p.add_argument("--k-mode", choices=K_MODES, help="static filter step indexing (default per_edge)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    ap = argparse.ArgumentParser(prog="ttplan", description="Travel-time estimation and route planning.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan and drive one path")
    _common(p)
    p.add_argument("--map", required=True, help="builtin map name or map file")
    p.add_argument("--mode", choices=MODES, default="heuristic")
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--dest", type=int, required=True)
    p.add_argument("--regression-no", type=int, default=2)

    p = sub.add_parser("exp1", help="heuristic vs static estimates")
    _common(p)
    p.add_argument("--maps", nargs="+")
    p.add_argument("--n-plans", type=int)

    p = sub.add_parser("exp2", help="heuristic vs dynamic estimates")
    _common(p)
    p.add_argument("--maps", nargs="+")
    p.add_argument("--bundles", nargs="+", type=int)
    p.add_argument("--regression-nos", nargs="+", type=int)

    p = sub.add_parser("gen-table", help="write an offline observation table")
    _common(p)
    p.add_argument("--map", required=True)
    p.add_argument("--max-k", type=int, default=None, help="traversals per edge (default n_plans + 1)")
    return ap


def load_config(args):
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    d = cfg.to_dict()
    overrides = {
        "seed": args.seed,
        "score": args.score,
        "k_mode": args.k_mode,
        "maps": getattr(args, "maps", None),
        "n_plans": getattr(args, "n_plans", None),
        "bundles": getattr(args, "bundles", None),
        "regression_nos": getattr(args, "regression_nos", None),
    }
    d.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(d)


def _print_summary(summary, out):
    print(f"{'map':<8}{'bundle':>7}{'reg':>5}  {'mode':<11}{'n':>5}{'mean':>10}{'std':>9}{'saving%':>9}",
          file=out)
    for c in summary.cells:
        print(f"{c['map']:<8}{c['bundle']:>7}{c['regression_no']!s:>5}  {c['mode']:<11}{c['n']:>5}"
              f"{c['mean']:>10.3f}{c['std']:>9.3f}{c['saving_pct']:>9.2f}", file=out)


def cmd_plan(args, config, out):
    topo = harness.resolve_map(args.map)
    world = harness.make_world(topo, config)
    table = None
    if args.mode == "static_kf":
        table = harness.offline_table(topo, config, harness.table_size(topo, config, config.n_plans))
    provider = harness.make_provider(args.mode, topo, world, config,
                                     regression_no=args.regression_no, table=table)
    path = execute_path(world, shortest_path(topo, args.source, args.dest, provider), recharge=True)
    print(f"path: {'-'.join(str(n) for n in path.nodes(topo))}", file=out)
    print(f"planned_cost: {path.planned_cost:.4f}", file=out)
    print(f"executed_cost: {path.executed_cost:.4f}", file=out)
    if args.out:
        record = {"run_id": f"plan-{topo.name}-{args.mode}", "experiment": "plan", "map": topo.name,
                  "mode": args.mode, "bundle": 1, "regression_no": "", "plan": 0,
                  "source": args.source, "dest": args.dest,
                  "path": "-".join(str(n) for n in path.nodes(topo)),
                  "planned_cost": path.planned_cost, "executed_cost": path.executed_cost,
                  "score": path.executed_cost, "recharges": path.recharges}
        harness.emit_csv(harness.RunSummary(), [record], args.out, config)


def cmd_experiment(args, config, out):
    if args.command == "exp1":
        summary, records = harness.run_experiment1(config)
    else:
        summary, records = harness.run_experiment2(config)
    _print_summary(summary, out)
    if args.out:
        files = harness.emit_csv(summary, records, args.out, harness.resolved_config(config, args.command))
        print("wrote " + ", ".join(str(f) for f in files), file=out)


def cmd_gen_table(args, config, out):
    topo = harness.resolve_map(args.map)
    max_k = args.max_k if args.max_k is not None else harness.table_size(topo, config, config.n_plans)
    if max_k < 1:
        raise ConfigError("--max-k must be >= 1")
    table = harness.offline_table(topo, config, max_k)
    if args.out:
        table.to_csv(args.out)
        print(f"wrote {args.out} ({topo.edge_count} edges x {max_k} traversals)", file=out)
    else:
        table.to_csv(out)


COMMANDS = {"plan": cmd_plan, "exp1": cmd_experiment, "exp2": cmd_experiment, "gen-table": cmd_gen_table}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args)
        COMMANDS[args.command](args, config, out)
    except (ConfigError, MapFormatError, MapValidationError, NoPathError, BatteryExhausted,
            KeyError, ValueError, OSError) as exc:
        print(f"ttplan: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
