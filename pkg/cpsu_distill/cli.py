"""Command-line entry point: simulate, distill, evaluate, prune, report and sweep."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
import typing as t
from pathlib import Path

from natsort import natsorted

from cpsu_distill.config import RunConfig
from cpsu_distill.distill.episodes import save_trajectory
from cpsu_distill.distill.iterative import load_manifest, run_distillation, save_run
from cpsu_distill.distill.sweep import run_depth_sweep, write_sweep_csv
from cpsu_distill.evalstats.evaluation import evaluate_policy
from cpsu_distill.evalstats.report import report_from_manifest
from cpsu_distill.evalstats.summary import EvalSummary, summarize_logs
from cpsu_distill.exceptions import CPSUError
from cpsu_distill.policies.base import ConstantPolicy, Policy
from cpsu_distill.policies.energy import EnergyOracle
from cpsu_distill.policies.mlp import load_mlp
from cpsu_distill.sim.config import SimConfig
from cpsu_distill.sim.environment import CartPoleSwingUp
from cpsu_distill.trees.pruning import prune_argmax
from cpsu_distill.trees.serialization import load_tree, save_tree
from cpsu_distill.trees.tree import count_nodes, count_params

logger = logging.getLogger(__name__)

REFERENCE_MLP_PARAMS = 4675
TREE_SUFFIXES = (".json", ".bin")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Reports usage errors with exit code 1 instead of argparse's 2."""

    def error(self, message: str) -> t.NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _depth_list(text: str) -> t.List[int]:
    try:
        depths = [int(d) for d in text.split(",") if d.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated depths, got {text!r}")
    if not depths:
        raise argparse.ArgumentTypeError("no depths given")
    return depths


def load_policy(ref: str, sim_config: SimConfig) -> Policy:
    """Resolves ``energy``, ``noop``, ``mlp:<path>``, ``tree:<path>`` or a bare tree path."""
    if ref == "energy":
        return EnergyOracle(sim_config=sim_config)
    if ref == "noop":
        return ConstantPolicy()
    if ref.startswith("mlp:"):
        return load_mlp(ref[4:])
    if ref.startswith("tree:"):
        return load_tree(ref[5:])
    if Path(ref).suffix.lower() in TREE_SUFFIXES:
        return load_tree(ref)
    raise UsageError(
        f"unknown policy {ref!r}: use energy, noop, mlp:<path> or tree:<path>"
    )


def _output_path(out_dir: Path, name: str) -> Path:
    relative = Path(name)
    if relative.is_absolute() or ".." in relative.parts:
        raise UsageError(f"{name!r} must be a relative path inside the output directory")
    return out_dir / relative


def _print_summary(name: str, summary: EvalSummary) -> None:
    print(f"{name}: n={summary.n} mean={summary.mean:.2f} std={summary.std:.2f}")
    print(
        f"  min={summary.min:.2f} q1={summary.q1:.2f} median={summary.median:.2f} "
        f"q3={summary.q3:.2f} max={summary.max:.2f}"
    )
    if summary.zenith_episodes is not None:
        first = (
            "n/a" if summary.first_zenith_median is None else f"{summary.first_zenith_median:.1f}"
        )
        print(
            f"  zenith episodes={summary.zenith_episodes} "
            f"median first zenith step={first} "
            f"mean zenith steps={summary.zenith_steps_mean:.1f} "
            f"mean return without bonus={summary.return_without_bonus_mean:.2f}"
        )


def _write_json(document: t.Any, filepath: Path) -> Path:
    filepath.parent.mkdir(parents=True, exist_ok=True)
    with open(filepath, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=1)
        f.write("\n")
    return filepath


def cmd_simulate(args: argparse.Namespace, config: RunConfig) -> int:
    policy = load_policy(args.policy, config.sim)
    seed = config.master_seed
    logs = evaluate_policy(policy, CartPoleSwingUp(config.sim), args.episodes, seed)
    print(
        f"{'episode':>7} {'seed':>10} {'steps':>5} {'return':>10} {'no_bonus':>10} "
        f"{'zenith':>6} {'first':>5} {'end':>10}"
    )
    for k, log in enumerate(logs):
        first = "-" if log.first_zenith_step is None else str(log.first_zenith_step)
        end = "terminated" if log.terminated else "truncated"
        print(
            f"{k:>7} {log.seed:>10} {len(log):>5} {log.total_return:>10.2f} "
            f"{log.return_without_bonus:>10.2f} {log.zenith_step_count:>6} {first:>5} {end:>10}"
        )
    if args.dump_trajectories:
        out_dir = Path(config.output_dir) / "trajectories"
        out_dir.mkdir(parents=True, exist_ok=True)
        for k, log in enumerate(logs):
            save_trajectory(log, out_dir / f"episode_{k}.csv")
        print(f"trajectories written to {out_dir}")
    return 0


def cmd_distill(args: argparse.Namespace, config: RunConfig) -> int:
    oracle = load_policy(config.oracle, config.sim)
    result = run_distillation(config.distill, oracle, config.sim, threads=config.threads)
    out_dir = Path(config.output_dir)
    manifest_path = save_run(result, config.distill, config.sim, out_dir, config.oracle)
    report_from_manifest(load_manifest(manifest_path), out_dir / "report")

    filtered = result.filtered
    print(
        f"base episodes: {len(result.base_logs)}, without zenith: "
        f"{len(filtered.rejected_no_zenith)}, outliers: {len(filtered.rejected_outlier)}, "
        f"kept: {len(filtered.kept)}"
    )
    print(
        f"{'iter':>4} {'best':>4} {'min':>10} {'median':>10} {'max':>10} "
        f"{'params':>6} {'samples':>8}"
    )
    for record in result.records:
        print(
            f"{record.iteration:>4} {record.best_tree_id:>4} {record.min_mean_return:>10.2f} "
            f"{record.median_mean_return:>10.2f} {record.max_mean_return:>10.2f} "
            f"{record.param_counts[record.best_tree_id]:>6} {record.dataset_size_before:>8}"
        )
    print(
        f"best tree: iteration {result.best_iteration}, "
        f"mean return {result.best_record.best_mean_return:.2f}"
    )
    print(f"manifest written to {manifest_path}")
    return 0


def _tree_files(directory: Path) -> t.List[Path]:
    files = [p for p in directory.rglob("*") if p.suffix.lower() in TREE_SUFFIXES]
    files = [p for p in files if p.name != "manifest.json"]
    return natsorted(files, key=lambda p: p.relative_to(directory).as_posix())


def cmd_evaluate(args: argparse.Namespace, config: RunConfig) -> int:
    seed = config.master_seed
    target = Path(args.target)
    if target.is_dir():
        files = _tree_files(target)
        if not files:
            raise UsageError(f"no tree files found in {target}")
        policies = [(p.relative_to(target).as_posix(), load_tree(p)) for p in files]
    else:
        policies = [(args.target, load_policy(args.target, config.sim))]

    summaries = {}
    for name, policy in policies:
        logs = evaluate_policy(policy, CartPoleSwingUp(config.sim), args.episodes, seed)
        summary = summarize_logs(logs)
        summaries[name] = summary
        _print_summary(name, summary)
    summary_path = _write_json(
        {name: s.to_dict() for name, s in summaries.items()},
        Path(config.output_dir) / "summary.json",
    )
    print(f"summary written to {summary_path}")
    return 0


def cmd_prune(args: argparse.Namespace, config: RunConfig) -> int:
    tree = load_tree(args.tree)
    pruned = prune_argmax(tree)
    source = Path(args.tree)
    name = args.output or f"{source.stem}_pruned{source.suffix}"
    out_path = _output_path(Path(config.output_dir), name)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_tree(pruned, out_path)

    before, after = count_nodes(tree), count_nodes(pruned)
    params_before, params_after = count_params(tree), count_params(pruned)
    print(f"before: {before[0]} decision nodes, {before[1]} leaves, {params_before} params")
    print(f"after:  {after[0]} decision nodes, {after[1]} leaves, {params_after} params")
    print(f"reduction vs unpruned: {100.0 * (1.0 - params_after / params_before):.1f}%")
    baseline = args.baseline_params
    print(
        f"reduction vs baseline ({baseline} params): "
        f"{100.0 * (1.0 - params_after / baseline):.1f}%"
    )
    print(f"pruned tree written to {out_path}")
    return 0


def cmd_report(args: argparse.Namespace, config: RunConfig) -> int:
    manifest = load_manifest(args.run_dir)
    out_dir = Path(config.output_dir) / "report"
    written = report_from_manifest(manifest, out_dir)
    for path in written:
        print(path)
    return 0


def cmd_sweep(args: argparse.Namespace, config: RunConfig) -> int:
    oracle = load_policy(config.oracle, config.sim)
    points = run_depth_sweep(
        config.distill, args.depths, oracle, config.sim, threads=config.threads
    )
    print(f"{'depth':>5} {'return':>10} {'nodes':>11} {'params':>6} {'pruned':>11} {'params':>6}")
    for p in points:
        print(
            f"{p.depth:>5} {p.mean_return:>10.2f} {f'{p.decisions}/{p.leaves}':>11} "
            f"{p.params:>6} {f'{p.pruned_decisions}/{p.pruned_leaves}':>11} {p.pruned_params:>6}"
        )
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"sweep written to {write_sweep_csv(points, out_dir / 'sweep.csv')}")
    return 0


def _add_distill_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--oracle", help="energy or mlp:<path> (default from config)")
    parser.add_argument("--iterations", type=_positive_int, help="number of iterations")
    parser.add_argument("--n-trees", type=_positive_int, help="trees per iteration (N_T)")
    parser.add_argument("--depth", type=_positive_int, help="tree depth limit (d)")
    parser.add_argument(
        "--eval-episodes", type=_positive_int, help="evaluation episodes per tree (n_e)"
    )
    parser.add_argument(
        "--base-episodes", type=_positive_int, help="oracle episodes for the base samples"
    )
    parser.add_argument("--cutoff", type=_positive_int, help="steps kept per episode (t_c)")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags override its values")
    common.add_argument("--seed", type=int, help="master seed (default from config)")
    common.add_argument("--out", help="output directory (default from config)")
    common.add_argument("--threads", type=_positive_int, help="worker processes")
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level on stderr (default WARNING)",
    )

    parser = _Parser(
        prog="cpsu-distill",
        description="Distil a cart-pole swing-up controller into oblique decision trees.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser(
        "simulate", parents=[common], help="run episodes and print their returns"
    )
    simulate.add_argument(
        "--policy", default="energy", help="energy, noop, mlp:<path> or tree:<path>"
    )
    simulate.add_argument("--episodes", type=_positive_int, default=1, help="episode count")
    simulate.add_argument(
        "--dump-trajectories",
        action="store_true",
        help="write one CSV per episode to <out>/trajectories",
    )
    simulate.set_defaults(func=cmd_simulate)

    distill = subparsers.add_parser(
        "distill", parents=[common], help="run the iterative distillation"
    )
    _add_distill_flags(distill)
    distill.set_defaults(func=cmd_distill)

    evaluate = subparsers.add_parser(
        "evaluate", parents=[common], help="evaluate a policy, tree file or directory of trees"
    )
    evaluate.add_argument("target", help="policy reference, tree file or directory")
    evaluate.add_argument("--episodes", type=_positive_int, default=20, help="episode count")
    evaluate.set_defaults(func=cmd_evaluate)

    prune = subparsers.add_parser(
        "prune", parents=[common], help="collapse subtrees with a single argmax action"
    )
    prune.add_argument("tree", help="tree file (.json or .bin)")
    prune.add_argument(
        "--output", help="file name inside the output directory (default <name>_pruned)"
    )
    prune.add_argument(
        "--baseline-params",
        type=_positive_int,
        default=REFERENCE_MLP_PARAMS,
        help=f"parameter count to compare against (default {REFERENCE_MLP_PARAMS})",
    )
    prune.set_defaults(func=cmd_prune)

    report = subparsers.add_parser(
        "report", parents=[common], help="export report data from a distillation run"
    )
    report.add_argument("run_dir", help="directory holding manifest.json")
    report.set_defaults(func=cmd_report)

    sweep = subparsers.add_parser(
        "sweep", parents=[common], help="repeat the distillation for several depths"
    )
    _add_distill_flags(sweep)
    sweep.add_argument(
        "--depths", type=_depth_list, default=[10, 8, 6], help="comma-separated depths"
    )
    sweep.set_defaults(func=cmd_sweep)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_json(args.config) if args.config else RunConfig()
    return config.with_overrides(
        seed=args.seed,
        output_dir=args.out,
        threads=args.threads,
        oracle=getattr(args, "oracle", None),
        iterations=getattr(args, "iterations", None),
        n_trees=getattr(args, "n_trees", None),
        depth=getattr(args, "depth", None),
        eval_episodes=getattr(args, "eval_episodes", None),
        base_episodes=getattr(args, "base_episodes", None),
        cutoff=getattr(args, "cutoff", None),
    )


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    """Runs one command.

    Returns:
        0 on success, 1 on user or configuration errors, 2 on internal errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = resolve_config(args)
        return args.func(args, config)
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename or e}", file=sys.stderr)
        return 1
    except (CPSUError, NotImplementedError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
