"""Command-line pipeline: quota, score, prune, metrics, gaussian, imbalance.

Every run writes its output files atomically, echoes a one-line JSON summary
to stdout, and exits 0 on success, 1 with a machine-readable error object on
a module error, or 2 on bad arguments.  All randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import io
from .errors import PruneLabError
from .experiments import ARMS, analytic_reference_rows, run_threshold_experiment
from .metrics import correlation_density_accuracy, evaluate
from .mixture import GaussianMixture
from .pruning import (
    PrunePlan,
    extract_quotas,
    inject_imbalance,
    prune_random_global,
    prune_random_quota,
    prune_score_global,
    prune_score_quota,
)
from .quotas import cdbw_weights, drop_quotas
from .scores import average_scores, dynunc_scores, el2n_scores, forgetting_scores, kcenter_select


def _density(value: str) -> float:
    d = float(value)
    if not 0.0 < d <= 1.0:
        raise argparse.ArgumentTypeError("density must lie in (0, 1]")
    return d


def _seed(value: str) -> int:
    s = int(value)
    if s < 0:
        raise argparse.ArgumentTypeError("seed must be >= 0")
    return s


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prunelab",
        description="Data pruning toolkit: quotas, scores, plans, bias metrics, "
        "and two-Gaussian threshold experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    quota = sub.add_parser("quota", help="per-class retention quotas from sizes and recalls")
    quota.add_argument("--stats", required=True, help="class_stats.csv (class_id,size,recall)")
    quota.add_argument("--density", required=True, type=_density)
    quota.add_argument("--min-per-class", type=int, default=0)
    quota.add_argument("--cdbw-out", help="optional JSON of class weights 1 - recall")
    quota.add_argument("--out", required=True, help="quotas.csv")

    score = sub.add_parser("score", help="per-sample scores from telemetry or probabilities")
    score.add_argument(
        "--method", required=True, choices=["el2n", "forgetting", "dynunc", "average"]
    )
    score.add_argument("--telemetry", help="telemetry.jsonl (forgetting, dynunc)")
    score.add_argument("--probs", help='probs.jsonl lines {"id","probs","label"} (el2n)')
    score.add_argument("--window", type=int, default=2, help="dynunc window length")
    score.add_argument("--inputs", nargs="+", help="score CSVs to average")
    score.add_argument("--out", required=True, help="scores.csv")

    prune = sub.add_parser("prune", help="build a retention plan over a manifest")
    prune.add_argument("--manifest", required=True, help="manifest.csv (sample_id,class_id)")
    prune.add_argument(
        "--method",
        required=True,
        choices=["random", "random-quota", "score", "score-quota", "kcenter"],
    )
    prune.add_argument("--density", type=_density, help="required unless quotas drive counts")
    prune.add_argument("--seed", type=_seed, default=0)
    prune.add_argument("--scores", help="scores.csv (score methods)")
    prune.add_argument("--quotas", help="quotas.csv (quota methods)")
    prune.add_argument("--embeddings", help="embeddings.csv (kcenter)")
    prune.add_argument("--metric", choices=["euclidean", "cosine"], default="euclidean")
    prune.add_argument("--out", required=True, help="plan.jsonl")

    metrics = sub.add_parser("metrics", help="bias metrics from a predictions file")
    metrics.add_argument("--predictions", required=True, help="predictions.csv")
    metrics.add_argument("--group-weights", help="JSON of group -> weight")
    metrics.add_argument("--quotas", help="quotas.csv for the density/recall correlation")
    metrics.add_argument("--stats", help="class_stats.csv for the density/recall correlation")
    metrics.add_argument("--out", required=True, help="report.json")

    gaussian = sub.add_parser("gaussian", help="two-Gaussian threshold experiments")
    gsub = gaussian.add_subparsers(dest="gaussian_command", required=True)
    for name, needs_protocol in (("fig3", True), ("analytic", False)):
        g = gsub.add_parser(
            name,
            help="replicated pruning experiment" if needs_protocol else "analytic reference rows",
        )
        g.add_argument("--mu0", required=True, type=float)
        g.add_argument("--mu1", required=True, type=float)
        g.add_argument("--sigma0", required=True, type=float)
        g.add_argument("--sigma1", required=True, type=float)
        g.add_argument("--phi0", type=float, default=0.5)
        g.add_argument("--out", required=True, help="experiment CSV")
        if needs_protocol:
            g.add_argument("--arm", required=True, choices=list(ARMS))
            g.add_argument("--density", required=True, type=_density)
            g.add_argument("--replicates", type=int, default=10)
            g.add_argument("--points", type=int, default=400)
            g.add_argument("--seed", type=_seed, default=0)
            g.add_argument("--margin", type=float, help="override the solved ssp margin")

    imbalance = sub.add_parser("imbalance", help="inject exponential class imbalance")
    imbalance.add_argument("--manifest", required=True)
    imbalance.add_argument("--factor", required=True, type=float)
    imbalance.add_argument("--seed", type=_seed, default=0)
    imbalance.add_argument("--out", required=True, help="subsampled manifest.csv")

    return parser


def _read_probs_jsonl(path: str):
    probs = {}
    labels = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                sid = int(obj["id"])
                probs[sid] = [float(v) for v in obj["probs"]]
                labels[sid] = int(obj["label"])
            except (KeyError, TypeError, ValueError) as exc:
                raise PruneLabError(f"{path}:{lineno}: bad probs record: {exc}") from exc
    if not probs:
        raise PruneLabError(f"{path}: no probability records")
    return probs, labels


def _cmd_quota(args) -> dict:
    stats = io.read_class_stats(args.stats)
    quotas = drop_quotas(stats, args.density, min_per_class=args.min_per_class)
    io.write_quotas(args.out, quotas)
    summary = {
        "command": "quota",
        "classes": len(stats),
        "total_retained": sum(quotas.target_counts.values()),
        "out": args.out,
    }
    if args.cdbw_out:
        weights = cdbw_weights({s.class_id: s.recall for s in stats})
        io.atomic_write_text(
            args.cdbw_out,
            json.dumps({str(k): float(io.fmt(v)) for k, v in weights.weights.items()}) + "\n",
        )
        summary["cdbw_out"] = args.cdbw_out
    return summary


def _cmd_score(args, parser: argparse.ArgumentParser) -> dict:
    if args.method == "el2n":
        if not args.probs:
            parser.error("score --method el2n requires --probs")
        probs, labels = _read_probs_jsonl(args.probs)
        table = el2n_scores(probs, labels)
    elif args.method in ("forgetting", "dynunc"):
        if not args.telemetry:
            parser.error(f"score --method {args.method} requires --telemetry")
        log = io.read_telemetry(args.telemetry)
        table = (
            forgetting_scores(log)
            if args.method == "forgetting"
            else dynunc_scores(log, args.window)
        )
    else:
        if not args.inputs or len(args.inputs) < 1:
            parser.error("score --method average requires --inputs")
        table = average_scores([io.read_scores(p) for p in args.inputs])
    io.write_scores(args.out, table)
    return {
        "command": "score",
        "method": table.method,
        "samples": len(table.entries),
        "out": args.out,
    }


def _quotas_for(man, path: str):
    # the requested density is the quota total over the manifest size, which
    # quotas.csv alone cannot reconstruct
    quotas = io.read_quotas(path)
    requested = min(1.0, sum(quotas.target_counts.values()) / len(man))
    return type(quotas)(quotas.densities, quotas.target_counts, requested)


def _cmd_prune(args, parser: argparse.ArgumentParser) -> dict:
    man = io.read_manifest(args.manifest)
    if args.method == "random":
        if args.density is None:
            parser.error("prune --method random requires --density")
        plan = prune_random_global(man, args.density, args.seed)
    elif args.method == "random-quota":
        if not args.quotas:
            parser.error("prune --method random-quota requires --quotas")
        plan = prune_random_quota(man, _quotas_for(man, args.quotas), args.seed)
    elif args.method == "score":
        if not args.scores or args.density is None:
            parser.error("prune --method score requires --scores and --density")
        plan = prune_score_global(man, io.read_scores(args.scores), args.density)
    elif args.method == "score-quota":
        if not args.scores or not args.quotas:
            parser.error("prune --method score-quota requires --scores and --quotas")
        plan = prune_score_quota(man, io.read_scores(args.scores), _quotas_for(man, args.quotas))
    else:  # kcenter
        if not args.embeddings or args.density is None:
            parser.error("prune --method kcenter requires --embeddings and --density")
        emb = io.read_embeddings(args.embeddings)
        missing = {sid for sid, _ in man.samples} - set(emb.vectors)
        if missing:
            raise PruneLabError(f"{len(missing)} manifest samples have no embedding")
        keep = round(args.density * len(man))
        selected = kcenter_select(emb, keep, metric=args.metric)
        plan = PrunePlan(frozenset(selected), "kcenter", args.density, None)
    io.write_plan(args.out, plan)
    realized = extract_quotas(plan, man)
    return {
        "command": "prune",
        "method": plan.method,
        "retained": len(plan.retained),
        "per_class": {str(k): v for k, v in realized.target_counts.items()},
        "out": args.out,
    }


def _cmd_metrics(args, parser: argparse.ArgumentParser) -> dict:
    preds = io.read_predictions(args.predictions)
    weights = io.read_group_weights(args.group_weights) if args.group_weights else None
    report = evaluate(preds, weights)
    io.write_report(args.out, report)
    summary = {
        "command": "metrics",
        "classes": len(report.recalls),
        "worst_class": float(io.fmt(report.worst_class)),
        "average": float(io.fmt(report.average)),
        "out": args.out,
    }
    if args.quotas or args.stats:
        if not (args.quotas and args.stats):
            parser.error("correlation needs both --quotas and --stats")
        quotas = io.read_quotas(args.quotas)
        stats = io.read_class_stats(args.stats)
        corr = correlation_density_accuracy(
            quotas.densities, {s.class_id: s.recall for s in stats}
        )
        summary["density_recall_correlation"] = float(io.fmt(corr))
    return summary


def _cmd_gaussian(args) -> dict:
    m = GaussianMixture(
        args.mu0, args.mu1, args.sigma0, args.sigma1, args.phi0, 1.0 - args.phi0
    )
    if args.gaussian_command == "fig3":
        result = run_threshold_experiment(
            m,
            arm=args.arm,
            density=args.density,
            replicates=args.replicates,
            points=args.points,
            seed=args.seed,
            margin=args.margin,
        )
        io.write_experiment_rows(args.out, result.rows)
        summary = {
            "command": "gaussian",
            "arm": result.arm,
            "mean_threshold": float(io.fmt(result.mean_threshold)),
            "out": args.out,
        }
        if result.margin is not None:
            summary["margin"] = float(io.fmt(result.margin))
        return summary
    rows = analytic_reference_rows(m)
    io.write_experiment_rows(args.out, rows)
    return {
        "command": "gaussian",
        "arm": "analytic",
        "avg_optimal": float(io.fmt(rows[0].threshold)),
        "worst_class": float(io.fmt(rows[1].threshold)),
        "out": args.out,
    }


def _cmd_imbalance(args) -> dict:
    man = io.read_manifest(args.manifest)
    out = inject_imbalance(man, args.factor, args.seed)
    io.write_manifest(args.out, out)
    return {
        "command": "imbalance",
        "sizes": {str(k): v for k, v in out.class_sizes.items()},
        "out": args.out,
    }


_INPUT_PATH_ARGS = (
    "stats",
    "telemetry",
    "probs",
    "manifest",
    "scores",
    "quotas",
    "embeddings",
    "predictions",
    "group_weights",
)


def _validate_input_paths(parser: argparse.ArgumentParser, args) -> None:
    import os

    paths = []
    for name in _INPUT_PATH_ARGS:
        value = getattr(args, name, None)
        if value:
            paths.append(value)
    paths.extend(getattr(args, "inputs", None) or [])
    for path in paths:
        if not os.path.exists(path):
            parser.error(f"input file not found: {path}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate_input_paths(parser, args)
    try:
        if args.command == "quota":
            summary = _cmd_quota(args)
        elif args.command == "score":
            summary = _cmd_score(args, parser)
        elif args.command == "prune":
            summary = _cmd_prune(args, parser)
        elif args.command == "metrics":
            summary = _cmd_metrics(args, parser)
        elif args.command == "gaussian":
            summary = _cmd_gaussian(args)
        else:
            summary = _cmd_imbalance(args)
    except PruneLabError as exc:
        print(json.dumps(exc.payload()))
        return 1
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__.lower(), "message": str(exc)}))
        return 1
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
