"""Command-line front end: ingest, featurize, train, evaluate, recommend, simulate."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config
from .dataio import (
    Dataset,
    assign_strategies,
    load_dataset,
    load_strategy_map,
    split_folds,
)
from .errors import BanditRecError, ConfigurationError, StateError
from .pipeline import (
    Pipeline,
    TextPipelineConfig,
    fit_synthetic_pipeline,
    fit_text_pipeline,
)
from .policies import (
    StrategyArm,
    init_policy,
    load_policy,
    save_policy,
)
from .replay import evaluate_fold, rank_items, replay_train
from .reports import emit_plots, write_arm_report, write_metric_report
from .synthetic import SyntheticConfig, generate_synthetic


def _arms_of(cfg: RunConfig) -> list[StrategyArm]:
    return [StrategyArm(i, name) for i, name in enumerate(cfg.arm_names)]


def _default_arm(cfg: RunConfig, arms) -> StrategyArm:
    return arms[cfg.arm_names.index(cfg.default_strategy)]


def _load_normalized(data_dir: Path) -> Dataset:
    for name in ("users.csv", "posts.jsonl", "interactions.csv"):
        if not (data_dir / name).exists():
            raise StateError(f"missing artifact: {data_dir / name}")
    return load_dataset(
        data_dir / "users.csv",
        data_dir / "posts.jsonl",
        data_dir / "interactions.csv",
    )


def _apply_strategies(ds: Dataset, cfg: RunConfig, arms) -> None:
    mapping = {}
    if cfg.strategy_map_path:
        mapping = load_strategy_map(cfg.strategy_map_path, cfg.arm_names)
    assign_strategies(ds, mapping, _default_arm(cfg, arms))


def _text_pipeline_config(cfg: RunConfig) -> TextPipelineConfig:
    if not cfg.lexicon_path or not cfg.embeddings_path:
        raise ConfigurationError(
            "data.lexicon and data.embeddings are required for text featurization"
        )
    return TextPipelineConfig(
        lexicon_path=cfg.lexicon_path,
        embeddings_path=cfg.embeddings_path,
        nmf_rank=cfg.nmf_rank,
        top_subreddits=cfg.top_subreddits,
        select_m=cfg.select_m,
        seed=cfg.seed,
    )


def _run_evaluation(ds: Dataset, cfg: RunConfig, arms, pipeline_factory):
    split = split_folds(ds, cfg.folds, cfg.seed)
    reports = []
    for fold in range(cfg.folds):
        train_idx = split.train_indices(fold)
        test_idx = split.fold_indices(fold)
        pipe = pipeline_factory(ds, train_idx, arms)
        for name in cfg.policy_names():
            policy = init_policy(
                name,
                arms,
                pipe.d,
                alpha=cfg.alpha,
                lam=cfg.lam,
                seed=cfg.seed * 1000 + fold,
            )
            reports.append(
                evaluate_fold(
                    policy,
                    ds,
                    pipe,
                    train_idx,
                    test_idx,
                    K=cfg.top_k_max,
                    fold=fold,
                    seed=cfg.seed,
                )
            )
    return reports


def _emit_reports(reports, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_arm_report(reports, out_dir / "report_arms.csv")
    write_metric_report(reports, out_dir / "report_metrics.csv")
    emit_plots(reports, out_dir)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_ingest(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    for name, path in (
        ("users", cfg.users_path),
        ("posts", cfg.posts_path),
        ("interactions", cfg.interactions_path),
    ):
        if not path:
            raise ConfigurationError(f"data.{name} is required for ingest")
    arms = _arms_of(cfg)
    ds = load_dataset(cfg.users_path, cfg.posts_path, cfg.interactions_path)
    _apply_strategies(ds, cfg, arms)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "users.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "karma", "subreddits"])
        for uid in sorted(ds.users):
            user = ds.users[uid]
            writer.writerow([uid, user.karma, "|".join(sorted(user.subreddits))])
    with open(out / "posts.jsonl", "w", encoding="utf-8") as fh:
        for iid in sorted(ds.items):
            item = ds.items[iid]
            fh.write(
                json.dumps(
                    {
                        "post_id": item.item_id,
                        "author": item.author,
                        "title": item.title,
                        "text": item.text,
                        "subreddit": item.subreddit,
                        "score": item.score,
                        "upvote_ratio": item.upvote_ratio,
                        "num_comments": item.num_comments,
                        "comments": item.comments,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    with open(out / "interactions.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "item_id", "response", "timestamp"])
        for ev in ds.interactions:
            writer.writerow([ev.user_id, ev.item_id, ev.response, ev.timestamp])
    summary = {
        "users": len(ds.users),
        "items": len(ds.items),
        "interactions": len(ds.interactions),
        "positive_rate": ds.positive_rate(),
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"ingested {summary['interactions']} interactions -> {out}")
    return 0


def cmd_featurize(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    pipe_cfg = _text_pipeline_config(cfg)
    arms = _arms_of(cfg)
    ds = _load_normalized(Path(args.data))
    _apply_strategies(ds, cfg, arms)
    train_idx = list(range(len(ds.interactions)))
    pipe = fit_text_pipeline(ds, train_idx, arms, pipe_cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pipe.save(out / "pipeline.json")
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(pipe.manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"fitted pipeline (d={pipe.d}) -> {out / 'pipeline.json'}")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    arms = _arms_of(cfg)
    ds = _load_normalized(Path(args.data))
    pipeline_path = Path(args.pipeline)
    if not pipeline_path.exists():
        raise StateError(f"missing artifact: {pipeline_path}")
    pipe = Pipeline.load(pipeline_path)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for name in cfg.policy_names():
        policy = init_policy(
            name, arms, pipe.d, alpha=cfg.alpha, lam=cfg.lam, seed=cfg.seed
        )
        result = replay_train(policy, ds.interactions, pipe)
        save_policy(policy, out / f"policy_{name}.json")
        summary[name] = {
            "total_events": result.total_events,
            "matched": result.matched_total,
            "matched_fraction": result.matched_fraction,
            "per_arm_mean_reward": result.mean_rewards(),
        }
        print(
            f"{name}: matched {result.matched_total}/{result.total_events} events"
        )
    with open(out / "replay_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    pipe_cfg = _text_pipeline_config(cfg)
    arms = _arms_of(cfg)
    ds = _load_normalized(Path(args.data))
    _apply_strategies(ds, cfg, arms)

    def factory(ds, train_idx, arms):
        return fit_text_pipeline(ds, train_idx, arms, pipe_cfg)

    reports = _run_evaluation(ds, cfg, arms, factory)
    _emit_reports(reports, Path(args.out))
    print(f"wrote reports for {len(reports)} (policy, fold) runs -> {args.out}")
    return 0


def cmd_recommend(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    pipeline_path = Path(args.pipeline)
    policy_path = Path(args.policy_state)
    for p in (pipeline_path, policy_path):
        if not p.exists():
            raise StateError(f"missing artifact: {p}")
    pipe = Pipeline.load(pipeline_path)
    policy = load_policy(policy_path)
    if args.user not in pipe.user_vecs:
        raise StateError(f"unknown user {args.user!r}")
    candidates = sorted(pipe.item_vecs)
    ranked = rank_items(policy, args.user, candidates, args.k, pipe)
    for item_id, score in ranked:
        print(f"{item_id}\t{score:.6f}")
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    arms = _arms_of(cfg)
    syn_cfg = SyntheticConfig(
        n_users=cfg.syn_n_users,
        n_items=cfg.syn_n_items,
        n_interactions=cfg.syn_n_interactions,
        d_latent=cfg.syn_d_latent,
        positive_rate_target=cfg.syn_positive_rate_target,
        reward_surface=cfg.syn_reward_surface,
        seed=cfg.seed,
        arm_names=cfg.arm_names,
    )
    ds, _truth = generate_synthetic(syn_cfg)

    def factory(ds, train_idx, arms):
        return fit_synthetic_pipeline(ds, train_idx, arms)

    reports = _run_evaluation(ds, cfg, arms, factory)
    out = Path(args.out)
    _emit_reports(reports, out)
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "interactions": len(ds.interactions),
                "positive_rate": ds.positive_rate(),
                "folds": cfg.folds,
                "policies": cfg.policy_names(),
                "seed": cfg.seed,
            },
            fh,
            indent=1,
            sort_keys=True,
        )
        fh.write("\n")
    print(
        f"simulated {len(ds.interactions)} interactions "
        f"(positive rate {ds.positive_rate():.3f}) -> {out}"
    )
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def _overrides(args) -> dict:
    return {
        "policy_name": getattr(args, "policy", None),
        "alpha": getattr(args, "alpha", None),
        "lam": getattr(args, "lam", None),
        "seed": getattr(args, "seed", None),
        "folds": getattr(args, "folds", None),
    }


def _add_common(sub) -> None:
    sub.add_argument("--config", help="INI config file")
    sub.add_argument("--policy", help="policy name (LinTS, LinUCB, LogUCB or all)")
    sub.add_argument("--alpha", type=float, help="exploration weight")
    sub.add_argument("--lam", type=float, help="ridge regularizer")
    sub.add_argument("--seed", type=int, help="rng seed")
    sub.add_argument("--folds", type=int, help="cross-validation fold count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditrec",
        description="Contextual bandit recommendation engine with offline replay",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("ingest", help="validate raw files into a dataset dir")
    _add_common(sub)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_ingest)

    sub = subs.add_parser("featurize", help="fit and persist the feature pipeline")
    _add_common(sub)
    sub.add_argument("--data", required=True, help="normalized dataset directory")
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_featurize)

    sub = subs.add_parser("train", help="replay-train policies and persist state")
    _add_common(sub)
    sub.add_argument("--data", required=True)
    sub.add_argument("--pipeline", required=True, help="pipeline.json path")
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_train)

    sub = subs.add_parser("evaluate", help="cross-fold evaluation with reports")
    _add_common(sub)
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_evaluate)

    sub = subs.add_parser("recommend", help="print top-k items for a user")
    _add_common(sub)
    sub.add_argument("--pipeline", required=True)
    sub.add_argument(
        "--policy-state", required=True, dest="policy_state", help="policy json"
    )
    sub.add_argument("--user", required=True)
    sub.add_argument("-k", type=int, default=10)
    sub.set_defaults(func=cmd_recommend)

    sub = subs.add_parser("simulate", help="synthetic dataset + full evaluation")
    _add_common(sub)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BanditRecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
