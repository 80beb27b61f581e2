"""Offline replay training and evaluation reporting.

Replay uses the rejection rule: an event counts (and trains the policy)
only when the policy's selected arm equals the logged item's strategy.
Per-arm expected reward is the mean logged reward over matched events;
arms with no matches report None, never zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataio import Dataset
from .errors import ContractError, ReferentialIntegrityError
from .metrics import compute_auc, compute_ctr, macro_average, precision_recall_at_k
from .pipeline import Pipeline
from .policies import PolicyState, linucb_score, select_arm, update


@dataclass
class ReplayResult:
    policy_name: str
    total_events: int
    matched: np.ndarray  # per-arm matched event counts
    reward_sums: np.ndarray
    policy: PolicyState
    fold: int | None = None

    @property
    def matched_total(self) -> int:
        return int(self.matched.sum())

    @property
    def matched_fraction(self) -> float:
        if self.total_events == 0:
            return 0.0
        return self.matched_total / self.total_events

    def mean_reward(self, arm_id: int):
        if self.matched[arm_id] == 0:
            return None
        return float(self.reward_sums[arm_id] / self.matched[arm_id])

    def mean_rewards(self) -> list:
        return [self.mean_reward(a.id) for a in self.policy.arms]


def replay_train(
    policy: PolicyState, events, pipeline: Pipeline, fold: int | None = None
) -> ReplayResult:
    """Train by rejection replay over time-ordered logged events."""
    n_arms = policy.n_arms
    matched = np.zeros(n_arms, dtype=int)
    reward_sums = np.zeros(n_arms)
    total = 0
    for ev in events:
        total += 1
        if ev.item_id not in pipeline.item_strategy:
            raise ReferentialIntegrityError(
                f"item {ev.item_id!r} has no strategy mapping"
            )
        logged_arm = pipeline.item_strategy[ev.item_id]
        contexts = pipeline.arm_contexts(ev.user_id)
        chosen = select_arm(policy, contexts)
        if chosen.id != logged_arm:
            continue
        matched[chosen.id] += 1
        reward_sums[chosen.id] += ev.response
        update(policy, chosen, contexts[chosen.id], ev.response)
    return ReplayResult(
        policy_name=policy.kind,
        total_events=total,
        matched=matched,
        reward_sums=reward_sums,
        policy=policy,
        fold=fold,
    )


def rank_items(
    policy: PolicyState, user_id: str, candidates, k: int, pipeline: Pipeline
):
    """Greedy top-k candidate list: (item_id, score) in descending order.

    Exploration bonuses are excluded; LinTS scores with its posterior
    mean.  Ties break on ascending item id.
    """
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    candidates = list(candidates)
    if not candidates:
        raise ContractError("candidate list must be nonempty")
    scored = []
    for item_id in candidates:
        x = pipeline.assemble_context(user_id, item_id)
        model = policy.model_for(pipeline.item_strategy[item_id])
        scored.append((item_id, linucb_score(model, x, 0.0)))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[: min(k, len(scored))]


@dataclass
class EvaluationReport:
    policy_name: str
    fold: int
    seed: int
    arm_names: list[str]
    matched_counts: list[int]
    expected_rewards: list  # per arm, None when unmatched
    curves: dict = field(default_factory=dict)  # metric -> list over k=1..K

    K = property(lambda self: len(next(iter(self.curves.values()))))


def build_report(
    replay: ReplayResult,
    rankings: dict,
    truth: dict,
    K: int = 10,
    fold: int = 0,
    seed: int = 0,
) -> EvaluationReport:
    """Per-arm expected rewards plus macro-averaged metric curves.

    ``rankings`` maps user -> [(item_id, score), ...]; ``truth`` maps
    user -> {item_id: response}.  Metrics at each k are averaged over
    users for whom they are defined.
    """
    if replay.fold is not None and replay.fold != fold:
        raise ContractError(
            f"replay comes from fold {replay.fold}, report is for fold {fold}"
        )
    curves = {metric: [] for metric in ("auc", "ctr", "precision", "recall")}
    for k in range(1, K + 1):
        per_user = {metric: [] for metric in curves}
        for user, ranked in rankings.items():
            user_truth = truth.get(user, {})
            top = ranked[:k]
            top_ids = [item for item, _ in top]
            in_truth = [(item, s) for item, s in top if item in user_truth]
            if in_truth:
                auc = compute_auc(
                    [s for _, s in in_truth],
                    [user_truth[item] for item, _ in in_truth],
                )
            else:
                auc = None
            per_user["auc"].append(auc)
            per_user["ctr"].append(compute_ctr(top_ids, user_truth))
            precision, recall = precision_recall_at_k(top_ids, user_truth, k)
            per_user["precision"].append(precision)
            per_user["recall"].append(recall)
        for metric in curves:
            curves[metric].append(macro_average(per_user[metric]))
    return EvaluationReport(
        policy_name=replay.policy_name,
        fold=fold,
        seed=seed,
        arm_names=[a.name for a in replay.policy.arms],
        matched_counts=[int(c) for c in replay.matched],
        expected_rewards=replay.mean_rewards(),
        curves=curves,
    )


def evaluate_fold(
    policy: PolicyState,
    ds: Dataset,
    pipeline: Pipeline,
    train_idx,
    test_idx,
    K: int = 10,
    fold: int = 0,
    seed: int = 0,
) -> EvaluationReport:
    """Train on one fold's complement, report on the held-out fold.

    Training replays the train events; the reported per-arm expected
    rewards come from a continuing replay over the test events.  Ranking
    metrics use greedy top-K lists over the test-fold item pool.
    """
    train_events = [ds.interactions[i] for i in train_idx]
    test_events = [ds.interactions[i] for i in test_idx]
    replay_train(policy, train_events, pipeline, fold=fold)
    test_replay = replay_train(policy, test_events, pipeline, fold=fold)

    truth: dict[str, dict[str, int]] = {}
    for ev in test_events:
        truth.setdefault(ev.user_id, {})[ev.item_id] = ev.response
    candidates = sorted({ev.item_id for ev in test_events})
    rankings = {
        user: rank_items(policy, user, candidates, K, pipeline)
        for user in sorted(truth)
    }
    return build_report(test_replay, rankings, truth, K=K, fold=fold, seed=seed)
