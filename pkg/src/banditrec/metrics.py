"""Binary-recommender and ranking metrics (AUC, CTR, precision, recall).

All metrics are computed over the intersection set: the items that appear
both in the recommendation list and in the held-out truth.  Metrics that
are undefined for a user (single-class labels, empty intersection) return
None instead of a silent zero.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError


def compute_auc(scores, labels):
    """Pairwise probability that a positive outranks a negative; ties 0.5.

    Returns None when labels contain only one class.
    """
    scores = list(scores)
    labels = list(labels)
    if len(scores) != len(labels):
        raise ContractError("scores and labels must have equal length")
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    if not pos or not neg:
        return None
    # Rank-based O(n log n) formulation; equivalent to counting pairs with
    # ties credited 0.5.
    order = np.argsort(np.asarray(scores, dtype=float), kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = np.asarray(scores, dtype=float)[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for t in range(i, j + 1):
            ranks[order[t]] = mean_rank
        i = j + 1
    pos_rank_sum = sum(r for r, y in zip(ranks, labels) if y == 1)
    n_pos, n_neg = len(pos), len(neg)
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def compute_ctr(recommended, truth):
    """Fraction of recommended-and-known items that were upvoted.

    ``truth`` maps item id -> binary response.  Returns None when no
    recommended item appears in truth.
    """
    known = [item for item in recommended if item in truth]
    if not known:
        return None
    return sum(truth[item] for item in known) / len(known)


def precision_recall_at_k(ranked, truth, k: int):
    """(precision, recall) of the top-k of one ranked list against truth.

    Precision is over top-k items present in truth; recall is positives
    captured in the top-k over all positives in truth.  Either side is
    None when its denominator is empty.
    """
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    top = list(ranked)[:k]
    in_truth = [item for item in top if item in truth]
    hits = sum(truth[item] for item in in_truth)
    total_pos = sum(1 for r in truth.values() if r == 1)
    precision = hits / len(in_truth) if in_truth else None
    recall = hits / total_pos if total_pos else None
    return precision, recall


def macro_average(values):
    """Mean over defined (non-None) values; None when nothing is defined."""
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    return float(np.mean(defined))
