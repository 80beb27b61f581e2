"""Matrix-valued feature builders: TF-IDF, NMF, topic bits, selection."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, ReferentialIntegrityError
from .features_text import tokenize

#: Columns with variance at or below this are dropped before selection.
VARIANCE_FLOOR = 1e-8


def build_tfidf(corpus, vocabulary=None):
    """TF-IDF matrix (csr) plus its sorted vocabulary.

    tf is the raw term count, idf = ln((1+N)/(1+df)) + 1, and nonzero
    rows are l2-normalized.  Pass ``vocabulary`` to transform new
    documents against an already-fitted vocabulary.
    """
    docs = [tokenize(doc) for doc in corpus]
    if vocabulary is None:
        if not docs:
            raise ContractError("corpus must be nonempty")
        vocabulary = sorted({t for doc in docs for t in doc})
    index = {term: j for j, term in enumerate(vocabulary)}

    n_docs = len(docs)
    rows, cols, vals = [], [], []
    df = np.zeros(len(vocabulary))
    for i, doc in enumerate(docs):
        counts: dict[int, int] = {}
        for tok in doc:
            j = index.get(tok)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        for j, c in sorted(counts.items()):
            rows.append(i)
            cols.append(j)
            vals.append(float(c))
            df[j] += 1

    X = sp.csr_matrix(
        (vals, (rows, cols)), shape=(n_docs, len(vocabulary)), dtype=float
    )
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
    X = X.multiply(idf).tocsr()
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    nonzero = norms > 0
    scale = np.ones(n_docs)
    scale[nonzero] = 1.0 / norms[nonzero]
    X = sp.diags(scale) @ X
    return X.tocsr(), list(vocabulary)


def _frobenius(X, W, H) -> float:
    return float(np.linalg.norm(X - W @ H, "fro"))


def nmf_factorize(X, rank: int, iters: int = 200, seed: int = 0, tol: float = 1e-4):
    """Lee-Seung multiplicative-update NMF minimizing ||X - WH||_F.

    Stops after ``iters`` iterations or when the relative objective
    change drops below ``tol``.  Deterministic given ``seed``.
    """
    X = np.asarray(X.toarray() if sp.issparse(X) else X, dtype=float)
    if np.any(X < 0):
        raise ContractError("NMF input must be entrywise nonnegative")
    if rank < 1:
        raise ContractError(f"rank must be >= 1, got {rank}")
    n, m = X.shape
    rng = np.random.default_rng(seed)
    W = rng.uniform(0.1, 1.1, size=(n, rank))
    H = rng.uniform(0.1, 1.1, size=(rank, m))
    eps = 1e-10

    prev = _frobenius(X, W, H)
    for _ in range(iters):
        H *= (W.T @ X) / (W.T @ W @ H + eps)
        W *= (X @ H.T) / (W @ (H @ H.T) + eps)
        obj = _frobenius(X, W, H)
        if prev > 0 and (prev - obj) / prev < tol:
            prev = obj
            break
        prev = obj
    return W, H


def nmf_transform(X, H, iters: int = 200, seed: int = 0, tol: float = 1e-4):
    """Project new rows onto a fixed H by updating W only."""
    X = np.asarray(X.toarray() if sp.issparse(X) else X, dtype=float)
    if np.any(X < 0):
        raise ContractError("NMF input must be entrywise nonnegative")
    rng = np.random.default_rng(seed)
    W = rng.uniform(0.1, 1.1, size=(X.shape[0], H.shape[0]))
    eps = 1e-10
    prev = _frobenius(X, W, H)
    for _ in range(iters):
        W *= (X @ H.T) / (W @ (H @ H.T) + eps)
        obj = _frobenius(X, W, H)
        if prev > 0 and (prev - obj) / prev < tol:
            break
        prev = obj
    return W


def build_topic_features(subreddits, n: int = 120):
    """Top-n most frequent subreddits plus per-item one-hot topic bits.

    ``subreddits`` is the per-item subreddit list.  Ties in frequency
    break lexicographically; items outside the topic list get all-zero
    bits.
    """
    if not subreddits:
        raise ContractError("item list must be nonempty")
    counts: dict[str, int] = {}
    for s in subreddits:
        counts[s] = counts.get(s, 0) + 1
    topics = sorted(counts, key=lambda s: (-counts[s], s))[:n]
    index = {t: j for j, t in enumerate(topics)}
    bits = np.zeros((len(subreddits), len(topics)))
    for i, s in enumerate(subreddits):
        j = index.get(s)
        if j is not None:
            bits[i, j] = 1.0
    return topics, bits


def aggregate_comment_vectors(item_ids, item_vecs: dict) -> np.ndarray:
    """Mean vector of the items a user interacted with; zeros when none."""
    if not item_vecs:
        raise ContractError("item vector table is empty")
    dim = len(next(iter(item_vecs.values())))
    vecs = []
    for item_id in item_ids:
        if item_id not in item_vecs:
            raise ReferentialIntegrityError(f"no vector for item {item_id!r}")
        vecs.append(item_vecs[item_id])
    if not vecs:
        return np.zeros(dim)
    return np.mean(np.asarray(vecs, dtype=float), axis=0)


def select_features(X, y, m: int) -> list[int]:
    """Keep the m columns most correlated (point-biserial) with y.

    Constant columns (variance <= 1e-8) are dropped first; ties break on
    the lower column index and the result is sorted ascending.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] != y.shape[0]:
        raise ContractError("X and y row counts differ")
    if m < 1:
        raise ContractError(f"m must be >= 1, got {m}")
    variances = X.var(axis=0)
    survivors = [j for j in range(X.shape[1]) if variances[j] > VARIANCE_FLOOR]
    if m >= len(survivors):
        if m > len(survivors):
            warnings.warn(
                f"requested {m} features but only {len(survivors)} have variance; "
                "keeping all survivors",
                stacklevel=2,
            )
        return survivors

    y_std = y.std()
    scores = []
    for j in survivors:
        col = X[:, j]
        if y_std == 0.0:
            corr = 0.0
        else:
            corr = float(np.corrcoef(col, y)[0, 1])
            if not np.isfinite(corr):
                corr = 0.0
        scores.append((-abs(corr), j))
    kept = [j for _, j in sorted(scores)[:m]]
    return sorted(kept)
