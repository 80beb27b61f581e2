"""Feature pipeline: from raw users/items to fixed-dimension contexts.

A fitted pipeline holds one numeric vector per user (after feature
selection) and per item, train-fold standardization statistics and one
descriptor vector per strategy arm.  Contexts are assembled as

    [user block | item block | strategy one-hot]

with the real blocks standardized by train-fold mean/std and the one-hot
passed through.  For arm selection the item block is replaced by the
arm's descriptor (the train-fold mean item vector of that strategy).

Two fit paths produce the same pipeline shape: the text path (emotion,
personality, empathy, TF-IDF + NMF, topics, selection) and the synthetic
path, which uses the generator's latent vectors directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataio import Dataset
from .errors import ContractError, StateError
from .features_matrix import (
    aggregate_comment_vectors,
    build_tfidf,
    build_topic_features,
    nmf_factorize,
    nmf_transform,
    select_features,
)
from .features_text import (
    empathy_score,
    infer_personality,
    load_big_five_matrix,
    load_embeddings,
    load_lexicon,
    load_seed_words,
    score_emotions,
    tokenize,
)
from .policies import StrategyArm

_STD_FLOOR = 1e-8


@dataclass
class TextPipelineConfig:
    lexicon_path: str
    embeddings_path: str
    nmf_rank: int = 16
    nmf_iters: int = 200
    top_subreddits: int = 120
    select_m: int = 50
    seed: int = 0
    big_five_path: str | None = None
    empathy_seeds_path: str | None = None


@dataclass
class Pipeline:
    """Fitted feature pipeline; assembly is pure and deterministic."""

    arms: list[StrategyArm]
    user_vecs: dict[str, np.ndarray]
    item_vecs: dict[str, np.ndarray]
    item_strategy: dict[str, int]
    mean: np.ndarray  # over the real (user + item) block
    std: np.ndarray
    arm_descriptors: np.ndarray  # (n_arms, item_dim), standardized
    manifest: dict = field(default_factory=dict)
    fitted: bool = True

    @property
    def user_dim(self) -> int:
        return len(next(iter(self.user_vecs.values())))

    @property
    def item_dim(self) -> int:
        return len(next(iter(self.item_vecs.values())))

    @property
    def d(self) -> int:
        return self.user_dim + self.item_dim + len(self.arms)

    def _require_fitted(self) -> None:
        if not self.fitted:
            raise StateError("pipeline is not fitted")

    def _standardize(self, raw: np.ndarray) -> np.ndarray:
        out = raw.copy()
        live = self.std > _STD_FLOOR
        out[live] = (raw[live] - self.mean[live]) / self.std[live]
        return out

    def _one_hot(self, arm_id: int) -> np.ndarray:
        onehot = np.zeros(len(self.arms))
        onehot[arm_id] = 1.0
        return onehot

    def assemble_context(self, user_id: str, item_id: str) -> np.ndarray:
        """Standardized [user | item | one-hot(item strategy)] context."""
        self._require_fitted()
        if user_id not in self.user_vecs:
            raise ContractError(f"unknown user {user_id!r}")
        if item_id not in self.item_vecs:
            raise ContractError(f"unknown item {item_id!r}")
        raw = np.concatenate((self.user_vecs[user_id], self.item_vecs[item_id]))
        return np.concatenate(
            (self._standardize(raw), self._one_hot(self.item_strategy[item_id]))
        )

    def arm_context(self, user_id: str, arm_id: int) -> np.ndarray:
        """Per-arm selection context: the item block is the arm descriptor."""
        self._require_fitted()
        if user_id not in self.user_vecs:
            raise ContractError(f"unknown user {user_id!r}")
        user_raw = self.user_vecs[user_id]
        user_std = self._standardize(
            np.concatenate((user_raw, np.zeros(self.item_dim)))
        )[: self.user_dim]
        return np.concatenate(
            (user_std, self.arm_descriptors[arm_id], self._one_hot(arm_id))
        )

    def arm_contexts(self, user_id: str) -> list[np.ndarray]:
        return [self.arm_context(user_id, a.id) for a in self.arms]

    # -- persistence --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "arms": [{"id": a.id, "name": a.name} for a in self.arms],
            "user_vecs": {u: v.tolist() for u, v in sorted(self.user_vecs.items())},
            "item_vecs": {i: v.tolist() for i, v in sorted(self.item_vecs.items())},
            "item_strategy": dict(sorted(self.item_strategy.items())),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "arm_descriptors": self.arm_descriptors.tolist(),
            "manifest": self.manifest,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Pipeline":
        return cls(
            arms=[StrategyArm(a["id"], a["name"]) for a in payload["arms"]],
            user_vecs={u: np.array(v) for u, v in payload["user_vecs"].items()},
            item_vecs={i: np.array(v) for i, v in payload["item_vecs"].items()},
            item_strategy=payload["item_strategy"],
            mean=np.array(payload["mean"]),
            std=np.array(payload["std"]),
            arm_descriptors=np.array(payload["arm_descriptors"]),
            manifest=payload["manifest"],
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Pipeline":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _fit_assembler(
    arms,
    user_vecs,
    item_vecs,
    item_strategy,
    ds: Dataset,
    train_idx,
    manifest,
) -> Pipeline:
    """Standardization stats and arm descriptors from the training fold."""
    events = [ds.interactions[i] for i in train_idx]
    if not events:
        raise ContractError("training fold has no interactions")
    rows = np.array(
        [
            np.concatenate((user_vecs[ev.user_id], item_vecs[ev.item_id]))
            for ev in events
        ]
    )
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)

    pipe = Pipeline(
        arms=list(arms),
        user_vecs=user_vecs,
        item_vecs=item_vecs,
        item_strategy=item_strategy,
        mean=mean,
        std=std,
        arm_descriptors=np.zeros((len(arms), len(next(iter(item_vecs.values()))))),
        manifest=manifest,
    )

    item_dim = pipe.item_dim
    sums = np.zeros((len(arms), item_dim))
    counts = np.zeros(len(arms))
    for ev in events:
        arm_id = item_strategy[ev.item_id]
        raw = np.concatenate((user_vecs[ev.user_id], item_vecs[ev.item_id]))
        sums[arm_id] += pipe._standardize(raw)[pipe.user_dim :]
        counts[arm_id] += 1
    # Arms absent from the training fold fall back to the mean over all
    # items carrying that strategy.
    for arm in arms:
        if counts[arm.id] > 0:
            pipe.arm_descriptors[arm.id] = sums[arm.id] / counts[arm.id]
        else:
            vecs = [
                pipe._standardize(
                    np.concatenate((np.zeros(pipe.user_dim), item_vecs[iid]))
                )[pipe.user_dim :]
                for iid, a in item_strategy.items()
                if a == arm.id
            ]
            if vecs:
                pipe.arm_descriptors[arm.id] = np.mean(vecs, axis=0)

    manifest["dimension"] = pipe.d
    manifest["user_dim"] = pipe.user_dim
    manifest["item_dim"] = pipe.item_dim
    manifest["n_arms"] = len(arms)
    manifest["mean"] = mean.tolist()
    manifest["std"] = std.tolist()
    return pipe


def _user_document(ds: Dataset, user_id: str) -> str:
    """A user's text corpus: own posts plus comments they authored."""
    parts = []
    for iid in sorted(ds.items):
        item = ds.items[iid]
        if item.author == user_id:
            parts.append(item.title)
            parts.append(item.text)
        for comment in item.comments:
            if comment.get("author") == user_id:
                parts.append(comment.get("text", ""))
    return "\n".join(p for p in parts if p)


def fit_text_pipeline(
    ds: Dataset, train_idx, arms, cfg: TextPipelineConfig
) -> Pipeline:
    """Full text feature path fitted on one training fold."""
    for item in ds.items.values():
        if item.strategy is None:
            raise ContractError(f"item {item.item_id!r} has no strategy assigned")
    lexicon = load_lexicon(cfg.lexicon_path)
    big_five = load_big_five_matrix(cfg.big_five_path)
    embeddings = load_embeddings(cfg.embeddings_path)
    seeds = load_seed_words(cfg.empathy_seeds_path)

    user_ids = sorted(ds.users)
    item_ids = sorted(ds.items)
    user_docs = {u: _user_document(ds, u) for u in user_ids}

    # TF-IDF + NMF on user comment corpora; items are projected onto the
    # fitted topic basis for the aggregated interaction vectors.
    tfidf, vocabulary = build_tfidf([user_docs[u] for u in user_ids])
    W, H = nmf_factorize(tfidf, cfg.nmf_rank, iters=cfg.nmf_iters, seed=cfg.seed)
    comment_vec = {u: W[i] for i, u in enumerate(user_ids)}

    item_docs = [
        f"{ds.items[i].title}\n{ds.items[i].text}" for i in item_ids
    ]
    item_tfidf, _ = build_tfidf(item_docs, vocabulary=vocabulary)
    item_W = nmf_transform(item_tfidf, H, iters=cfg.nmf_iters, seed=cfg.seed)
    item_nmf = {iid: item_W[i] for i, iid in enumerate(item_ids)}

    topics, item_bits = build_topic_features(
        [ds.items[i].subreddit for i in item_ids], n=cfg.top_subreddits
    )
    topic_index = {t: j for j, t in enumerate(topics)}

    train_events = [ds.interactions[i] for i in train_idx]
    train_items_by_user: dict[str, list[str]] = {u: [] for u in user_ids}
    for ev in train_events:
        train_items_by_user[ev.user_id].append(ev.item_id)

    user_raw: dict[str, np.ndarray] = {}
    for u in user_ids:
        doc = user_docs[u]
        emotion = score_emotions(doc, lexicon)
        personality = infer_personality(emotion, big_five)
        empathy = empathy_score(tokenize(doc), embeddings, seeds)
        agg = aggregate_comment_vectors(train_items_by_user[u], item_nmf)
        bits = np.zeros(len(topics))
        for s in ds.users[u].subreddits:
            j = topic_index.get(s)
            if j is not None:
                bits[j] = 1.0
        user_raw[u] = np.concatenate(
            (
                [float(ds.users[u].karma)],
                emotion,
                personality,
                [empathy],
                comment_vec[u],
                agg,
                bits,
            )
        )

    X = np.array([user_raw[ev.user_id] for ev in train_events])
    y = np.array([ev.response for ev in train_events])
    selected = select_features(X, y, cfg.select_m)
    user_vecs = {u: user_raw[u][selected] for u in user_ids}

    item_vecs: dict[str, np.ndarray] = {}
    for i, iid in enumerate(item_ids):
        item = ds.items[iid]
        emotion = score_emotions(f"{item.title}\n{item.text}", lexicon)
        tone = score_emotions(
            "\n".join(c.get("text", "") for c in item.comments), lexicon
        )
        item_vecs[iid] = np.concatenate(
            (
                [float(item.score), item.upvote_ratio, float(item.num_comments)],
                emotion,
                tone,
                item_bits[i],
            )
        )

    item_strategy = {iid: ds.items[iid].strategy.id for iid in item_ids}
    manifest = {
        "kind": "text",
        "vocabulary": vocabulary,
        "topics": topics,
        "selected_user_columns": selected,
        "nmf_rank": cfg.nmf_rank,
        "select_m": cfg.select_m,
        "top_subreddits": cfg.top_subreddits,
        "seed": cfg.seed,
    }
    return _fit_assembler(
        arms, user_vecs, item_vecs, item_strategy, ds, train_idx, manifest
    )


def fit_synthetic_pipeline(ds: Dataset, train_idx, arms) -> Pipeline:
    """Pipeline over the synthetic generator's latent vectors."""
    user_vecs = {u: rec.vector.copy() for u, rec in ds.users.items()}
    item_vecs = {i: rec.vector.copy() for i, rec in ds.items.items()}
    item_strategy = {i: rec.strategy.id for i, rec in ds.items.items()}
    manifest = {"kind": "synthetic"}
    return _fit_assembler(
        arms, user_vecs, item_vecs, item_strategy, ds, train_idx, manifest
    )
