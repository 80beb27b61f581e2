"""Dataset loading, validation, strategy mapping and fold splitting."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, IngestionError, ReferentialIntegrityError
from .policies import DEFAULT_ARM_NAMES, StrategyArm, default_arms


@dataclass
class UserRecord:
    user_id: str
    karma: int
    subreddits: set[str]
    # Numeric feature vector; filled by the feature pipeline or by the
    # synthetic generator.
    vector: np.ndarray | None = None


@dataclass
class PostRecord:
    item_id: str
    author: str
    title: str
    text: str
    subreddit: str
    score: int
    upvote_ratio: float
    num_comments: int
    comments: list[dict] = field(default_factory=list)
    strategy: StrategyArm | None = None
    vector: np.ndarray | None = None


@dataclass(frozen=True)
class Interaction:
    user_id: str
    item_id: str
    response: int
    timestamp: int


@dataclass
class Dataset:
    users: dict[str, UserRecord]
    items: dict[str, PostRecord]
    interactions: list[Interaction]

    def positive_rate(self) -> float:
        if not self.interactions:
            return 0.0
        return sum(ev.response for ev in self.interactions) / len(self.interactions)


def _parse_int(value: str, where: str, field_name: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise IngestionError(f"{where}: field {field_name!r}: {exc}") from exc


def load_users(path) -> dict[str, UserRecord]:
    users: dict[str, UserRecord] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"user_id", "karma", "subreddits"}
        if set(reader.fieldnames or []) != expected:
            raise IngestionError(
                f"{path}: header must be user_id,karma,subreddits"
            )
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            uid = row["user_id"]
            if not uid:
                raise IngestionError(f"{where}: empty user_id")
            if uid in users:
                raise IngestionError(f"{where}: duplicate user_id {uid!r}")
            subs = {s for s in (row["subreddits"] or "").split("|") if s}
            users[uid] = UserRecord(
                user_id=uid,
                karma=_parse_int(row["karma"], where, "karma"),
                subreddits=subs,
            )
    return users


_POST_FIELDS = {
    "post_id": str,
    "author": str,
    "title": str,
    "text": str,
    "subreddit": str,
    "score": int,
    "upvote_ratio": (int, float),
    "num_comments": int,
    "comments": list,
}


def load_posts(path) -> dict[str, PostRecord]:
    items: dict[str, PostRecord] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(f"{where}: invalid JSON: {exc}") from exc
            for name, typ in _POST_FIELDS.items():
                if name not in obj:
                    raise IngestionError(f"{where}: missing field {name!r}")
                if not isinstance(obj[name], typ) or isinstance(obj[name], bool):
                    raise IngestionError(f"{where}: field {name!r} has wrong type")
            if not 0.0 <= obj["upvote_ratio"] <= 1.0:
                raise IngestionError(f"{where}: upvote_ratio must be in [0, 1]")
            if obj["num_comments"] < 0:
                raise IngestionError(f"{where}: num_comments must be >= 0")
            for c in obj["comments"]:
                if not isinstance(c, dict) or "author" not in c or "text" not in c:
                    raise IngestionError(
                        f"{where}: comments must be objects with author and text"
                    )
            pid = obj["post_id"]
            if pid in items:
                raise IngestionError(f"{where}: duplicate post_id {pid!r}")
            items[pid] = PostRecord(
                item_id=pid,
                author=obj["author"],
                title=obj["title"],
                text=obj["text"],
                subreddit=obj["subreddit"],
                score=obj["score"],
                upvote_ratio=float(obj["upvote_ratio"]),
                num_comments=obj["num_comments"],
                comments=obj["comments"],
            )
    return items


def load_interactions(path, users, items) -> list[Interaction]:
    latest: dict[tuple[str, str], Interaction] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"user_id", "item_id", "response", "timestamp"}
        if set(reader.fieldnames or []) != expected:
            raise IngestionError(
                f"{path}: header must be user_id,item_id,response,timestamp"
            )
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            if row["user_id"] not in users:
                raise ReferentialIntegrityError(
                    f"{where}: unknown user_id {row['user_id']!r}"
                )
            if row["item_id"] not in items:
                raise ReferentialIntegrityError(
                    f"{where}: unknown item_id {row['item_id']!r}"
                )
            response = _parse_int(row["response"], where, "response")
            if response not in (0, 1):
                raise IngestionError(f"{where}: response must be 0 or 1")
            ev = Interaction(
                user_id=row["user_id"],
                item_id=row["item_id"],
                response=response,
                timestamp=_parse_int(row["timestamp"], where, "timestamp"),
            )
            key = (ev.user_id, ev.item_id)
            if key in latest:
                warnings.warn(
                    f"{where}: duplicate interaction {key}; keeping latest timestamp",
                    stacklevel=2,
                )
                if ev.timestamp < latest[key].timestamp:
                    continue
            latest[key] = ev
    return sorted(
        latest.values(), key=lambda ev: (ev.timestamp, ev.user_id, ev.item_id)
    )


def load_dataset(users_path, posts_path, interactions_path) -> Dataset:
    """Load and cross-validate the three raw files into one Dataset."""
    users = load_users(users_path)
    items = load_posts(posts_path)
    interactions = load_interactions(interactions_path, users, items)
    return Dataset(users=users, items=items, interactions=interactions)


# ---------------------------------------------------------------------------
# Strategy mapping


def load_strategy_map(path, arm_names=DEFAULT_ARM_NAMES) -> dict[str, StrategyArm]:
    arms = {name: StrategyArm(i, name) for i, name in enumerate(arm_names)}
    mapping: dict[str, StrategyArm] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if set(reader.fieldnames or []) != {"subreddit", "strategy"}:
            raise IngestionError(f"{path}: header must be subreddit,strategy")
        for lineno, row in enumerate(reader, start=2):
            if row["strategy"] not in arms:
                raise IngestionError(
                    f"{path}:{lineno}: unknown strategy {row['strategy']!r}"
                )
            mapping[row["subreddit"]] = arms[row["strategy"]]
    return mapping


def map_item_strategy(item: PostRecord, mapping, default: StrategyArm) -> StrategyArm:
    """Mapped strategy for the item's subreddit, else the default arm."""
    return mapping.get(item.subreddit, default)


def assign_strategies(ds: Dataset, mapping, default: StrategyArm) -> None:
    for item in ds.items.values():
        item.strategy = map_item_strategy(item, mapping, default)


# ---------------------------------------------------------------------------
# Fold splitting


@dataclass
class FoldSplit:
    k: int
    assignments: np.ndarray  # interaction index -> fold id

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def split_folds(ds: Dataset, k: int, seed: int) -> FoldSplit:
    """Stratified-by-response shuffled partition of the interactions."""
    n = len(ds.interactions)
    if k < 2:
        raise ContractError(f"fold count must be >= 2, got {k}")
    if k > n:
        raise ContractError(f"cannot split {n} interactions into {k} folds")
    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=int)
    # Deal shuffled positives round-robin, then continue the same counter
    # through the negatives so total fold sizes stay balanced as well.
    position = 0
    for label in (1, 0):
        idx = np.array(
            [i for i, ev in enumerate(ds.interactions) if ev.response == label],
            dtype=int,
        )
        rng.shuffle(idx)
        for i in idx:
            assignments[i] = position % k
            position += 1
    return FoldSplit(k=k, assignments=assignments)


__all__ = [
    "Dataset",
    "FoldSplit",
    "Interaction",
    "PostRecord",
    "UserRecord",
    "assign_strategies",
    "default_arms",
    "load_dataset",
    "load_strategy_map",
    "map_item_strategy",
    "split_folds",
]
