"""Lexical features: emotion scoring, personality mapping, empathy score.

Emotion scoring uses an NRC-style word -> {emotion, sentiment} lexicon.
Personality is a fixed linear map from the ten emotion/sentiment ratios
to the Big Five, clamped to [0, 1].  Empathy is the cosine similarity
between a user's mean word embedding and a seed lexicon's mean embedding.
"""

from __future__ import annotations

import json
import re
from importlib import resources

import numpy as np

from .errors import IngestionError

EMOTION_LABELS = (
    "anger",
    "fear",
    "anticipation",
    "trust",
    "surprise",
    "sadness",
    "joy",
    "disgust",
    "negative",
    "positive",
)

BIG_FIVE_TRAITS = (
    "openness",
    "conscientiousness",
    "extraversion",
    "agreeableness",
    "neuroticism",
)

_URL_RE = re.compile(r"(https?://\S+|www\.\S+)")
_NON_WORD_RE = re.compile(r"[^a-z0-9' ]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, strip URLs and punctuation, split on whitespace."""
    text = _URL_RE.sub(" ", text.lower())
    text = _NON_WORD_RE.sub(" ", text)
    return text.split()


def load_lexicon(path) -> dict[str, frozenset[str]]:
    """Parse an NRC-style TSV (word<TAB>label<TAB>0|1) into word -> labels.

    Only rows flagged 1 contribute; words whose flags are all 0 are
    absent from the result.
    """
    table: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise IngestionError(
                    f"{path}:{lineno}: expected 3 tab-separated fields"
                )
            word, label, flag = parts
            if label not in EMOTION_LABELS:
                raise IngestionError(f"{path}:{lineno}: unknown label {label!r}")
            if flag not in ("0", "1"):
                raise IngestionError(f"{path}:{lineno}: flag must be 0 or 1")
            if flag == "1":
                table.setdefault(word, set()).add(label)
    return {w: frozenset(labels) for w, labels in table.items()}


def score_emotions(text: str, lexicon) -> np.ndarray:
    """Per-label ratio of matched tokens; all zeros when nothing matches.

    Entry e = (# tokens carrying label e) / (# tokens carrying any label).
    """
    counts = dict.fromkeys(EMOTION_LABELS, 0)
    matched = 0
    for token in tokenize(text):
        labels = lexicon.get(token)
        if not labels:
            continue
        matched += 1
        for label in labels:
            counts[label] += 1
    vec = np.zeros(len(EMOTION_LABELS))
    if matched:
        for i, label in enumerate(EMOTION_LABELS):
            vec[i] = counts[label] / matched
    return vec


def load_big_five_matrix(path=None) -> np.ndarray:
    """5x10 trait-by-emotion weight matrix; the default ships as data."""
    if path is None:
        raw = resources.files("banditrec.defaults").joinpath("big_five.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    payload = json.loads(raw)
    M = np.zeros((len(BIG_FIVE_TRAITS), len(EMOTION_LABELS)))
    for i, trait in enumerate(BIG_FIVE_TRAITS):
        weights = payload[trait]
        for j, label in enumerate(EMOTION_LABELS):
            M[i, j] = weights.get(label, 0.0)
    return M


def infer_personality(emotion: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Big Five scores: clamp01(M @ emotion)."""
    return np.clip(matrix @ np.asarray(emotion, dtype=float), 0.0, 1.0)


def load_embeddings(path) -> dict[str, np.ndarray]:
    """Plain-text table: one `word v1 ... vD` per line, consistent D."""
    table: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise IngestionError(f"{path}:{lineno}: no vector components")
            elif len(values) != dim:
                raise IngestionError(
                    f"{path}:{lineno}: expected {dim} components, got {len(values)}"
                )
            try:
                table[word] = np.array([float(v) for v in values])
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from exc
    return table


def load_seed_words(path=None) -> list[str]:
    if path is None:
        raw = (
            resources.files("banditrec.defaults")
            .joinpath("empathy_seeds.txt")
            .read_text()
        )
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    return [w for w in raw.split() if w]


def empathy_score(tokens, embeddings, seed_words) -> float:
    """Cosine between mean token embedding and mean seed-word embedding.

    Returns 0.0 when either side has no in-vocabulary word.
    """
    tok_vecs = [embeddings[t] for t in tokens if t in embeddings]
    seed_vecs = [embeddings[w] for w in seed_words if w in embeddings]
    if not tok_vecs or not seed_vecs:
        return 0.0
    u = np.mean(tok_vecs, axis=0)
    v = np.mean(seed_vecs, axis=0)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))
