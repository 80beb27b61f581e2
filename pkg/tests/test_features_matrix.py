import numpy as np
import pytest
import scipy.sparse as sp

from banditrec.errors import ContractError, ReferentialIntegrityError
from banditrec.features_matrix import (
    aggregate_comment_vectors,
    build_tfidf,
    build_topic_features,
    nmf_factorize,
    nmf_transform,
    select_features,
)


def test_tfidf_hand_computed():
    X, vocab = build_tfidf(["a b a", "b c"])
    assert vocab == ["a", "b", "c"]
    idf = np.log((1 + 2) / (1 + np.array([1.0, 2.0, 1.0]))) + 1.0
    raw = np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 1.0]]) * idf
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    np.testing.assert_allclose(X.toarray(), raw, atol=1e-12)


def test_tfidf_rows_unit_norm():
    X, _ = build_tfidf(["one two three", "two three four", "five"])
    norms = np.linalg.norm(X.toarray(), axis=1)
    np.testing.assert_allclose(norms, np.ones(3), atol=1e-12)


def test_tfidf_fixed_vocabulary_transform():
    _, vocab = build_tfidf(["a b", "b c"])
    X, vocab2 = build_tfidf(["c unseen token a"], vocabulary=vocab)
    assert vocab2 == vocab
    row = X.toarray()[0]
    assert row[vocab.index("b")] == 0.0
    assert row[vocab.index("a")] > 0.0 and row[vocab.index("c")] > 0.0
    np.testing.assert_allclose(np.linalg.norm(row), 1.0)


def test_tfidf_empty_document_row_is_zero():
    X, _ = build_tfidf(["a b", ""])
    assert X.shape[0] == 2
    np.testing.assert_array_equal(X.toarray()[1], 0.0)
    assert np.all(np.isfinite(X.toarray()))


def test_tfidf_empty_corpus_rejected():
    with pytest.raises(ContractError):
        build_tfidf([])


def test_nmf_recovers_rank_one_structure():
    rng = np.random.default_rng(0)
    X = np.outer(rng.uniform(0.5, 1.5, 12), rng.uniform(0.5, 1.5, 8))
    W, H = nmf_factorize(X, rank=1, iters=2000, tol=1e-12, seed=1)
    rel = np.linalg.norm(X - W @ H) / np.linalg.norm(X)
    assert rel < 1e-6


def test_nmf_objective_monotone_in_iterations():
    rng = np.random.default_rng(4)
    X = rng.uniform(0, 1, size=(20, 10))
    objs = []
    for iters in (5, 20, 80):
        W, H = nmf_factorize(X, rank=3, iters=iters, tol=0.0, seed=2)
        objs.append(np.linalg.norm(X - W @ H))
    assert objs[0] >= objs[1] - 1e-9 >= objs[2] - 2e-9


def test_nmf_deterministic_and_nonnegative():
    X = sp.csr_matrix(np.abs(np.random.default_rng(7).standard_normal((9, 6))))
    W1, H1 = nmf_factorize(X, rank=2, seed=5)
    W2, H2 = nmf_factorize(X, rank=2, seed=5)
    np.testing.assert_array_equal(W1, W2)
    np.testing.assert_array_equal(H1, H2)
    assert np.all(W1 >= 0) and np.all(H1 >= 0)


def test_nmf_rejects_bad_input():
    with pytest.raises(ContractError):
        nmf_factorize(np.array([[1.0, -0.1]]), rank=1)
    with pytest.raises(ContractError):
        nmf_factorize(np.ones((2, 2)), rank=0)
    with pytest.raises(ContractError):
        nmf_transform(np.array([[-1.0]]), np.ones((1, 1)))


def test_nmf_transform_projects_onto_fixed_basis():
    rng = np.random.default_rng(11)
    H = rng.uniform(0.1, 1.0, size=(2, 6))
    W_true = rng.uniform(0.1, 1.0, size=(15, 2))
    X = W_true @ H
    W = nmf_transform(X, H, iters=800, tol=1e-12, seed=3)
    rel = np.linalg.norm(X - W @ H) / np.linalg.norm(X)
    assert rel < 1e-4


def test_topic_features_frequency_then_lexicographic():
    subs = ["b", "a", "b", "c", "a", "b"]
    topics, bits = build_topic_features(subs, n=2)
    assert topics == ["b", "a"]  # b wins on count, a beats c lexicographically
    np.testing.assert_array_equal(bits[:, 0], [1, 0, 1, 0, 0, 1])
    np.testing.assert_array_equal(bits[:, 1], [0, 1, 0, 0, 1, 0])
    # c fell outside the topic list -> all-zero row
    np.testing.assert_array_equal(bits[3], [0, 0])


def test_topic_features_tie_breaks_lexicographically():
    topics, _ = build_topic_features(["z", "a", "m"], n=2)
    assert topics == ["a", "m"]


def test_topic_features_empty_rejected():
    with pytest.raises(ContractError):
        build_topic_features([])


def test_aggregate_comment_vectors_mean_oracle():
    table = {"a": np.array([1.0, 3.0]), "b": np.array([3.0, 5.0])}
    np.testing.assert_allclose(
        aggregate_comment_vectors(["a", "b"], table), [2.0, 4.0]
    )
    np.testing.assert_array_equal(aggregate_comment_vectors([], table), [0.0, 0.0])
    with pytest.raises(ReferentialIntegrityError, match="zzz"):
        aggregate_comment_vectors(["zzz"], table)
    with pytest.raises(ContractError):
        aggregate_comment_vectors(["a"], {})


def test_select_features_correlation_ranking():
    rng = np.random.default_rng(2)
    y = np.array([0, 1, 0, 1, 1, 0, 1, 0, 1, 0], dtype=float)
    X = np.column_stack(
        [
            y,  # corr +1
            rng.standard_normal(10) * 0.01 + 0.5,  # near-noise
            np.full(10, 3.0),  # constant, dropped
            1.0 - y,  # corr -1
        ]
    )
    assert select_features(X, y, 2) == [0, 3]
    # both perfect columns tie on |corr|; the lower index wins
    assert select_features(X, y, 1) == [0]


def test_select_features_warns_when_short_of_columns():
    X = np.column_stack([np.arange(6.0), np.full(6, 1.0)])
    y = np.array([0, 1, 0, 1, 0, 1], dtype=float)
    with pytest.warns(UserWarning, match="variance"):
        kept = select_features(X, y, 5)
    assert kept == [0]


def test_select_features_validates_shapes():
    with pytest.raises(ContractError):
        select_features(np.ones((3, 2)), np.ones(4), 1)
    with pytest.raises(ContractError):
        select_features(np.ones((3, 2)), np.ones(3), 0)
