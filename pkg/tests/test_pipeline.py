import numpy as np
import pytest

from banditrec.errors import ContractError, StateError
from banditrec.pipeline import (
    TextPipelineConfig,
    Pipeline,
    fit_synthetic_pipeline,
    fit_text_pipeline,
)
from banditrec.policies import default_arms
from banditrec.synthetic import SyntheticConfig, generate_synthetic


def _text_config(fixtures_dir, **kw):
    defaults = dict(
        lexicon_path=str(fixtures_dir / "lexicon.tsv"),
        embeddings_path=str(fixtures_dir / "embeddings.txt"),
        nmf_rank=3,
        nmf_iters=80,
        top_subreddits=4,
        select_m=8,
        seed=0,
    )
    defaults.update(kw)
    return TextPipelineConfig(**defaults)


@pytest.fixture
def synthetic_pipeline():
    cfg = SyntheticConfig(n_users=12, n_items=15, n_interactions=120, seed=4)
    ds, _ = generate_synthetic(cfg)
    arms = default_arms()
    train_idx = list(range(80))
    return ds, fit_synthetic_pipeline(ds, train_idx, arms), train_idx


def test_synthetic_pipeline_dimensions(synthetic_pipeline):
    ds, pipe, _ = synthetic_pipeline
    du = (6 + 1) // 2
    assert pipe.user_dim == du
    assert pipe.item_dim == 6 - du
    assert pipe.d == 6 + 5
    assert pipe.manifest["dimension"] == pipe.d
    assert pipe.manifest["user_dim"] == pipe.user_dim
    assert pipe.manifest["n_arms"] == 5


def test_context_layout_and_one_hot(synthetic_pipeline):
    ds, pipe, _ = synthetic_pipeline
    ev = ds.interactions[0]
    x = pipe.assemble_context(ev.user_id, ev.item_id)
    assert x.shape == (pipe.d,)
    onehot = x[-5:]
    arm_id = pipe.item_strategy[ev.item_id]
    np.testing.assert_array_equal(onehot, np.eye(5)[arm_id])


def test_standardization_against_train_fold(synthetic_pipeline):
    ds, pipe, train_idx = synthetic_pipeline
    rows = np.array(
        [
            np.concatenate(
                (
                    pipe.user_vecs[ds.interactions[i].user_id],
                    pipe.item_vecs[ds.interactions[i].item_id],
                )
            )
            for i in train_idx
        ]
    )
    mean, std = rows.mean(axis=0), rows.std(axis=0)
    ev = ds.interactions[5]
    raw = np.concatenate(
        (pipe.user_vecs[ev.user_id], pipe.item_vecs[ev.item_id])
    )
    x = pipe.assemble_context(ev.user_id, ev.item_id)
    for j in range(len(raw)):
        if std[j] > 1e-8:
            assert x[j] == pytest.approx((raw[j] - mean[j]) / std[j])
        else:
            assert x[j] == pytest.approx(raw[j])  # constant columns pass through


def test_constant_bias_component_passes_through(synthetic_pipeline):
    ds, pipe, _ = synthetic_pipeline
    # Every synthetic user vector starts with the constant 1.0, so the
    # standardizer must leave component 0 untouched.
    ev = ds.interactions[0]
    assert pipe.assemble_context(ev.user_id, ev.item_id)[0] == 1.0


def test_arm_context_uses_descriptor(synthetic_pipeline):
    ds, pipe, _ = synthetic_pipeline
    ev = ds.interactions[0]
    for arm_id in range(5):
        x = pipe.arm_context(ev.user_id, arm_id)
        assert x.shape == (pipe.d,)
        np.testing.assert_array_equal(
            x[pipe.user_dim : pipe.user_dim + pipe.item_dim],
            pipe.arm_descriptors[arm_id],
        )
        np.testing.assert_array_equal(x[-5:], np.eye(5)[arm_id])
    contexts = pipe.arm_contexts(ev.user_id)
    assert len(contexts) == 5


def test_arm_descriptor_is_mean_standardized_item(synthetic_pipeline):
    ds, pipe, train_idx = synthetic_pipeline
    sums = np.zeros((5, pipe.item_dim))
    counts = np.zeros(5)
    for i in train_idx:
        ev = ds.interactions[i]
        arm_id = pipe.item_strategy[ev.item_id]
        raw = np.concatenate(
            (pipe.user_vecs[ev.user_id], pipe.item_vecs[ev.item_id])
        )
        sums[arm_id] += pipe._standardize(raw)[pipe.user_dim :]
        counts[arm_id] += 1
    for arm_id in range(5):
        if counts[arm_id]:
            np.testing.assert_allclose(
                pipe.arm_descriptors[arm_id], sums[arm_id] / counts[arm_id]
            )


def test_unknown_ids_rejected(synthetic_pipeline):
    _, pipe, _ = synthetic_pipeline
    with pytest.raises(ContractError, match="unknown user"):
        pipe.assemble_context("ghost", next(iter(pipe.item_vecs)))
    with pytest.raises(ContractError, match="unknown item"):
        pipe.assemble_context(next(iter(pipe.user_vecs)), "ghost")
    with pytest.raises(ContractError, match="unknown user"):
        pipe.arm_context("ghost", 0)


def test_unfitted_pipeline_raises(synthetic_pipeline):
    ds, pipe, _ = synthetic_pipeline
    pipe.fitted = False
    ev = ds.interactions[0]
    with pytest.raises(StateError):
        pipe.assemble_context(ev.user_id, ev.item_id)
    with pytest.raises(StateError):
        pipe.arm_context(ev.user_id, 0)


def test_pipeline_save_load_round_trip(tmp_path, synthetic_pipeline):
    ds, pipe, _ = synthetic_pipeline
    path = tmp_path / "pipe.json"
    pipe.save(path)
    restored = Pipeline.load(path)
    ev = ds.interactions[3]
    np.testing.assert_allclose(
        restored.assemble_context(ev.user_id, ev.item_id),
        pipe.assemble_context(ev.user_id, ev.item_id),
    )
    np.testing.assert_allclose(restored.arm_descriptors, pipe.arm_descriptors)
    assert restored.manifest == pipe.manifest


def test_empty_training_fold_rejected():
    ds, _ = generate_synthetic(SyntheticConfig(n_interactions=10, seed=0))
    with pytest.raises(ContractError):
        fit_synthetic_pipeline(ds, [], default_arms())


def test_text_pipeline_fits_fixture_corpus(fixture_dataset, fixtures_dir):
    arms = default_arms()
    cfg = _text_config(fixtures_dir)
    train_idx = list(range(len(fixture_dataset.interactions)))
    pipe = fit_text_pipeline(fixture_dataset, train_idx, arms, cfg)
    assert pipe.user_dim <= cfg.select_m
    assert pipe.d == pipe.user_dim + pipe.item_dim + 5
    # item vector: score, upvote_ratio, num_comments, 2x10 emotions, bits
    assert pipe.item_dim == 3 + 10 + 10 + len(pipe.manifest["topics"])
    assert len(pipe.manifest["topics"]) <= cfg.top_subreddits
    assert set(pipe.user_vecs) == set(fixture_dataset.users)
    assert set(pipe.item_vecs) == set(fixture_dataset.items)
    x = pipe.assemble_context("u1", "p1")
    assert np.all(np.isfinite(x))


def test_text_pipeline_deterministic(fixture_dataset, fixtures_dir):
    arms = default_arms()
    cfg = _text_config(fixtures_dir)
    train_idx = list(range(len(fixture_dataset.interactions)))
    a = fit_text_pipeline(fixture_dataset, train_idx, arms, cfg)
    b = fit_text_pipeline(fixture_dataset, train_idx, arms, cfg)
    for uid in a.user_vecs:
        np.testing.assert_array_equal(a.user_vecs[uid], b.user_vecs[uid])
    for iid in a.item_vecs:
        np.testing.assert_array_equal(a.item_vecs[iid], b.item_vecs[iid])
    assert a.manifest == b.manifest


def test_text_pipeline_requires_strategies(fixture_dataset, fixtures_dir):
    fixture_dataset.items["p1"].strategy = None
    with pytest.raises(ContractError, match="strategy"):
        fit_text_pipeline(
            fixture_dataset,
            list(range(24)),
            default_arms(),
            _text_config(fixtures_dir),
        )
