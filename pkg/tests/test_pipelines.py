import numpy as np
import pytest
import torch

from ecgrev.evaluation import auc
from ecgrev.models import PCAProjection, RandomProjection, fresh_encoder, load_model, save_model
from ecgrev.nn import EncoderConfig
from ecgrev.pipelines import (FinetuneConfig, PretrainConfig, RankError, embed, finetune, fit_linear_autoencoder,
                              fit_pca, fit_rp, pretrain, reconstruction_error, sub_seed, train_autoencoder,
                              train_from_scratch)
from ecgrev.signal import segment_records
from ecgrev.synth import SynthParams, synth_corpus

from conftest import random_normalized

DESK = EncoderConfig(stages=3, base_width=4, blocks_per_stage=1, kernel=7, rep_dim=64, stem_stride=4)


@pytest.fixture(scope="module")
def corpus():
    return segment_records(synth_corpus(20, 20, SynthParams(), seed=7))


def _weights(rep):
    return [p.detach().clone() for p in rep.encoder.parameters()]


def test_ts_pretext_learnable(corpus):
    assert len(corpus) == 200
    rep = pretrain(corpus.samples, PretrainConfig(task="ts", encoder=DESK, epochs=10, batch=16, seed=0))
    assert len(rep.log) == 10
    assert max(h["pretext_accuracy"] for h in rep.log) > 0.9
    assert rep.embed(corpus.samples[:3]).shape == (3, 64)


def test_zero_epochs_returns_init():
    x = random_normalized(np.random.default_rng(0), 8)
    rep = pretrain(x, PretrainConfig(encoder=DESK, epochs=0, seed=4))
    ref = fresh_encoder(DESK, sub_seed(4, "init"))
    assert all(torch.equal(a, b) for a, b in zip(rep.encoder.parameters(), ref.parameters()))
    assert rep.log == []


def test_pretrain_deterministic(rng):
    x = random_normalized(rng, 24)
    cfg = PretrainConfig(task="temporal", encoder=DESK, epochs=2, batch=8, seed=3)
    a, b = pretrain(x, cfg), pretrain(x, cfg)
    assert all(torch.equal(p, q) for p, q in zip(_weights(a), _weights(b)))
    assert a.log == b.log


def test_pretrain_rejects_labeled_and_degenerate(corpus, rng):
    with pytest.raises(TypeError):
        pretrain(corpus, PretrainConfig(encoder=DESK, epochs=1))
    x = random_normalized(rng, 4)
    x[2] = 0.0
    with pytest.raises(ValueError):
        pretrain(x, PretrainConfig(encoder=DESK, epochs=1))


@pytest.mark.parametrize("task", ["spatial", "simclr", "ae"])
def test_other_tasks_run(task, rng):
    x = random_normalized(rng, 16)
    rep = pretrain(x, PretrainConfig(task=task, encoder=DESK, epochs=1, batch=8))
    assert rep.task == task and len(rep.log) == 1 and np.isfinite(rep.log[0]["loss"])


def test_softmax_head(rng):
    x = random_normalized(rng, 16)
    rep = pretrain(x, PretrainConfig(encoder=DESK, epochs=1, batch=8, head="softmax"))
    assert 0 <= rep.log[0]["pretext_accuracy"] <= 1


def test_autoencoder_reduces_error(rng):
    x = random_normalized(rng, 16)
    cfg = PretrainConfig(task="ae", encoder=DESK, epochs=0, batch=8, lr=3e-3)
    rep0, dec0 = train_autoencoder(x, cfg, return_decoder=True)
    rep1, dec1 = train_autoencoder(x, PretrainConfig(**{**cfg.__dict__, "epochs": 15}), return_decoder=True)
    assert reconstruction_error(rep1, dec1, x) < reconstruction_error(rep0, dec0, x)


def test_rp_statistics():
    rp = fit_rp(128, seed=0)
    assert isinstance(rp, RandomProjection) and rp.weight.shape == (128, 3000)
    assert rp.weight.var() == pytest.approx(1 / 128, rel=0.03)
    np.testing.assert_array_equal(rp.weight, fit_rp(128, seed=0).weight)
    assert not np.array_equal(rp.weight, fit_rp(128, seed=1).weight)
    with pytest.raises(ValueError):
        fit_rp(0, seed=0)


def test_pca_planar_data(rng):
    basis = np.linalg.qr(rng.normal(size=(50, 2)))[0].T
    coeffs = rng.normal(size=(40, 2)) * [3.0, 1.0]
    x = coeffs @ basis + 0.5
    pca = fit_pca(x, 2)
    assert isinstance(pca, PCAProjection)
    c = pca.components.astype(np.float64)
    np.testing.assert_allclose(c @ c.T, np.eye(2), atol=1e-6)
    # the components span the generating plane
    np.testing.assert_allclose(np.linalg.svd(c @ basis.T, compute_uv=False), [1, 1], atol=1e-6)
    assert np.var(pca.embed(x)[:, 0]) >= np.var(pca.embed(x)[:, 1])
    z = pca.embed(x).astype(np.float64)
    np.testing.assert_allclose(z @ c + pca.mean, x, atol=1e-4)
    with pytest.raises(RankError) as err:
        fit_pca(x, 3)
    assert err.value.rank == 2


def test_pca_too_few_segments(rng):
    with pytest.raises(ValueError):
        fit_pca(rng.normal(size=(3, 10)), 5)


def test_linear_autoencoder_spans_pca_subspace(rng):
    x = rng.normal(size=(100, 12)) * np.linspace(3, 0.2, 12)
    w_enc, _, _ = fit_linear_autoencoder(x, 3, epochs=2000, lr=1e-2, seed=0)
    q_ae = np.linalg.qr(w_enc.T)[0]
    q_pca = fit_pca(x, 3).components.astype(np.float64).T
    cosines = np.linalg.svd(q_ae.T @ q_pca, compute_uv=False)
    assert cosines.min() > 0.99


def _toy_labeled(n=40, seed=0):
    segs = segment_records(synth_corpus(n // 10, n // 10, SynthParams(), seed=seed))
    return segs


def test_linear_probe_freezes_representation():
    segs = _toy_labeled()
    rep = pretrain(segs.samples, PretrainConfig(encoder=DESK, epochs=0))
    before = _weights(rep)
    model = finetune(rep, segs, config=FinetuneConfig(mode="linear", epochs=20))
    assert all(torch.equal(a, b) for a, b in zip(before, _weights(rep)))
    assert all(torch.equal(a, b) for a, b in zip(before, model.encoder.parameters()))
    assert model.mode == "linear"


def test_full_finetune_leaves_input_untouched():
    segs = _toy_labeled()
    rep = pretrain(segs.samples, PretrainConfig(encoder=DESK, epochs=0))
    before = _weights(rep)
    model = finetune(rep, segs, config=FinetuneConfig(mode="full", epochs=2, batch=16))
    assert all(torch.equal(a, b) for a, b in zip(before, _weights(rep)))
    assert not all(torch.equal(a, b) for a, b in zip(before, model.encoder.parameters()))
    assert len(model.log) == 2


def test_finetune_errors(rng):
    segs = _toy_labeled()
    rp = fit_rp(16, seed=0)
    with pytest.raises(ValueError):
        finetune(rp, segs, config=FinetuneConfig(mode="full"))
    with pytest.raises(ValueError):
        finetune(rp, segs.samples)
    with pytest.raises(ValueError):
        finetune(rp, segs.samples, np.ones(len(segs)))
    with pytest.raises(ValueError):
        FinetuneConfig(mode="partial")


def test_linear_probe_on_rp_learns(rng):
    segs = _toy_labeled(80, seed=1)
    model = finetune(fit_rp(64, seed=0), segs, config=FinetuneConfig(mode="linear", epochs=100))
    assert auc(model.scores(segs), segs.labels) > 0.8


def test_finetune_deterministic_and_checkpoint(tmp_path):
    segs = _toy_labeled()
    rep = pretrain(segs.samples, PretrainConfig(encoder=DESK, epochs=0))
    cfg = FinetuneConfig(epochs=2, batch=16, seed=5)
    a, b = finetune(rep, segs, config=cfg), finetune(rep, segs, config=cfg)
    np.testing.assert_array_equal(a.scores(segs), b.scores(segs))
    save_model(a, tmp_path / "m.ckpt")
    np.testing.assert_array_equal(load_model(tmp_path / "m.ckpt").scores(segs), a.scores(segs))


def test_scratch_trains_everything():
    segs = _toy_labeled()
    model = train_from_scratch(segs, encoder_config=DESK, config=FinetuneConfig(epochs=2, batch=16))
    assert model.task == "scratch" and len(model.log) == 2
    assert embed(model.rep, segs).shape == (len(segs), 64)


def test_sub_seed_independent_names():
    assert sub_seed(1, "a") != sub_seed(1, "b")
    assert sub_seed(1, "a") == sub_seed(1, "a")
