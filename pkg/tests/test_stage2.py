"""Proposal scorer: two-modality attention, event attention, labeling,
checkpointing, and training on a separable toy problem."""
import numpy as np
import pytest

from soccersum.core import ShapeError, TrainingError
from soccersum.stage2 import (
    HmaConfig,
    HmaModel,
    attention_weights,
    hma_forward,
    hma_loss_grads,
    init_hma_params,
    label_proposal,
    score_proposals,
    train_hma,
)

META_DIM, AUDIO_DIM = 4, 3


def small_params(seed=0, hm=5, hf=4):
    rng = np.random.default_rng(seed)
    cfg = HmaConfig(hidden_modality=hm, hidden_fusion=hf)
    return init_hma_params(META_DIM, AUDIO_DIM, cfg, rng)


def random_pair(rng, length):
    return (rng.normal(size=(length, META_DIM)),
            rng.normal(size=(length, AUDIO_DIM)))


def test_forward_rejects_bad_shapes():
    params = small_params()
    with pytest.raises(ShapeError, match="disagree"):
        hma_forward(params, np.zeros((3, META_DIM)), np.zeros((2, AUDIO_DIM)))
    with pytest.raises(ShapeError, match="no events"):
        hma_forward(params, np.zeros((0, META_DIM)), np.zeros((0, AUDIO_DIM)))


def test_attention_weights_normalized_everywhere():
    rng = np.random.default_rng(99)
    params = small_params(1)
    for _ in range(200):
        xm, xa = random_pair(rng, int(rng.integers(1, 12)))
        lam_m, lam_a, beta = attention_weights(params, xm, xa)
        assert lam_m.shape == lam_a.shape == (xm.shape[0],)
        np.testing.assert_allclose(lam_m + lam_a, 1.0, atol=1e-12)
        assert np.all(lam_m > 0) and np.all(lam_m < 1)
        assert beta.shape == (xm.shape[0],)
        assert np.all(beta > 0)
        assert abs(beta.sum() - 1.0) < 1e-12


def test_single_event_gets_full_attention():
    rng = np.random.default_rng(5)
    params = small_params(2)
    xm, xa = random_pair(rng, 1)
    _, _, beta = attention_weights(params, xm, xa)
    assert beta.shape == (1,)
    assert beta[0] == pytest.approx(1.0, abs=1e-15)


def test_event_order_matters():
    rng = np.random.default_rng(7)
    params = small_params(3)
    xm, xa = random_pair(rng, 6)
    p_fwd, _ = hma_forward(params, xm, xa)
    p_rev, _ = hma_forward(params, xm[::-1].copy(), xa[::-1].copy())
    assert abs(p_fwd - p_rev) > 1e-9


def test_forward_deterministic():
    rng = np.random.default_rng(11)
    params = small_params(4)
    xm, xa = random_pair(rng, 5)
    p1, _ = hma_forward(params, xm, xa)
    p2, _ = hma_forward(params, xm, xa)
    assert p1 == p2
    assert 0.0 < p1 < 1.0


def test_gradients_match_finite_differences_spot_check():
    rng = np.random.default_rng(21)
    params = small_params(6, hm=4, hf=3)
    xm, xa = random_pair(rng, 5)
    y = 1.0
    _, _, grads = hma_loss_grads(params, xm, xa, y)
    eps = 1e-6
    for name in ("meta.W", "att.w", "fuse.U", "evatt.u", "out.w", "out.b"):
        flat = params[name].reshape(-1)
        idxs = rng.choice(flat.size, size=min(5, flat.size), replace=False)
        for i in idxs:
            keep = flat[i]
            flat[i] = keep + eps
            lp, _, _ = hma_loss_grads(params, xm, xa, y)
            flat[i] = keep - eps
            lm, _, _ = hma_loss_grads(params, xm, xa, y)
            flat[i] = keep
            fd = (lp - lm) / (2 * eps)
            got = grads[name].reshape(-1)[i]
            assert got == pytest.approx(fd, abs=1e-6 * max(1.0, abs(fd)))


def test_label_proposal_coverage_rule():
    # span of 10 events, need half inside one ground-truth action
    assert label_proposal((0, 9), [(0, 4)]) == 1
    assert label_proposal((0, 9), [(5, 14)]) == 1
    assert label_proposal((0, 9), [(6, 14)]) == 0
    assert label_proposal((0, 9), [(0, 1), (6, 14)]) == 0  # no single one suffices
    assert label_proposal((3, 3), [(0, 9)]) == 1
    assert label_proposal((0, 9), [], 0.5) == 0
    assert label_proposal((0, 9), [(3, 6)], 0.4) == 1
    assert label_proposal((0, 9), [(3, 6)], 0.5) == 0


def test_checkpoint_round_trip_keeps_normalization():
    params = small_params(8, hm=6, hf=5)
    model = HmaModel(params=params,
                     config=HmaConfig(hidden_modality=6, hidden_fusion=5),
                     audio_mu=np.array([0.5, -1.0, 2.0]),
                     audio_sd=np.array([1.0, 2.0, 0.25]))
    back = HmaModel.from_checkpoint(model.to_checkpoint())
    assert back.config.hidden_modality == 6
    assert back.config.hidden_fusion == 5
    np.testing.assert_array_equal(back.audio_mu, model.audio_mu)
    np.testing.assert_array_equal(back.audio_sd, model.audio_sd)
    for k, v in params.items():
        np.testing.assert_array_equal(back.params[k], v)
    xa = np.array([[1.5, 1.0, 2.5]])
    np.testing.assert_allclose(back.normalize_audio(xa),
                               (xa - model.audio_mu) / model.audio_sd)


def test_normalize_audio_identity_without_stats():
    model = HmaModel(params={}, config=HmaConfig())
    xa = np.array([[3.0, 1.0, -2.0]])
    np.testing.assert_array_equal(model.normalize_audio(xa), xa)


def _toy_items(rng, n, positive_shift=4.0):
    items = []
    for i in range(n):
        length = int(rng.integers(2, 7))
        xm = rng.normal(size=(length, META_DIM))
        xa = rng.normal(size=(length, AUDIO_DIM))
        y = i % 2
        if y:
            xa[:, 0] += positive_shift
        items.append((xm, xa, y))
    return items


def test_train_hma_separates_loud_proposals():
    rng = np.random.default_rng(314)
    train_items = _toy_items(rng, 30)
    val_items = _toy_items(rng, 12)
    cfg = HmaConfig(hidden_modality=6, hidden_fusion=4, epochs=30, patience=30,
                    batch=8, lr=0.02)
    model = train_hma(train_items, val_items, cfg, seed=2)
    assert model.best_val_f >= 0.9
    assert model.best_epoch >= 0
    assert len(model.history) >= 1
    # scoring applies the stored normalization to raw audio features
    pairs = [(xm, xa) for xm, xa, _ in val_items]
    scores = score_proposals(model, pairs)
    for got, (xm, xa) in zip(scores, pairs):
        manual, _ = hma_forward(model.params,
                                xm, (xa - model.audio_mu) / model.audio_sd)
        assert got == pytest.approx(manual, abs=1e-12)
    # every loud proposal should out-score every quiet one
    pos = [s for s, (_, _, y) in zip(scores, val_items) if y]
    neg = [s for s, (_, _, y) in zip(scores, val_items) if not y]
    assert min(pos) > max(neg)


def test_train_hma_requires_both_classes():
    rng = np.random.default_rng(6)
    items = [(xm, xa, 1) for xm, xa, _ in _toy_items(rng, 6)]
    with pytest.raises(TrainingError, match="both classes"):
        train_hma(items, items, HmaConfig(epochs=1), seed=0)
