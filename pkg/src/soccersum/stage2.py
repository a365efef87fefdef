"""Stage 2: scoring proposals with hierarchical multimodal attention.

Each proposal's events carry a metadata vector and an audio vector.  Two
LSTMs encode the modalities; a shared projection scores each modality per
event and a two-way softmax mixes the hidden states.  A fusion LSTM reads
the mixed sequence, an event-attention layer pools it to one vector, and a
sigmoid neuron emits the probability the proposal belongs in the summary.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ShapeError, TrainingError
from .evaluation import covered_by_any, fbeta, precision_recall
from .neural import (
    Adam,
    bce_loss,
    bce_sigmoid_grad,
    dense_init,
    lstm_backward,
    lstm_forward,
    lstm_init,
    sigmoid,
    softmax,
    softmax_backward,
    vector_init,
)


@dataclass
class HmaConfig:
    hidden_modality: int = 32
    hidden_fusion: int = 16
    epochs: int = 100
    patience: int = 20
    batch: int = 32
    lr: float = 1e-3
    overlap_ratio: float = 0.5


def init_hma_params(meta_dim: int, audio_dim: int, config: HmaConfig,
                    rng: np.random.Generator) -> dict:
    hm = config.hidden_modality
    hf = config.hidden_fusion
    params = lstm_init(meta_dim, hm, rng, "meta")
    params.update(lstm_init(audio_dim, hm, rng, "audio"))
    params.update(vector_init(hm, rng, "att.w"))
    params.update(lstm_init(hm, hf, rng, "fuse"))
    params.update(vector_init(hf, rng, "evatt.u"))
    params.update(dense_init(hf, rng, "out"))
    return params


def hma_forward(params: dict, xm: np.ndarray, xa: np.ndarray):
    """Summary-membership probability for one proposal.

    xm: (L, meta_dim) metadata vectors, xa: (L, audio_dim) audio vectors,
    same event count L >= 1.  Returns (p, cache).
    """
    if xm.shape[0] != xa.shape[0]:
        raise ShapeError(
            "modalities disagree on length: %d metadata vs %d audio events"
            % (xm.shape[0], xa.shape[0])
        )
    if xm.shape[0] == 0:
        raise ShapeError("proposal has no events")
    hm, cm, gm = lstm_forward(xm, params["meta.W"], params["meta.U"], params["meta.b"])
    ha, ca, ga = lstm_forward(xa, params["audio.W"], params["audio.U"], params["audio.b"])
    # per-event modality attention, shared projection
    em = np.tanh(hm @ params["att.w"])
    ea = np.tanh(ha @ params["att.w"])
    lam_m = sigmoid(em - ea)  # two-way softmax
    lam_a = 1.0 - lam_m
    c_seq = lam_m[:, None] * hm + lam_a[:, None] * ha
    hc, cc, gc = lstm_forward(c_seq, params["fuse.W"], params["fuse.U"], params["fuse.b"])
    # event attention over the fused sequence
    th = np.tanh(hc)
    s = th @ params["evatt.u"]
    beta = softmax(s)
    d = beta @ hc
    logit = float(np.dot(d, params["out.w"]) + params["out.b"][0])
    p = float(sigmoid(logit))
    cache = {
        "xm": xm, "xa": xa,
        "hm": hm, "cm": cm, "gm": gm,
        "ha": ha, "ca": ca, "ga": ga,
        "em": em, "ea": ea, "lam_m": lam_m, "lam_a": lam_a,
        "c_seq": c_seq, "hc": hc, "cc": cc, "gc": gc,
        "th": th, "beta": beta, "d": d, "p": p,
    }
    return p, cache


def attention_weights(params: dict, xm: np.ndarray, xa: np.ndarray):
    """(lambda_meta, lambda_audio, beta) diagnostics for one proposal."""
    _, cache = hma_forward(params, xm, xa)
    return cache["lam_m"], cache["lam_a"], cache["beta"]


def hma_backward(params: dict, cache: dict, dlogit: float) -> dict:
    hm, ha = cache["hm"], cache["ha"]
    hc, th, beta = cache["hc"], cache["th"], cache["beta"]
    lam_m, lam_a = cache["lam_m"], cache["lam_a"]
    em, ea = cache["em"], cache["ea"]

    grads = {
        "out.w": dlogit * cache["d"],
        "out.b": np.array([dlogit]),
    }
    dd = dlogit * params["out.w"]

    # d = sum_i beta_i hc_i
    dbeta = hc @ dd
    dhc = beta[:, None] * dd[None, :]
    # beta = softmax(s), s_i = u . tanh(hc_i)
    ds = softmax_backward(beta, dbeta)
    grads["evatt.u"] = th.T @ ds
    dhc = dhc + ds[:, None] * (1.0 - th * th) * params["evatt.u"][None, :]

    dc_seq, dWf, dUf, dbf = lstm_backward(
        cache["c_seq"], hc, cache["cc"], cache["gc"],
        params["fuse.W"], params["fuse.U"], dhc,
    )
    grads["fuse.W"] = dWf
    grads["fuse.U"] = dUf
    grads["fuse.b"] = dbf

    # c_i = lam_m_i hm_i + lam_a_i ha_i
    dlam_m = np.sum(dc_seq * hm, axis=1)
    dlam_a = np.sum(dc_seq * ha, axis=1)
    dhm = lam_m[:, None] * dc_seq
    dha = lam_a[:, None] * dc_seq
    # two-way softmax over (em, ea)
    dem = lam_m * lam_a * (dlam_m - dlam_a)
    dea = -dem
    # em = tanh(hm . w), ea = tanh(ha . w), shared w
    gm_pre = dem * (1.0 - em * em)
    ga_pre = dea * (1.0 - ea * ea)
    grads["att.w"] = hm.T @ gm_pre + ha.T @ ga_pre
    dhm = dhm + gm_pre[:, None] * params["att.w"][None, :]
    dha = dha + ga_pre[:, None] * params["att.w"][None, :]

    _, dWm, dUm, dbm = lstm_backward(
        cache["xm"], hm, cache["cm"], cache["gm"],
        params["meta.W"], params["meta.U"], dhm,
    )
    grads["meta.W"] = dWm
    grads["meta.U"] = dUm
    grads["meta.b"] = dbm
    _, dWa, dUa, dba = lstm_backward(
        cache["xa"], ha, cache["ca"], cache["ga"],
        params["audio.W"], params["audio.U"], dha,
    )
    grads["audio.W"] = dWa
    grads["audio.U"] = dUa
    grads["audio.b"] = dba
    return grads


def hma_loss_grads(params: dict, xm: np.ndarray, xa: np.ndarray, y: float):
    p, cache = hma_forward(params, xm, xa)
    loss = bce_loss(p, y)
    grads = hma_backward(params, cache, bce_sigmoid_grad(p, y))
    return loss, p, grads


def label_proposal(span: tuple[int, int], gt_intervals, ratio: float = 0.5) -> int:
    """1 when at least ``ratio`` of the span lies inside one ground-truth
    summary action's event range."""
    return 1 if covered_by_any(span, gt_intervals, ratio) else 0


@dataclass
class HmaModel:
    params: dict
    config: HmaConfig
    audio_mu: np.ndarray = None
    audio_sd: np.ndarray = None
    history: list = field(default_factory=list)

    def normalize_audio(self, xa: np.ndarray) -> np.ndarray:
        if self.audio_mu is None:
            return xa
        return (xa - self.audio_mu) / self.audio_sd

    def to_checkpoint(self) -> dict:
        out = dict(self.params)
        out["_meta.hidden_modality"] = np.array([float(self.config.hidden_modality)])
        out["_meta.hidden_fusion"] = np.array([float(self.config.hidden_fusion)])
        out["_norm.audio_mu"] = np.asarray(self.audio_mu, dtype=float)
        out["_norm.audio_sd"] = np.asarray(self.audio_sd, dtype=float)
        return out

    @classmethod
    def from_checkpoint(cls, ckpt: dict) -> "HmaModel":
        params = {k: v for k, v in ckpt.items()
                  if not k.startswith(("_meta.", "_norm."))}
        cfg = HmaConfig(
            hidden_modality=int(ckpt["_meta.hidden_modality"][0]),
            hidden_fusion=int(ckpt["_meta.hidden_fusion"][0]),
        )
        return cls(params=params, config=cfg,
                   audio_mu=ckpt["_norm.audio_mu"],
                   audio_sd=ckpt["_norm.audio_sd"])


def _classification_f(params: dict, items, threshold: float = 0.5) -> float:
    tp = fp = fn = 0
    for xm, xa, y in items:
        p, _ = hma_forward(params, xm, xa)
        pred = 1 if p >= threshold else 0
        if pred and y:
            tp += 1
        elif pred and not y:
            fp += 1
        elif y and not pred:
            fn += 1
    p_, r_ = precision_recall(tp, fp, fn)
    return fbeta(p_, r_, 1.0)


def train_hma(train_items, val_items, config: HmaConfig, seed: int) -> HmaModel:
    """Train the proposal scorer.  Items are (xm, xa, label) triples with
    raw audio features; a z-score normalization is fitted on the training
    items here and travels with the model.

    Epoch selection: F1 of thresholded (0.5) classification on the
    validation items; early stop after ``patience`` non-improving checks.
    """
    labels = {int(y) for _, _, y in train_items}
    if labels != {0, 1}:
        raise TrainingError("stage-2 training needs both classes, got %s" % sorted(labels))
    meta_dim = train_items[0][0].shape[1]
    audio_dim = train_items[0][1].shape[1]

    stacked = np.concatenate([xa for _, xa, _ in train_items], axis=0)
    audio_mu = stacked.mean(axis=0)
    audio_sd = stacked.std(axis=0)
    # constant features collapse to zero instead of amplifying noise
    audio_sd = np.where(audio_sd < 1e-8, 1.0, audio_sd)
    train_items = [((xm, (xa - audio_mu) / audio_sd, y)) for xm, xa, y in train_items]
    val_items = [((xm, (xa - audio_mu) / audio_sd, y)) for xm, xa, y in val_items]

    rng = np.random.default_rng(np.random.SeedSequence([seed, 6]))
    params = init_hma_params(meta_dim, audio_dim, config, rng)
    opt = Adam(params, lr=config.lr)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))

    best_f = -1.0
    best_state = {k: v.copy() for k, v in params.items()}
    best_epoch = -1
    stale = 0
    history = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(train_items))
        total_loss = 0.0
        for chunk_start in range(0, len(order), config.batch):
            chunk = order[chunk_start : chunk_start + config.batch]
            acc: dict[str, np.ndarray] = {}
            for bi in chunk:
                xm, xa, y = train_items[bi]
                loss, _, grads = hma_loss_grads(params, xm, xa, float(y))
                total_loss += loss
                for k, g in grads.items():
                    if k in acc:
                        acc[k] += g
                    else:
                        acc[k] = np.array(g, dtype=float)
            for k in acc:
                acc[k] /= len(chunk)
            opt.step(params, acc)
        f = _classification_f(params, val_items)
        history.append({"epoch": epoch, "loss": total_loss / len(train_items), "val_f": f})
        if f > best_f:
            best_f = f
            best_state = {k: v.copy() for k, v in params.items()}
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    model = HmaModel(params=best_state, config=config,
                     audio_mu=audio_mu, audio_sd=audio_sd)
    model.history = history
    model.best_epoch = best_epoch
    model.best_val_f = best_f
    return model


def score_proposals(model: HmaModel, items) -> np.ndarray:
    """Summary-membership probability per raw (xm, xa) pair."""
    out = np.empty(len(items))
    for i, (xm, xa) in enumerate(items):
        out[i], _ = hma_forward(model.params, xm, model.normalize_audio(xa))
    return out
