"""Stage 1: action-proposal generation.

A vocabulary of event-type sequences is harvested from training summaries;
every exact occurrence of a vocabulary sequence labels its events positive.
A sequential model (LSTM, coordinate-wise max over time, single sigmoid
neuron) is trained on positive/negative bags of consecutive events, slid
over each match in fixed windows, and per-event scores are fused across
covering windows with a log-sum-exp.  Runs of events above a tuned
threshold become action proposals.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Match, TrainingError
from .evaluation import fbeta, overlap_match, precision_recall
from .neural import (
    Adam,
    bce_loss,
    bce_sigmoid_grad,
    dense_init,
    lstm_backward,
    lstm_forward,
    lstm_init,
    maxpool_time,
    maxpool_time_backward,
    sigmoid,
)


@dataclass
class MilConfig:
    hidden: int = 16
    window: int = 10
    stride: int = 5
    lse_r: float = 8.0
    literal_lse: bool = False
    epochs: int = 100
    patience: int = 20
    batch: int = 32
    lr: float = 1e-3
    neg_min_len: int = 4
    beta: float = 2.0  # F-beta used for threshold/epoch selection


@dataclass(frozen=True)
class Bag:
    match_id: str
    start: int
    length: int
    label: int


# ---------------------------------------------------------------------------
# vocabulary and weak labels

def build_action_vocabulary(matches: dict[str, Match], summaries: dict) -> set[tuple[str, ...]]:
    """Type sequences of every ground-truth summary action in the training
    set.  Harvested from summaries only; requires at least one action."""
    vocab: set[tuple[str, ...]] = set()
    for match_id, summary in summaries.items():
        match = matches[match_id]
        for act in summary.actions:
            seq = tuple(e.type for e in match.events[act.start_index : act.end_index + 1])
            vocab.add(seq)
    if not vocab:
        raise TrainingError("action vocabulary is empty: no training summary actions")
    return vocab


def find_vocabulary_spans(types: tuple[str, ...], vocab: set[tuple[str, ...]]) -> list[tuple[int, int]]:
    """All exact occurrences of vocabulary sequences, as inclusive spans."""
    by_len: dict[int, set] = {}
    for seq in vocab:
        by_len.setdefault(len(seq), set()).add(seq)
    spans = []
    n = len(types)
    for m, seqs in by_len.items():
        for i in range(n - m + 1):
            if types[i : i + m] in seqs:
                spans.append((i, i + m - 1))
    spans.sort()
    return spans


def label_events_by_vocabulary(match: Match, vocab: set[tuple[str, ...]]):
    """Per-event positive labels (union of all matched spans) plus the spans."""
    spans = find_vocabulary_spans(match.type_sequence(), vocab)
    labels = np.zeros(len(match.events), dtype=bool)
    for s, e in spans:
        labels[s : e + 1] = True
    return labels, spans


def sample_training_bags(matches: dict[str, Match], vocab: set[tuple[str, ...]],
                         seed: int, neg_min_len: int = 4) -> list[Bag]:
    """Positive bags = every vocabulary occurrence; negative bags are random
    runs drawn from outside all labeled events, lengths uniform between
    ``neg_min_len`` and the longest positive span, one negative per
    positive.  Deterministic for a given seed."""
    positives: list[Bag] = []
    free_runs: list[tuple[str, int, int]] = []  # (match_id, start, length)
    max_pos_len = 0
    for match_id, match in matches.items():
        labels, spans = label_events_by_vocabulary(match, vocab)
        seen = set()
        for s, e in spans:
            if (s, e) in seen:
                continue
            seen.add((s, e))
            positives.append(Bag(match_id, s, e - s + 1, 1))
            max_pos_len = max(max_pos_len, e - s + 1)
        # maximal unlabeled runs
        i = 0
        n = len(labels)
        while i < n:
            if not labels[i]:
                j = i
                while j < n and not labels[j]:
                    j += 1
                free_runs.append((match_id, i, j - i))
                i = j
            else:
                i += 1
    if not positives:
        raise TrainingError("no positive bags: vocabulary matched nothing")
    if max_pos_len < neg_min_len:
        max_pos_len = neg_min_len
    rng = np.random.default_rng(np.random.SeedSequence([seed, 5]))
    negatives: list[Bag] = []
    n_needed = len(positives)
    for _ in range(n_needed):
        placed = False
        for _attempt in range(200):
            length = int(rng.integers(neg_min_len, max_pos_len + 1))
            eligible = [fr for fr in free_runs if fr[2] >= length]
            if not eligible:
                continue
            # uniform over all valid placements across runs
            starts_total = sum(fr[2] - length + 1 for fr in eligible)
            pick = int(rng.integers(starts_total))
            for match_id, run_start, run_len in eligible:
                avail = run_len - length + 1
                if pick < avail:
                    negatives.append(Bag(match_id, run_start + pick, length, 0))
                    placed = True
                    break
                pick -= avail
            if placed:
                break
        if not placed:
            raise TrainingError(
                "not enough negative material: placed %d of %d negative bags"
                % (len(negatives), n_needed)
            )
    return positives + negatives


# ---------------------------------------------------------------------------
# model

def init_mil_params(input_dim: int, hidden: int, rng: np.random.Generator) -> dict:
    params = lstm_init(input_dim, hidden, rng, "lstm")
    params.update(dense_init(hidden, rng, "out"))
    return params


def mil_forward(params: dict, x: np.ndarray):
    """Bag score in (0, 1) for a (K, D) bag of event vectors."""
    h, c, gates = lstm_forward(x, params["lstm.W"], params["lstm.U"], params["lstm.b"])
    z, kstar = maxpool_time(h)
    logit = float(np.dot(z, params["out.w"]) + params["out.b"][0])
    p = float(sigmoid(logit))
    return p, (h, c, gates, z, kstar)


def mil_loss_grads(params: dict, x: np.ndarray, y: float):
    p, (h, c, gates, z, kstar) = mil_forward(params, x)
    loss = bce_loss(p, y)
    dlogit = bce_sigmoid_grad(p, y)
    grads = {
        "out.w": dlogit * z,
        "out.b": np.array([dlogit]),
    }
    dz = dlogit * params["out.w"]
    dh_ext = maxpool_time_backward(dz, kstar, x.shape[0])
    _, dW, dU, db = lstm_backward(x, h, c, gates, params["lstm.W"], params["lstm.U"], dh_ext)
    grads["lstm.W"] = dW
    grads["lstm.U"] = dU
    grads["lstm.b"] = db
    return loss, p, grads


# ---------------------------------------------------------------------------
# window scoring and fusion

def window_starts(n_events: int, window: int, stride: int) -> list[int]:
    """Window start positions covering every event; the last window is
    pulled back to end exactly at the final event when needed."""
    if n_events <= window:
        return [0]
    starts = list(range(0, n_events - window + 1, stride))
    if starts[-1] != n_events - window:
        starts.append(n_events - window)
    return starts


def score_windows(params: dict, feats: np.ndarray, window: int, stride: int):
    """Bag score for each sliding window; returns (starts, lengths, scores)."""
    n = feats.shape[0]
    starts = window_starts(n, window, stride)
    scores = np.empty(len(starts))
    for w, s in enumerate(starts):
        length = min(window, n)
        scores[w], _ = mil_forward(params, feats[s : s + length])
    return starts, min(window, n), scores


def fuse_event_scores(starts: list[int], window_len: int, window_scores: np.ndarray,
                      n_events: int, r: float, literal: bool = False) -> np.ndarray:
    """Per-event score: log-sum-exp fusion of all windows covering the event.

    Standard form: S = (1/r) * log(mean(exp(r * O))).  ``literal`` switches
    to the diagnostic variant S = (1/r) * log(mean(r * O)), kept for
    comparison experiments; it is not a log-sum-exp and loses the
    mean <= S <= max envelope.
    """
    out = np.empty(n_events)
    covering: list[list[int]] = [[] for _ in range(n_events)]
    for w, s in enumerate(starts):
        for e in range(s, min(s + window_len, n_events)):
            covering[e].append(w)
    for e in range(n_events):
        o = window_scores[covering[e]]
        if literal:
            out[e] = np.log(np.mean(r * o)) / r
        else:
            m = np.max(r * o)
            out[e] = (m + np.log(np.mean(np.exp(r * o - m)))) / r
    return out


def score_events(params: dict, feats: np.ndarray, config: MilConfig) -> np.ndarray:
    starts, wlen, wscores = score_windows(params, feats, config.window, config.stride)
    return fuse_event_scores(starts, wlen, wscores, feats.shape[0], config.lse_r,
                             config.literal_lse)


# ---------------------------------------------------------------------------
# proposals and threshold selection

def extract_proposals(scores: np.ndarray, threshold: float,
                      types: tuple[str, ...]) -> list[tuple[int, int]]:
    """Maximal runs of events scoring >= threshold, with the extra rule that
    a goal-shot event closes its run immediately (celebration/restart events
    that still score high start a fresh proposal)."""
    proposals = []
    start = None
    for i, s in enumerate(scores):
        if s >= threshold:
            if start is None:
                start = i
            if types[i] == "goal-shot":
                proposals.append((start, i))
                start = None
        else:
            if start is not None:
                proposals.append((start, i - 1))
                start = None
    if start is not None:
        proposals.append((start, len(scores) - 1))
    return proposals


def labels_to_intervals(labels: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of positive labels as inclusive index spans."""
    spans = []
    start = None
    for i, flag in enumerate(labels):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            spans.append((start, i - 1))
            start = None
    if start is not None:
        spans.append((start, len(labels) - 1))
    return spans


def proposal_fbeta(scored: list[tuple[np.ndarray, np.ndarray, tuple[str, ...]]],
                   threshold: float, beta: float = 2.0, ratio: float = 0.5) -> float:
    """F-beta of proposal extraction at a threshold, micro-averaged over
    matches.  ``scored`` rows are (event scores, event labels, event types)."""
    tp = fp = fn = 0
    for scores, labels, types in scored:
        preds = extract_proposals(scores, threshold, types)
        gts = labels_to_intervals(np.asarray(labels, dtype=bool))
        a, b, c = overlap_match(preds, gts, ratio)
        tp += a
        fp += b
        fn += c
    p, r = precision_recall(tp, fp, fn)
    return fbeta(p, r, beta)


def select_threshold(scored, beta: float = 2.0, ratio: float = 0.5) -> tuple[float, float]:
    """Grid-search the score threshold (0.01..0.99, step 0.01) maximizing
    proposal F-beta; ties go to the lowest threshold.  Returns
    (threshold, fbeta)."""
    best_t, best_f = 0.01, -1.0
    for step in range(1, 100):
        t = step / 100.0
        f = proposal_fbeta(scored, t, beta, ratio)
        if f > best_f:
            best_t, best_f = t, f
    return best_t, best_f


# ---------------------------------------------------------------------------
# training

@dataclass
class MilModel:
    params: dict
    config: MilConfig
    threshold: float = 0.5
    history: list = field(default_factory=list)

    def to_checkpoint(self) -> dict:
        out = dict(self.params)
        out["_meta.hidden"] = np.array([float(self.config.hidden)])
        out["_meta.window"] = np.array([float(self.config.window)])
        out["_meta.stride"] = np.array([float(self.config.stride)])
        out["_meta.lse_r"] = np.array([self.config.lse_r])
        out["_meta.literal_lse"] = np.array([1.0 if self.config.literal_lse else 0.0])
        out["_meta.threshold"] = np.array([self.threshold])
        return out

    @classmethod
    def from_checkpoint(cls, ckpt: dict) -> "MilModel":
        params = {k: v for k, v in ckpt.items() if not k.startswith("_meta.")}
        cfg = MilConfig(
            hidden=int(ckpt["_meta.hidden"][0]),
            window=int(ckpt["_meta.window"][0]),
            stride=int(ckpt["_meta.stride"][0]),
            lse_r=float(ckpt["_meta.lse_r"][0]),
            literal_lse=bool(ckpt["_meta.literal_lse"][0]),
        )
        return cls(params=params, config=cfg, threshold=float(ckpt["_meta.threshold"][0]))


def train_mil(bags: list[Bag], features: dict[str, np.ndarray],
              val_scored_inputs: list[tuple[str, np.ndarray, tuple[str, ...]]],
              config: MilConfig, seed: int) -> MilModel:
    """Train the bag scorer with Adam, batch-averaged gradients.

    ``val_scored_inputs`` rows are (match_id, event labels, event types) for
    validation matches; after each epoch the validation matches are scored,
    a threshold is grid-picked, and the epoch with the best validation
    F-beta (threshold included) is kept.  Training stops early after
    ``config.patience`` non-improving validation evaluations.
    """
    labels = {b.label for b in bags}
    if labels != {0, 1}:
        raise TrainingError("training bags must contain both classes, got %s" % sorted(labels))
    input_dim = next(iter(features.values())).shape[1]
    rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
    params = init_mil_params(input_dim, config.hidden, rng)
    opt = Adam(params, lr=config.lr)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([seed, 4]))

    best_f = -1.0
    best_state = {k: v.copy() for k, v in params.items()}
    best_threshold = 0.5
    best_epoch = -1
    stale = 0
    history = []

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(bags))
        total_loss = 0.0
        for chunk_start in range(0, len(order), config.batch):
            chunk = order[chunk_start : chunk_start + config.batch]
            acc: dict[str, np.ndarray] = {}
            for bi in chunk:
                bag = bags[bi]
                x = features[bag.match_id][bag.start : bag.start + bag.length]
                loss, _, grads = mil_loss_grads(params, x, float(bag.label))
                total_loss += loss
                for k, g in grads.items():
                    if k in acc:
                        acc[k] += g
                    else:
                        acc[k] = g.copy() if isinstance(g, np.ndarray) else np.array(g)
            for k in acc:
                acc[k] /= len(chunk)
            opt.step(params, acc)

        scored = []
        for match_id, ev_labels, types in val_scored_inputs:
            s = score_events(params, features[match_id], config)
            scored.append((s, ev_labels, types))
        threshold, f = select_threshold(scored, config.beta)
        history.append({"epoch": epoch, "loss": total_loss / len(bags),
                        "val_f": f, "threshold": threshold})
        if f > best_f:
            best_f = f
            best_state = {k: v.copy() for k, v in params.items()}
            best_threshold = threshold
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break

    model = MilModel(params=best_state, config=config, threshold=best_threshold)
    model.history = history
    model.best_epoch = best_epoch
    model.best_val_f = best_f
    return model
