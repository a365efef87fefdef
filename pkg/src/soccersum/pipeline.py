"""End-to-end orchestration: fold preparation, the three processing stages,
evaluation tables, and run artifacts.

Every artifact written here (CSV, JSON, checkpoint) embeds the short config
hash plus the run seed; readers that combine several artifacts refuse
mismatched provenance, so results can never silently mix runs.

Determinism: all randomness flows from the run seed through numbered
substreams (1 match generation, 2 audio, 3/4 stage-1 init and shuffling,
5 bag sampling, 6/7 stage-2 init and shuffling, 8 the random selector
baseline, 9 candidate sampling, 10 the random ranking baseline), each
further keyed by match ordinal where applicable.  Worker processes redo
per-match work in match order, so ``--jobs`` never changes any output byte.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig
from .core import (
    Action,
    DataFormatError,
    PaddingConfig,
    SoccersumError,
    action_duration,
    action_type,
)
from .evaluation import (
    Counts,
    format_csv,
    format_table,
    kfold_split,
    match_summary_actions,
    overlap_match,
    soccer_baseline,
)
from .features import MetadataEncoder, QualifierCodebook, extract_event_audio_features
from .io import Dataset, load_dataset
from .neural import load_checkpoint, save_checkpoint
from .stage1 import (
    MilConfig,
    MilModel,
    build_action_vocabulary,
    extract_proposals,
    find_vocabulary_spans,
    sample_training_bags,
    score_events,
    train_mil,
)
from .stage2 import HmaModel, label_proposal, score_proposals, train_hma
from .stage3 import (
    assemble_summary,
    baseline_ranking,
    generate_candidates,
    select_best_index,
)
from .synth import resolve_audio

SELECTOR_ROWS = ("random-selector", "only-goals", "shots-on-target", "attention-classifier")
RANKING_ROWS = ("random-ranking", "score-descending", "sampled-best-of-k")
STAGE1_ROWS = ("template-matching", "learned-model")


# ---------------------------------------------------------------------------
# provenance

@dataclass(frozen=True)
class Provenance:
    config_hash: str
    seed: int

    def line(self) -> str:
        return "# config_hash=%s seed=%d" % (self.config_hash, self.seed)


def parse_provenance_line(line: str, path: str) -> Provenance:
    parts = line.strip().lstrip("#").split()
    fields = dict(p.split("=", 1) for p in parts if "=" in p)
    if "config_hash" not in fields or "seed" not in fields:
        raise DataFormatError("%s: missing provenance header" % path)
    return Provenance(fields["config_hash"], int(fields["seed"]))


def ensure_same_provenance(tagged: list[tuple[str, Provenance]]) -> Provenance:
    """Accept a list of (path, provenance); all entries must agree."""
    if not tagged:
        raise SoccersumError("no artifacts given")
    first_path, first = tagged[0]
    for path, prov in tagged[1:]:
        if prov != first:
            raise SoccersumError(
                "artifact provenance mismatch: %s has %s seed %d but %s has %s seed %d"
                % (first_path, first.config_hash, first.seed, path,
                   prov.config_hash, prov.seed)
            )
    return first


def _hash_to_array(h: str) -> np.ndarray:
    return np.array([float(ord(c)) for c in h])


def _array_to_hash(a: np.ndarray) -> str:
    return "".join(chr(int(round(v))) for v in a)


def save_model_checkpoint(path: str, ckpt: dict, prov: Provenance) -> None:
    out = dict(ckpt)
    out["_prov.seed"] = np.array([float(prov.seed)])
    out["_prov.hash"] = _hash_to_array(prov.config_hash)
    save_checkpoint(out, path)


def load_model_checkpoint(path: str) -> tuple[dict, Provenance]:
    ckpt = load_checkpoint(path)
    try:
        seed = int(ckpt.pop("_prov.seed")[0])
        h = _array_to_hash(ckpt.pop("_prov.hash"))
    except KeyError:
        raise DataFormatError("%s: checkpoint missing provenance records" % path)
    return ckpt, Provenance(h, seed)


# ---------------------------------------------------------------------------
# artifact files

def write_scores_csv(path: str, prov: Provenance, scores: dict[str, np.ndarray]) -> None:
    with open(path, "w") as fh:
        fh.write(prov.line() + "\n")
        fh.write("match_id,event_index,score\n")
        for match_id in sorted(scores):
            for i, s in enumerate(scores[match_id]):
                fh.write("%s,%d,%.10f\n" % (match_id, i, s))


def read_scores_csv(path: str) -> tuple[Provenance, dict[str, np.ndarray]]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError("%s: empty scores file" % path)
    prov = parse_provenance_line(lines[0], path)
    rows: dict[str, list[float]] = {}
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        try:
            match_id, idx, score = line.split(",")
            rows.setdefault(match_id, []).append((int(idx), float(score)))
        except ValueError:
            raise DataFormatError("%s:%d: bad scores row %r" % (path, lineno, line))
    out = {}
    for match_id, pairs in rows.items():
        pairs.sort()
        out[match_id] = np.array([s for _, s in pairs])
    return prov, out


def write_proposals_json(path: str, prov: Provenance,
                         proposals: dict[str, list[tuple[int, int, str]]]) -> None:
    payload = {
        "config_hash": prov.config_hash,
        "seed": prov.seed,
        "matches": {
            match_id: [
                {"start_index": s, "end_index": e, "type": t}
                for s, e, t in items
            ]
            for match_id, items in sorted(proposals.items())
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_proposals_json(path: str) -> tuple[Provenance, dict[str, list[tuple[int, int, str]]]]:
    with open(path) as fh:
        payload = json.load(fh)
    if "config_hash" not in payload or "seed" not in payload:
        raise DataFormatError("%s: missing provenance fields" % path)
    prov = Provenance(payload["config_hash"], int(payload["seed"]))
    out = {}
    for match_id, items in payload.get("matches", {}).items():
        out[match_id] = [
            (int(d["start_index"]), int(d["end_index"]), str(d["type"])) for d in items
        ]
    return prov, out


def write_theta_csv(path: str, prov: Provenance, theta: dict[str, np.ndarray]) -> None:
    with open(path, "w") as fh:
        fh.write(prov.line() + "\n")
        fh.write("match_id,proposal_index,theta\n")
        for match_id in sorted(theta):
            for i, v in enumerate(theta[match_id]):
                fh.write("%s,%d,%.10f\n" % (match_id, i, v))


def read_theta_csv(path: str) -> tuple[Provenance, dict[str, np.ndarray]]:
    prov, rows = read_scores_csv(path)
    return prov, rows


def write_candidates_json(path: str, prov: Provenance, match_id: str, budget: float,
                          candidates, proposals: list[tuple[int, int, str]]) -> None:
    payload = {
        "config_hash": prov.config_hash,
        "seed": prov.seed,
        "match_id": match_id,
        "budget": round(budget, 6),
        "candidates": [
            {
                "sample_index": c.sample_index,
                "ranking": [int(i) for i in c.ranking],
                "chosen": [
                    {
                        "proposal_index": int(i),
                        "start_index": proposals[i][0],
                        "end_index": proposals[i][1],
                        "type": proposals[i][2],
                    }
                    for i in c.chosen
                ],
                "total_duration": round(c.total_duration, 6),
                "over_budget": c.over_budget,
            }
            for c in candidates
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_candidates_json(path: str) -> tuple[Provenance, dict]:
    with open(path) as fh:
        payload = json.load(fh)
    if "config_hash" not in payload or "seed" not in payload:
        raise DataFormatError("%s: missing provenance fields" % path)
    return Provenance(payload["config_hash"], int(payload["seed"])), payload


def write_features_json(path: str, prov: Provenance, codebook: QualifierCodebook,
                        vocab: set[tuple[str, ...]]) -> None:
    payload = {
        "config_hash": prov.config_hash,
        "seed": prov.seed,
        "qualifier_codebook": codebook.to_dict(),
        "action_vocabulary": sorted([list(seq) for seq in vocab]),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_features_json(path: str):
    with open(path) as fh:
        payload = json.load(fh)
    if "config_hash" not in payload or "seed" not in payload:
        raise DataFormatError("%s: missing provenance fields" % path)
    prov = Provenance(payload["config_hash"], int(payload["seed"]))
    codebook = QualifierCodebook.from_dict(payload["qualifier_codebook"])
    vocab = {tuple(seq) for seq in payload["action_vocabulary"]}
    return prov, codebook, vocab


# ---------------------------------------------------------------------------
# worker tasks (top level so they pickle for the process pool)

_WORKER_DATASETS: dict[str, Dataset] = {}


def _cached_dataset(data_dir: str) -> Dataset:
    ds = _WORKER_DATASETS.get(data_dir)
    if ds is None:
        ds = load_dataset(data_dir)
        _WORKER_DATASETS[data_dir] = ds
    return ds


def _score_task(args):
    data_dir, match_id, params, mil_cfg, codebook_payload = args
    ds = _cached_dataset(data_dir)
    match = ds.by_id(match_id)
    encoder = MetadataEncoder(ds.vocabulary, QualifierCodebook.from_dict(codebook_payload))
    feats = encoder.encode_match(match)
    return match_id, score_events(params, feats, mil_cfg)


def _audio_task(args):
    data_dir, match_id, event_indices = args
    ds = _cached_dataset(data_dir)
    match = ds.by_id(match_id)
    samples, rate = resolve_audio(ds, match_id)
    rows = {}
    for idx in event_indices:
        rows[idx] = extract_event_audio_features(samples, rate, match.events[idx].t)
    return match_id, rows


def _parallel_map(fn, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------------------
# fold execution

@dataclass
class FoldContext:
    """Shared per-fold state: the split, harvested vocabulary, fitted
    qualifier codebook, and metadata features for every match."""

    train_ids: list
    val_ids: list
    test_ids: list
    vocab: set
    codebook: QualifierCodebook
    encoder: MetadataEncoder
    feats: dict
    types: dict
    gt_intervals: dict
    ordinals: dict


def prepare_fold(dataset: Dataset, config: PipelineConfig, fold_index: int,
                 seed: int) -> FoldContext:
    ids = dataset.match_ids()
    folds = kfold_split(ids, k=config["eval.kfold"], seed=seed)
    train_ids, val_ids, test_ids = folds[fold_index]
    matches = {m.match_id: m for m in dataset.matches}
    vocab = build_action_vocabulary(
        {i: matches[i] for i in train_ids},
        {i: dataset.summaries[i] for i in train_ids},
    )
    codebook = QualifierCodebook.from_events(
        [e for i in train_ids for e in matches[i].events],
        dims=config["features.qualifier_dims"],
    )
    encoder = MetadataEncoder(dataset.vocabulary, codebook)
    return FoldContext(
        train_ids=train_ids,
        val_ids=val_ids,
        test_ids=test_ids,
        vocab=vocab,
        codebook=codebook,
        encoder=encoder,
        feats={i: encoder.encode_match(matches[i]) for i in ids},
        types={i: matches[i].type_sequence() for i in ids},
        gt_intervals={
            i: [(a.start_index, a.end_index) for a in dataset.summaries[i].actions]
            for i in ids
        },
        ordinals={match_id: i for i, match_id in enumerate(ids)},
    )


@dataclass
class FoldResult:
    fold: int
    stage1: dict
    selection: dict
    ranking: dict
    best_sample_index: int
    threshold: float
    mil_val_f: float
    hma_val_f: float
    n_proposals: int
    n_over_budget: int
    max_budget_ratio: float

    def to_dict(self) -> dict:
        def counts(d):
            return {k: {"tp": c.tp, "fp": c.fp, "fn": c.fn} for k, c in d.items()}
        return {
            "fold": self.fold,
            "stage1": counts(self.stage1),
            "selection": counts(self.selection),
            "ranking": counts(self.ranking),
            "best_sample_index": self.best_sample_index,
            "threshold": self.threshold,
            "mil_val_f": self.mil_val_f,
            "hma_val_f": self.hma_val_f,
            "n_proposals": self.n_proposals,
            "n_over_budget": self.n_over_budget,
            "max_budget_ratio": self.max_budget_ratio,
        }


def _interval_labels(n: int, intervals) -> np.ndarray:
    labels = np.zeros(n, dtype=bool)
    for s, e in intervals:
        labels[s : e + 1] = True
    return labels


def _derived_seed(seed: int, domain: int, ordinal: int) -> int:
    return int(np.random.SeedSequence([seed, domain, ordinal]).generate_state(1)[0])


def _actions_from(indices, proposals) -> list[Action]:
    return [Action(proposals[i][0], proposals[i][1], proposals[i][2]) for i in indices]


def run_fold(dataset: Dataset, config: PipelineConfig, fold_index: int, seed: int,
             out_dir: str | None = None, data_dir: str | None = None,
             jobs: int = 1) -> FoldResult:
    """Train all three stages on one fold and evaluate on its test shard."""
    ctx = prepare_fold(dataset, config, fold_index, seed)
    train_ids, val_ids, test_ids = ctx.train_ids, ctx.val_ids, ctx.test_ids
    ids = dataset.match_ids()
    matches = {m.match_id: m for m in dataset.matches}
    types, gt_intervals, ordinals = ctx.types, ctx.gt_intervals, ctx.ordinals
    vocab, codebook, feats = ctx.vocab, ctx.codebook, ctx.feats
    padding = PaddingConfig(config["pad.pre"], config["pad.post"])

    # stage 1: bags and training ------------------------------------------
    train_matches = {i: matches[i] for i in train_ids}
    bags = sample_training_bags(train_matches, vocab, seed, config["stage1.neg_min_len"])
    mil_cfg = config.mil_config()
    val_inputs = [
        (i, _interval_labels(len(matches[i].events), gt_intervals[i]), types[i])
        for i in val_ids
    ]
    mil = train_mil(bags, feats, val_inputs, mil_cfg, seed)

    # per-event scores and proposals for every match
    if jobs > 1 and data_dir is not None:
        _WORKER_DATASETS.setdefault(data_dir, dataset)
        tasks = [(data_dir, i, mil.params, mil_cfg, codebook.to_dict()) for i in ids]
        scores = dict(_parallel_map(_score_task, tasks, jobs))
    else:
        scores = {i: score_events(mil.params, feats[i], mil_cfg) for i in ids}
    spans = {i: extract_proposals(scores[i], mil.threshold, types[i]) for i in ids}
    proposals = {
        i: [(s, e, action_type(Action(s, e), matches[i])) for s, e in spans[i]]
        for i in ids
    }

    stage1 = {name: Counts() for name in STAGE1_ROWS}
    for i in test_ids:
        tm_preds = find_vocabulary_spans(types[i], vocab)
        stage1["template-matching"].add(*overlap_match(tm_preds, gt_intervals[i]))
        stage1["learned-model"].add(*overlap_match(spans[i], gt_intervals[i]))

    # stage 2: audio features for proposal events, scorer training --------
    needed = {i: sorted({k for s, e in spans[i] for k in range(s, e + 1)}) for i in ids}
    if jobs > 1 and data_dir is not None:
        tasks = [(data_dir, i, needed[i]) for i in ids if needed[i]]
        audio_rows = dict(_parallel_map(_audio_task, tasks, jobs))
    else:
        audio_rows = {}
        for i in ids:
            if not needed[i]:
                continue
            samples, rate = resolve_audio(dataset, i)
            audio_rows[i] = {
                k: extract_event_audio_features(samples, rate, matches[i].events[k].t)
                for k in needed[i]
            }

    overlap_ratio = config["stage2.overlap_ratio"]

    def stage2_items(match_id, with_labels=True):
        items = []
        for s, e, _t in proposals[match_id]:
            xm = feats[match_id][s : e + 1]
            xa = np.stack([audio_rows[match_id][k] for k in range(s, e + 1)])
            if with_labels:
                y = label_proposal((s, e), gt_intervals[match_id], overlap_ratio)
                items.append((xm, xa, y))
            else:
                items.append((xm, xa))
        return items

    train_items = [it for i in train_ids for it in stage2_items(i)]
    val_items = [it for i in val_ids for it in stage2_items(i)]
    hma = train_hma(train_items, val_items, config.hma_config(), seed)

    theta = {
        i: (score_proposals(hma, stage2_items(i, with_labels=False))
            if proposals[i] else np.empty(0))
        for i in ids
    }

    # test-shard selection table ------------------------------------------
    selection = {name: Counts() for name in SELECTOR_ROWS}
    for i in test_ids:
        ptypes = [t for _s, _e, t in proposals[i]]
        gt_actions = dataset.summaries[i].actions
        picks = {
            "random-selector": soccer_baseline("random", ptypes,
                                               _derived_seed(seed, 8, ordinals[i])),
            "only-goals": soccer_baseline("goals", ptypes),
            "shots-on-target": soccer_baseline("shots_on_target", ptypes),
            "attention-classifier": [j for j, v in enumerate(theta[i]) if v >= 0.5],
        }
        for name, chosen in picks.items():
            preds = _actions_from(chosen, proposals[i])
            selection[name].add(*match_summary_actions(preds, gt_actions, matches[i]))

    # stage 3: budgeted ranking -------------------------------------------
    k = config["stage3.samples"]
    sigma = config["stage3.sigma"]
    tol = config["stage3.budget_tol"]
    mode = config["stage3.mode"]
    budgets = {
        i: sum(action_duration(a, matches[i], padding)
               for a in dataset.summaries[i].actions)
        for i in ids
    }
    durations = {
        i: [action_duration(Action(s, e), matches[i], padding)
            for s, e, _t in proposals[i]]
        for i in ids
    }
    start_times = {
        i: [matches[i].events[s].t for s, _e, _t in proposals[i]] for i in ids
    }

    def candidates_for(match_id):
        return generate_candidates(
            theta[match_id], durations[match_id], start_times[match_id],
            budgets[match_id], k=k, sigma=sigma,
            seed_key=(seed, 9, ordinals[match_id]), tol=tol, mode=mode,
        )

    n_over = 0
    max_ratio = 0.0

    def track_budget(c, match_id):
        nonlocal n_over, max_ratio
        if c.over_budget:
            n_over += 1
        elif budgets[match_id] > 0:
            max_ratio = max(max_ratio, c.total_duration / budgets[match_id])

    if val_ids:
        f_matrix = np.zeros((len(val_ids), k))
        for vi, i in enumerate(val_ids):
            cands = candidates_for(i)
            gt_actions = dataset.summaries[i].actions
            for j, c in enumerate(cands):
                track_budget(c, i)
                preds = _actions_from(c.chosen, proposals[i])
                tp, fp, fn = match_summary_actions(preds, gt_actions, matches[i])
                cnt = Counts(tp, fp, fn)
                f_matrix[vi, j] = cnt.metrics(beta=1.0)["f"]
        best_j = select_best_index(f_matrix)
    else:
        best_j = 0

    ranking = {name: Counts() for name in RANKING_ROWS}
    test_candidates = {}
    for i in test_ids:
        cands = candidates_for(i)
        test_candidates[i] = cands
        for c in cands:
            track_budget(c, i)
        gt_actions = dataset.summaries[i].actions
        rows = {
            "sampled-best-of-k": cands[best_j].chosen,
        }
        desc = baseline_ranking(theta[i], "descending")
        c_desc = assemble_summary(desc, durations[i], start_times[i], budgets[i], tol, mode)
        track_budget(c_desc, i)
        rows["score-descending"] = c_desc.chosen
        rng = np.random.default_rng(np.random.SeedSequence([seed, 10, ordinals[i]]))
        rand = baseline_ranking(theta[i], "random", rng)
        c_rand = assemble_summary(rand, durations[i], start_times[i], budgets[i], tol, mode)
        track_budget(c_rand, i)
        rows["random-ranking"] = c_rand.chosen
        for name, chosen in rows.items():
            preds = _actions_from(chosen, proposals[i])
            ranking[name].add(*match_summary_actions(preds, gt_actions, matches[i]))

    result = FoldResult(
        fold=fold_index,
        stage1=stage1,
        selection=selection,
        ranking=ranking,
        best_sample_index=best_j,
        threshold=mil.threshold,
        mil_val_f=getattr(mil, "best_val_f", 0.0),
        hma_val_f=getattr(hma, "best_val_f", 0.0),
        n_proposals=sum(len(v) for v in proposals.values()),
        n_over_budget=n_over,
        max_budget_ratio=max_ratio,
    )

    if out_dir is not None:
        prov = Provenance(config.config_hash(), seed)
        fold_dir = os.path.join(out_dir, "fold_%03d" % fold_index)
        os.makedirs(os.path.join(fold_dir, "candidates"), exist_ok=True)
        save_model_checkpoint(os.path.join(fold_dir, "mil.ckpt"), mil.to_checkpoint(), prov)
        save_model_checkpoint(os.path.join(fold_dir, "hma.ckpt"), hma.to_checkpoint(), prov)
        write_features_json(os.path.join(fold_dir, "stage1_features.json"), prov,
                            codebook, vocab)
        write_scores_csv(os.path.join(fold_dir, "scores.csv"), prov, scores)
        write_proposals_json(os.path.join(fold_dir, "proposals.json"), prov, proposals)
        write_theta_csv(os.path.join(fold_dir, "theta.csv"), prov,
                        {i: theta[i] for i in val_ids + test_ids})
        for i in test_ids:
            write_candidates_json(
                os.path.join(fold_dir, "candidates", "%s.json" % i), prov,
                i, budgets[i], test_candidates[i], proposals[i],
            )
        with open(os.path.join(fold_dir, "fold_result.json"), "w") as fh:
            payload = result.to_dict()
            payload["config_hash"] = prov.config_hash
            payload["seed"] = prov.seed
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return result


# ---------------------------------------------------------------------------
# protocol over folds, tables

@dataclass
class ProtocolResult:
    folds: list
    tables: dict = field(default_factory=dict)
    text: str = ""

    def table_rows(self, name: str):
        return self.tables[name]


def _sum_counts(fold_results, section: str, name: str) -> Counts:
    total = Counts()
    for fr in fold_results:
        c = getattr(fr, section)[name]
        total.add(c.tp, c.fp, c.fn)
    return total


def aggregate_results(fold_results: list, config: PipelineConfig) -> ProtocolResult:
    beta = config["eval.beta"]
    stage1_rows = []
    for name in STAGE1_ROWS:
        m = _sum_counts(fold_results, "stage1", name).metrics(beta=beta)
        stage1_rows.append([name, m["missing"], m["f"]])
    selection_rows = []
    for name in SELECTOR_ROWS:
        m = _sum_counts(fold_results, "selection", name).metrics(beta=1.0)
        selection_rows.append([name, m["precision"], m["recall"], m["f"]])
    ranking_rows = []
    for name in RANKING_ROWS:
        m = _sum_counts(fold_results, "ranking", name).metrics(beta=1.0)
        ranking_rows.append([name, m["missing"], m["f"]])

    tables = {
        "stage1": (["method", "missing_pct", "f%g" % beta], stage1_rows),
        "selection": (["selector", "precision", "recall", "f1"], selection_rows),
        "ranking": (["method", "missing_pct", "f1"], ranking_rows),
    }
    text = "\n".join([
        format_table("Action proposals (test shards)", *tables["stage1"]),
        format_table("Proposal selection (test shards)", *tables["selection"]),
        format_table("Budgeted summaries (test shards)", *tables["ranking"]),
    ])
    return ProtocolResult(folds=fold_results, tables=tables, text=text)


def write_results(out_dir: str, prov: Provenance, result: ProtocolResult) -> None:
    res_dir = os.path.join(out_dir, "results")
    os.makedirs(res_dir, exist_ok=True)
    for name in ("stage1", "selection", "ranking"):
        columns, rows = result.tables[name]
        with open(os.path.join(res_dir, "%s.csv" % name), "w") as fh:
            fh.write(prov.line() + "\n")
            fh.write(format_csv(columns, rows))
    with open(os.path.join(res_dir, "results.txt"), "w") as fh:
        fh.write(prov.line() + "\n\n")
        fh.write(result.text)


def run_protocol(dataset: Dataset, config: PipelineConfig, seed: int,
                 out_dir: str | None = None, data_dir: str | None = None,
                 jobs: int = 1, n_folds: int | None = None) -> ProtocolResult:
    """Train and evaluate over the first ``n_folds`` cross-validation folds
    (default from config), then aggregate counts into the report tables."""
    if n_folds is None:
        n_folds = config["eval.folds"]
    n_folds = max(1, min(n_folds, config["eval.kfold"]))
    fold_results = []
    for fold_index in range(n_folds):
        fold_results.append(
            run_fold(dataset, config, fold_index, seed,
                     out_dir=out_dir, data_dir=data_dir, jobs=jobs)
        )
    result = aggregate_results(fold_results, config)
    if out_dir is not None:
        write_results(out_dir, Provenance(config.config_hash(), seed), result)
    return result
