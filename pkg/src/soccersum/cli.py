"""Command-line interface.

Subcommands cover the full flow: ``gen-data`` builds a synthetic dataset,
``extract-features`` dumps per-event feature vectors, the ``train-*`` /
``score-events`` / ``extract-proposals`` / ``summarize`` commands run the
stages piecewise against saved artifacts, ``evaluate`` runs the
cross-validation protocol, and ``e2e`` chains generation plus evaluation.

Exit codes: 0 success, 1 usage or configuration problems, 2 data problems
(malformed files, provenance mismatches, training failures).
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import load_config
from .core import (
    Action,
    ConfigError,
    PaddingConfig,
    SoccersumError,
    action_duration,
    action_type,
)
from .features import AUDIO_FEATURE_NAMES, MetadataEncoder, extract_event_audio_features
from .io import load_dataset, save_dataset
from .pipeline import (
    Provenance,
    ensure_same_provenance,
    load_model_checkpoint,
    prepare_fold,
    read_features_json,
    read_proposals_json,
    read_scores_csv,
    run_protocol,
    save_model_checkpoint,
    write_candidates_json,
    write_features_json,
    write_proposals_json,
    write_scores_csv,
    write_theta_csv,
)
from .stage1 import (
    MilModel,
    extract_proposals,
    sample_training_bags,
    score_events,
    train_mil,
)
from .stage2 import HmaModel, label_proposal, score_proposals, train_hma
from .stage3 import generate_candidates
from .synth import generate_dataset, resolve_audio


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this project reserves 2 for data
    problems, so remap usage errors to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(1)


def _add_common(sub):
    sub.add_argument("--config", default=None, help="configuration file")
    sub.add_argument("--seed", type=int, default=None, help="override the run seed")
    sub.add_argument("--jobs", type=int, default=None, help="worker processes")


def _config_from(args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "jobs", None) is not None:
        overrides["jobs"] = args.jobs
    return load_config(args.config, overrides)


def _prov(cfg) -> Provenance:
    return Provenance(cfg.config_hash(), cfg["seed"])


def _require_current(cfg, tagged):
    """All consumed artifacts must match the active config hash and seed."""
    ensure_same_provenance([("active configuration", _prov(cfg))] + list(tagged))


def _interval_labels(n, intervals):
    labels = np.zeros(n, dtype=bool)
    for s, e in intervals:
        labels[s : e + 1] = True
    return labels


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen_data(args) -> int:
    cfg = _config_from(args)
    dataset = generate_dataset(cfg.gen_config(), cfg["seed"])
    save_dataset(dataset, args.out_dir)
    n_events = sum(len(m.events) for m in dataset.matches)
    print("wrote %d matches (%d events) to %s" % (len(dataset.matches), n_events, args.out_dir))
    return 0


def cmd_extract_features(args) -> int:
    cfg = _config_from(args)
    dataset = load_dataset(args.data)
    ctx = prepare_fold(dataset, cfg, args.fold, cfg["seed"])
    prov = _prov(cfg)
    feat_dir = os.path.join(args.out_dir, "features")
    os.makedirs(feat_dir, exist_ok=True)
    names = ctx.encoder.feature_names()
    ids = args.matches.split(",") if args.matches else dataset.match_ids()
    for match_id in ids:
        match = dataset.by_id(match_id)
        rows = ctx.feats[match_id]
        path = os.path.join(feat_dir, "%s_metadata.csv" % match_id)
        with open(path, "w") as fh:
            fh.write(prov.line() + "\n")
            fh.write("event_index," + ",".join(names) + "\n")
            for i in range(rows.shape[0]):
                fh.write("%d," % i + ",".join("%.6f" % v for v in rows[i]) + "\n")
        if args.audio:
            samples, rate = resolve_audio(dataset, match_id)
            path = os.path.join(feat_dir, "%s_audio.csv" % match_id)
            with open(path, "w") as fh:
                fh.write(prov.line() + "\n")
                fh.write("event_index," + ",".join(AUDIO_FEATURE_NAMES) + "\n")
                for ev in match.events:
                    row = extract_event_audio_features(samples, rate, ev.t)
                    fh.write("%d," % ev.index + ",".join("%.6f" % v for v in row) + "\n")
    print("wrote features for %d matches to %s" % (len(ids), feat_dir))
    return 0


def cmd_train_proposals(args) -> int:
    cfg = _config_from(args)
    dataset = load_dataset(args.data)
    ctx = prepare_fold(dataset, cfg, args.fold, cfg["seed"])
    matches = {m.match_id: m for m in dataset.matches}
    bags = sample_training_bags(
        {i: matches[i] for i in ctx.train_ids}, ctx.vocab,
        cfg["seed"], cfg["stage1.neg_min_len"],
    )
    val_inputs = [
        (i, _interval_labels(len(matches[i].events), ctx.gt_intervals[i]), ctx.types[i])
        for i in ctx.val_ids
    ]
    model = train_mil(bags, ctx.feats, val_inputs, cfg.mil_config(), cfg["seed"])
    os.makedirs(args.out_dir, exist_ok=True)
    prov = _prov(cfg)
    save_model_checkpoint(os.path.join(args.out_dir, "mil.ckpt"), model.to_checkpoint(), prov)
    write_features_json(os.path.join(args.out_dir, "stage1_features.json"), prov,
                        ctx.codebook, ctx.vocab)
    print("trained proposal model: threshold %.2f, validation F%.1f %.4f"
          % (model.threshold, cfg["stage1.beta"], model.best_val_f))
    return 0


def cmd_score_events(args) -> int:
    cfg = _config_from(args)
    dataset = load_dataset(args.data)
    ckpt, prov_m = load_model_checkpoint(args.model)
    prov_f, codebook, _vocab = read_features_json(args.features)
    _require_current(cfg, [(args.model, prov_m), (args.features, prov_f)])
    model = MilModel.from_checkpoint(ckpt)
    encoder = MetadataEncoder(dataset.vocabulary, codebook)
    ids = args.matches.split(",") if args.matches else dataset.match_ids()
    scores = {}
    for match_id in ids:
        feats = encoder.encode_match(dataset.by_id(match_id))
        scores[match_id] = score_events(model.params, feats, model.config)
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    write_scores_csv(args.out, _prov(cfg), scores)
    print("scored %d matches -> %s" % (len(ids), args.out))
    return 0


def cmd_extract_proposals(args) -> int:
    cfg = _config_from(args)
    dataset = load_dataset(args.data)
    prov_s, scores = read_scores_csv(args.scores)
    ckpt, prov_m = load_model_checkpoint(args.model)
    _require_current(cfg, [(args.scores, prov_s), (args.model, prov_m)])
    model = MilModel.from_checkpoint(ckpt)
    threshold = args.threshold if args.threshold is not None else model.threshold
    proposals = {}
    for match_id, s in scores.items():
        match = dataset.by_id(match_id)
        spans = extract_proposals(s, threshold, match.type_sequence())
        proposals[match_id] = [(a, b, _typed(a, b, match)) for a, b in spans]
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    write_proposals_json(args.out, _prov(cfg), proposals)
    n = sum(len(v) for v in proposals.values())
    print("extracted %d proposals (threshold %.2f) -> %s" % (n, threshold, args.out))
    return 0


def _typed(a: int, b: int, match) -> str:
    return action_type(Action(a, b), match)


def _stage2_items(dataset, cfg, proposals, ids, feats_cache=None, with_labels=True):
    """(metadata, audio, label) triples for every proposal of ``ids``."""
    items_by_match = {}
    for match_id in ids:
        match = dataset.by_id(match_id)
        feats = feats_cache[match_id]
        needed = sorted({k for s, e, _t in proposals.get(match_id, []) for k in range(s, e + 1)})
        if not needed:
            items_by_match[match_id] = []
            continue
        samples, rate = resolve_audio(dataset, match_id)
        rows = {k: extract_event_audio_features(samples, rate, match.events[k].t)
                for k in needed}
        items = []
        gt = [(a.start_index, a.end_index) for a in dataset.summaries[match_id].actions] \
            if match_id in dataset.summaries else []
        for s, e, _t in proposals[match_id]:
            xm = feats[s : e + 1]
            xa = np.stack([rows[k] for k in range(s, e + 1)])
            if with_labels:
                items.append((xm, xa, label_proposal((s, e), gt, cfg["stage2.overlap_ratio"])))
            else:
                items.append((xm, xa))
        items_by_match[match_id] = items
    return items_by_match


def cmd_train_hma(args) -> int:
    cfg = _config_from(args)
    dataset = load_dataset(args.data)
    prov_p, proposals = read_proposals_json(args.proposals)
    _require_current(cfg, [(args.proposals, prov_p)])
    ctx = prepare_fold(dataset, cfg, args.fold, cfg["seed"])
    train_map = _stage2_items(dataset, cfg, proposals, ctx.train_ids, ctx.feats)
    val_map = _stage2_items(dataset, cfg, proposals, ctx.val_ids, ctx.feats)
    train_items = [it for i in ctx.train_ids for it in train_map[i]]
    val_items = [it for i in ctx.val_ids for it in val_map[i]]
    model = train_hma(train_items, val_items, cfg.hma_config(), cfg["seed"])
    os.makedirs(args.out_dir, exist_ok=True)
    save_model_checkpoint(os.path.join(args.out_dir, "hma.ckpt"),
                          model.to_checkpoint(), _prov(cfg))
    print("trained proposal scorer: validation F1 %.4f" % model.best_val_f)
    return 0


def cmd_summarize(args) -> int:
    cfg = _config_from(args)
    dataset = load_dataset(args.data)
    prov_p, proposals = read_proposals_json(args.proposals)
    ckpt, prov_m = load_model_checkpoint(args.model)
    _require_current(cfg, [(args.proposals, prov_p), (args.model, prov_m)])
    model = HmaModel.from_checkpoint(ckpt)
    ctx = prepare_fold(dataset, cfg, args.fold, cfg["seed"])
    ids = args.matches.split(",") if args.matches else ctx.test_ids
    padding = PaddingConfig(cfg["pad.pre"], cfg["pad.post"])
    prov = _prov(cfg)
    os.makedirs(os.path.join(args.out_dir, "candidates"), exist_ok=True)

    items_map = _stage2_items(dataset, cfg, proposals, ids, ctx.feats, with_labels=False)
    theta = {}
    for match_id in ids:
        items = items_map[match_id]
        theta[match_id] = score_proposals(model, items) if items else np.empty(0)
    write_theta_csv(os.path.join(args.out_dir, "theta.csv"), prov, theta)

    for match_id in ids:
        match = dataset.by_id(match_id)
        budget = sum(action_duration(a, match, padding)
                     for a in dataset.summaries[match_id].actions)
        durations = [action_duration(Action(s, e), match, padding)
                     for s, e, _t in proposals.get(match_id, [])]
        starts = [match.events[s].t for s, _e, _t in proposals.get(match_id, [])]
        cands = generate_candidates(
            theta[match_id], durations, starts, budget,
            k=cfg["stage3.samples"], sigma=cfg["stage3.sigma"],
            seed_key=(cfg["seed"], 9, ctx.ordinals[match_id]),
            tol=cfg["stage3.budget_tol"], mode=cfg["stage3.mode"],
        )
        write_candidates_json(
            os.path.join(args.out_dir, "candidates", "%s.json" % match_id),
            prov, match_id, budget, cands, proposals.get(match_id, []),
        )
    print("wrote rankings and %d candidate files to %s" % (len(ids), args.out_dir))
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config_from(args)
    dataset = load_dataset(args.data)
    result = run_protocol(dataset, cfg, cfg["seed"], out_dir=args.out_dir,
                          data_dir=args.data, jobs=cfg["jobs"])
    print(result.text, end="")
    return 0


def cmd_e2e(args) -> int:
    cfg = _config_from(args)
    data_dir = os.path.join(args.out_dir, "data")
    dataset = generate_dataset(cfg.gen_config(), cfg["seed"])
    save_dataset(dataset, data_dir)
    result = run_protocol(dataset, cfg, cfg["seed"], out_dir=args.out_dir,
                          data_dir=data_dir, jobs=cfg["jobs"])
    print(result.text, end="")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="soccersum", description="soccer match summarization pipeline")
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = subs.add_parser("gen-data", help="generate a synthetic dataset")
    _add_common(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = subs.add_parser("extract-features", help="dump per-event feature vectors")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("--matches", default=None, help="comma-separated match ids")
    p.add_argument("--audio", action="store_true", help="also extract audio features")
    p.set_defaults(func=cmd_extract_features)

    p = subs.add_parser("train-proposals", help="train the stage-1 proposal model")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--fold", type=int, default=0)
    p.set_defaults(func=cmd_train_proposals)

    p = subs.add_parser("score-events", help="per-event scores from a trained model")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, help="mil.ckpt path")
    p.add_argument("--features", required=True, help="stage1_features.json path")
    p.add_argument("--out", required=True, help="scores CSV to write")
    p.add_argument("--matches", default=None)
    p.set_defaults(func=cmd_score_events)

    p = subs.add_parser("extract-proposals", help="threshold scores into proposals")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--out", required=True, help="proposals JSON to write")
    p.set_defaults(func=cmd_extract_proposals)

    p = subs.add_parser("train-hma", help="train the attention proposal scorer")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--proposals", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--fold", type=int, default=0)
    p.set_defaults(func=cmd_train_hma)

    p = subs.add_parser("summarize", help="rank proposals and emit budgeted candidates")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--proposals", required=True)
    p.add_argument("--model", required=True, help="hma.ckpt path")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("--matches", default=None)
    p.set_defaults(func=cmd_summarize)

    p = subs.add_parser("evaluate", help="run the cross-validation protocol")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = subs.add_parser("e2e", help="generate data, then run the full protocol")
    _add_common(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_e2e)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write("configuration error: %s\n" % exc)
        return 1
    except SoccersumError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
