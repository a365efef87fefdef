"""Dataset serialization.

Layout of a dataset directory::

    dataset.json          manifest: vocabulary + per-match side info
    events.jsonl          one JSON object per event, all matches
    summaries/<id>.json   ground-truth summary, JSON array of actions

Event lines carry {match_id, index, t, type, team, player, sx, sy, ex, ey,
outcome, qualifier}.  Numeric fields are written rounded to 6 decimals so a
read/write cycle is byte-stable for data already at that precision.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .core import (
    Action,
    DataFormatError,
    Event,
    Match,
    Summary,
    VocabularyError,
)

_EVENT_FIELDS = (
    "match_id",
    "index",
    "t",
    "type",
    "team",
    "player",
    "sx",
    "sy",
    "ex",
    "ey",
    "outcome",
    "qualifier",
)


def _r6(x: float) -> float:
    return round(float(x), 6)


@dataclass
class Dataset:
    vocabulary: tuple[str, ...]
    matches: list[Match] = field(default_factory=list)
    summaries: dict[str, Summary] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def match_ids(self) -> list[str]:
        return [m.match_id for m in self.matches]

    def by_id(self, match_id: str) -> Match:
        for m in self.matches:
            if m.match_id == match_id:
                return m
        raise KeyError(match_id)


def event_to_record(ev: Event, match_id: str) -> dict:
    return {
        "match_id": match_id,
        "index": ev.index,
        "t": _r6(ev.t),
        "type": ev.type,
        "team": ev.team,
        "player": ev.player,
        "sx": _r6(ev.sx),
        "sy": _r6(ev.sy),
        "ex": _r6(ev.ex),
        "ey": _r6(ev.ey),
        "outcome": ev.outcome,
        "qualifier": ev.qualifier,
    }


def record_to_event(rec: dict, lineno: int = -1) -> tuple[str, Event]:
    missing = [f for f in _EVENT_FIELDS if f not in rec]
    if missing:
        raise DataFormatError(
            "event line %d missing fields %s" % (lineno, ", ".join(missing))
        )
    ev = Event(
        index=int(rec["index"]),
        t=float(rec["t"]),
        type=str(rec["type"]),
        team=int(rec["team"]),
        player=int(rec["player"]),
        sx=float(rec["sx"]),
        sy=float(rec["sy"]),
        ex=float(rec["ex"]),
        ey=float(rec["ey"]),
        outcome=int(rec["outcome"]),
        qualifier=int(rec["qualifier"]),
    )
    return str(rec["match_id"]), ev


def save_dataset(dataset: Dataset, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    os.makedirs(os.path.join(out_dir, "summaries"), exist_ok=True)

    manifest = {
        "vocabulary": list(dataset.vocabulary),
        "matches": [
            {
                "match_id": m.match_id,
                "attack_right_first": list(m.attack_right_first),
                "audio": m.audio,
            }
            for m in dataset.matches
        ],
        "meta": dataset.meta,
    }
    with open(os.path.join(out_dir, "dataset.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(os.path.join(out_dir, "events.jsonl"), "w") as fh:
        for m in dataset.matches:
            for ev in m.events:
                fh.write(json.dumps(event_to_record(ev, m.match_id), sort_keys=True))
                fh.write("\n")

    for match_id, summary in dataset.summaries.items():
        recs = [
            {"start_index": a.start_index, "end_index": a.end_index, "type": a.type}
            for a in summary.actions
        ]
        path = os.path.join(out_dir, "summaries", "%s.json" % match_id)
        with open(path, "w") as fh:
            json.dump(recs, fh, indent=2, sort_keys=True)
            fh.write("\n")


def load_dataset(path: str, validate: bool = True) -> Dataset:
    manifest_path = os.path.join(path, "dataset.json")
    if not os.path.exists(manifest_path):
        raise DataFormatError("no dataset.json under %r" % path)
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    vocabulary = tuple(manifest["vocabulary"])
    vocab_set = set(vocabulary)

    events_by_match: dict[str, list[Event]] = {}
    with open(os.path.join(path, "events.jsonl")) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError("events.jsonl line %d: %s" % (lineno, exc))
            match_id, ev = record_to_event(rec, lineno)
            if validate and ev.type not in vocab_set:
                raise VocabularyError(
                    "events.jsonl line %d: event type %r not in vocabulary" % (lineno, ev.type)
                )
            events_by_match.setdefault(match_id, []).append(ev)

    matches: list[Match] = []
    for entry in manifest["matches"]:
        match_id = entry["match_id"]
        events = events_by_match.get(match_id, [])
        if not events:
            raise DataFormatError(
                "match %r has no events (every match needs at least one)" % match_id
            )
        events.sort(key=lambda e: e.index)
        for pos, ev in enumerate(events):
            if ev.index != pos:
                raise DataFormatError(
                    "match %r: event indices not dense at position %d" % (match_id, pos)
                )
        matches.append(
            Match(
                match_id=match_id,
                events=events,
                attack_right_first=tuple(entry.get("attack_right_first", (True, False))),
                audio=entry.get("audio"),
            )
        )

    known_ids = {m.match_id for m in matches}
    extra = sorted(set(events_by_match) - known_ids)
    if extra:
        raise DataFormatError("events.jsonl has matches absent from manifest: %s" % extra)

    summaries: dict[str, Summary] = {}
    sdir = os.path.join(path, "summaries")
    if os.path.isdir(sdir):
        for name in sorted(os.listdir(sdir)):
            if not name.endswith(".json"):
                continue
            match_id = name[: -len(".json")]
            if match_id not in known_ids:
                raise DataFormatError("summary file for unknown match %r" % match_id)
            with open(os.path.join(sdir, name)) as fh:
                recs = json.load(fh)
            if not isinstance(recs, list):
                raise DataFormatError("summary %r: top level must be a JSON array" % name)
            actions = [
                Action(int(r["start_index"]), int(r["end_index"]), str(r["type"]))
                for r in recs
            ]
            summaries[match_id] = Summary(match_id=match_id, actions=actions)

    return Dataset(
        vocabulary=vocabulary,
        matches=matches,
        summaries=summaries,
        meta=manifest.get("meta", {}),
    )
