"""Dataset serialization: round trips, byte stability, schema errors."""
import json
import os

import pytest

from soccersum.core import Action, DataFormatError, Event, Match, Summary, VocabularyError
from soccersum.io import Dataset, load_dataset, save_dataset

VOCAB = ("pass", "shot", "goal-shot")


def _event(i, t, etype, **kw):
    base = dict(index=i, t=t, type=etype, team=0, player=3, sx=10.0, sy=20.0,
                ex=30.0, ey=40.0, outcome=1, qualifier=2)
    base.update(kw)
    return Event(**base)


def _dataset():
    m0 = Match(
        match_id="m000",
        events=[_event(0, 0.0, "pass"), _event(1, 1.5, "shot"),
                _event(2, 3.123456, "goal-shot", sx=99.5)],
        attack_right_first=(True, False),
        audio={"synth": {"rate": 8000, "gain": 3.0, "base_amp": 0.05,
                         "seed": [7, 2, 0], "duration": 10.0}},
    )
    m1 = Match(
        match_id="m001",
        events=[_event(0, 0.0, "pass", team=1), _event(1, 2.0, "pass")],
        attack_right_first=(False, True),
    )
    return Dataset(
        vocabulary=VOCAB,
        matches=[m0, m1],
        summaries={"m000": Summary("m000", [Action(1, 2, "goal")])},
        meta={"note": "fixture"},
    )


def test_round_trip_preserves_everything(tmp_path):
    ds = _dataset()
    save_dataset(ds, str(tmp_path / "d"))
    back = load_dataset(str(tmp_path / "d"))
    assert back.vocabulary == VOCAB
    assert back.match_ids() == ["m000", "m001"]
    assert back.meta == {"note": "fixture"}
    assert back.by_id("m000").events == ds.by_id("m000").events
    assert back.by_id("m001").attack_right_first == (False, True)
    assert back.by_id("m000").audio["synth"]["rate"] == 8000
    assert back.summaries["m000"].actions == [Action(1, 2, "goal")]


def test_save_is_byte_stable(tmp_path):
    ds = _dataset()
    save_dataset(ds, str(tmp_path / "a"))
    reloaded = load_dataset(str(tmp_path / "a"))
    save_dataset(reloaded, str(tmp_path / "b"))
    for name in ("dataset.json", "events.jsonl", os.path.join("summaries", "m000.json")):
        with open(tmp_path / "a" / name, "rb") as fh:
            first = fh.read()
        with open(tmp_path / "b" / name, "rb") as fh:
            second = fh.read()
        assert first == second, name


def test_numbers_round_to_six_decimals(tmp_path):
    m = Match(match_id="m0", events=[_event(0, 0.123456789, "pass", sx=1.00000049)])
    save_dataset(Dataset(vocabulary=VOCAB, matches=[m]), str(tmp_path / "d"))
    back = load_dataset(str(tmp_path / "d"))
    assert back.by_id("m0").events[0].t == 0.123457
    assert back.by_id("m0").events[0].sx == 1.0


def test_missing_manifest(tmp_path):
    with pytest.raises(DataFormatError, match="dataset.json"):
        load_dataset(str(tmp_path))


def _write_minimal(tmp_path, event_lines, manifest=None, summary=None):
    d = tmp_path / "d"
    d.mkdir(exist_ok=True)
    if manifest is None:
        manifest = {"vocabulary": list(VOCAB),
                    "matches": [{"match_id": "m0", "attack_right_first": [True, False],
                                 "audio": None}],
                    "meta": {}}
    (d / "dataset.json").write_text(json.dumps(manifest))
    (d / "events.jsonl").write_text("\n".join(event_lines) + "\n")
    if summary is not None:
        (d / "summaries").mkdir(exist_ok=True)
        name, payload = summary
        (d / "summaries" / name).write_text(json.dumps(payload))
    return str(d)


def _line(i, etype="pass", match_id="m0", drop=None):
    rec = {"match_id": match_id, "index": i, "t": float(i), "type": etype,
           "team": 0, "player": 1, "sx": 1.0, "sy": 2.0, "ex": 3.0, "ey": 4.0,
           "outcome": 1, "qualifier": 0}
    if drop:
        del rec[drop]
    return json.dumps(rec)


def test_corrupt_event_line(tmp_path):
    path = _write_minimal(tmp_path, [_line(0), "{not json"])
    with pytest.raises(DataFormatError, match="line 2"):
        load_dataset(path)


def test_missing_event_field(tmp_path):
    path = _write_minimal(tmp_path, [_line(0, drop="outcome")])
    with pytest.raises(DataFormatError, match="outcome"):
        load_dataset(path)


def test_unknown_event_type(tmp_path):
    path = _write_minimal(tmp_path, [_line(0, etype="header")])
    with pytest.raises(VocabularyError):
        load_dataset(path)
    # validation off lets it through
    ds = load_dataset(path, validate=False)
    assert ds.by_id("m0").events[0].type == "header"


def test_match_without_events(tmp_path):
    path = _write_minimal(tmp_path, [_line(0, match_id="elsewhere")])
    with pytest.raises(DataFormatError):
        load_dataset(path)


def test_non_dense_indices(tmp_path):
    path = _write_minimal(tmp_path, [_line(0), _line(2)])
    with pytest.raises(DataFormatError, match="not dense"):
        load_dataset(path)


def test_events_for_unlisted_match(tmp_path):
    path = _write_minimal(tmp_path, [_line(0), _line(0, match_id="ghost")])
    with pytest.raises(DataFormatError, match="ghost"):
        load_dataset(path)


def test_summary_for_unknown_match(tmp_path):
    path = _write_minimal(tmp_path, [_line(0)],
                          summary=("ghost.json", [{"start_index": 0, "end_index": 0,
                                                   "type": "goal"}]))
    with pytest.raises(DataFormatError, match="ghost"):
        load_dataset(path)


def test_summary_must_be_an_array(tmp_path):
    path = _write_minimal(tmp_path, [_line(0)],
                          summary=("m0.json", {"start_index": 0}))
    with pytest.raises(DataFormatError, match="array"):
        load_dataset(path)
