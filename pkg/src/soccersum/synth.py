"""Synthetic match generator.

Produces event streams with the statistics the pipeline is built for: a long
background of routine play, planted action instances drawn from a library of
type-sequence templates, a ground-truth summary filling a sampled duration
budget, and an audio track whose crowd noise surges after summary-action
events.

Templates are (context, core) pairs; families share cores and nest their
contexts, so one planted instance usually contains shorter library sequences
as sub-runs (the same intra-category overlap seen in real annotated data).
Perturbation noise (an inserted background event or a swapped pair) is
confined to the context zone, leaving the decisive core intact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_EVENT_TYPES,
    Action,
    Event,
    Match,
    PaddingConfig,
    SoccersumError,
    Summary,
    action_duration,
    action_type,
)
from .features.audio import load_audio
from .io import Dataset


class GenerationError(SoccersumError):
    """The generator cannot satisfy its configuration."""


@dataclass
class GenConfig:
    matches: int = 60
    events_mean: int = 1500
    events_sd_frac: float = 0.06
    budget_min: float = 110.0
    budget_max: float = 270.0
    audio_rate: int = 8000
    audio_gain: float = 3.0
    audio_base_amp: float = 0.05
    noise_insert: float = 0.08
    noise_swap: float = 0.02
    goals_min: int = 1
    goals_max: int = 3
    pad_pre: float = 5.0
    pad_post: float = 10.0
    min_gap_events: int = 20

    def padding(self) -> PaddingConfig:
        return PaddingConfig(self.pad_pre, self.pad_post)


def _suffix_contexts(prefix: tuple[str, ...], lengths: tuple[int, ...]) -> list[tuple[str, ...]]:
    return [prefix[len(prefix) - n :] if n else () for n in lengths]


# Template library: family -> (list of contexts, core).  A planted instance
# is build-up context + decisive core.  Context variants are suffixes of one
# fixed build-up string per family, so a long-context instance also contains
# every shorter variant as a trailing sub-sequence ending at the same core.
# Contexts use only ordinary play types: by type alone the build-up looks
# like background, and only its style (possession, rhythm, drift toward the
# goal) marks it as part of an action.
FAMILY_LIBRARY: dict[str, tuple[list[tuple[str, ...]], tuple[str, ...]]] = {
    "goal": (
        _suffix_contexts(
            ("pass", "tackle", "pass", "interception", "pass", "pass", "tackle",
             "pass", "pass"),
            (6, 7, 8, 9)),
        ("pass", "shot", "goal-shot"),
    ),
    "save": (
        _suffix_contexts(
            ("interception", "pass", "pass", "tackle", "pass", "interception",
             "pass", "pass"),
            (6, 7, 8)),
        ("shot", "save"),
    ),
    "shot": (
        _suffix_contexts(
            ("tackle", "pass", "pass", "interception", "pass", "tackle", "pass"),
            (6, 7)),
        ("shot", "out"),
    ),
    "corner": (
        _suffix_contexts(
            ("pass", "interception", "pass", "pass", "tackle", "pass", "out"),
            (6, 7)),
        ("corner-shot", "clearance"),
    ),
    "free-kick": (
        _suffix_contexts(
            ("pass", "pass", "interception", "pass", "pass", "tackle", "foul"),
            (6, 7)),
        ("free-kick", "pass"),
    ),
    "foul": (
        _suffix_contexts(
            ("pass", "interception", "pass", "pass", "tackle", "pass", "pass"),
            (6, 7)),
        ("foul", "card"),
    ),
}

OPEN_TEMPLATE = ("start-period", "kick-off", "pass", "pass", "tackle", "pass",
                 "interception", "pass", "tackle", "pass")
CLOSE_TEMPLATE = ("pass", "interception", "pass", "pass", "tackle", "pass",
                  "interception", "pass", "pass", "end-period")

# event types the background process emits (never the decisive ones above)
_BG_TYPES = ("pass", "tackle", "interception", "out", "clearance", "substitution", "other")
_BG_WEIGHTS = (0.55, 0.12, 0.10, 0.08, 0.08, 0.02, 0.05)
_NOISE_TYPES = ("pass", "tackle", "interception", "clearance")

_BG_SHOT_P = 0.004  # routine long-range attempts outside planted actions


@dataclass
class Planted:
    family: str
    start: int
    end: int
    core_start: int
    in_summary: bool
    noised: bool


def _background_type(rng: np.random.Generator, prev: str) -> str:
    if prev == "shot":
        return str(rng.choice(("save", "out", "clearance"), p=(0.3, 0.35, 0.35)))
    if rng.uniform() < _BG_SHOT_P:
        return "shot"
    return str(rng.choice(_BG_TYPES, p=_BG_WEIGHTS))


_MIN_CONTEXT = 6


def _instance_sequence(family: str, rng: np.random.Generator,
                       cfg: GenConfig) -> tuple[list[str], int, bool]:
    """One planted instance: (type sequence, context length, noised flag).

    Noise only ever touches the front of the build-up context, never the
    core or the last few context events, so the shortest library variant
    of every planted action stays intact."""
    contexts, core = FAMILY_LIBRARY[family]
    ctx = list(contexts[int(rng.integers(len(contexts)))])
    noised = False
    safe = len(ctx) - _MIN_CONTEXT
    if safe >= 2 and rng.uniform() < cfg.noise_swap:
        pos = int(rng.integers(safe - 1))
        ctx[pos], ctx[pos + 1] = ctx[pos + 1], ctx[pos]
        noised = True
    if safe >= 0 and rng.uniform() < cfg.noise_insert:
        pos = int(rng.integers(safe + 1))
        ctx.insert(pos, str(rng.choice(_NOISE_TYPES)))
        noised = True
    return ctx + list(core), len(ctx), noised


def _gap_sizes(total: int, n_gaps: int, min_gap: int, rng: np.random.Generator) -> list[int]:
    base = min(min_gap, max(1, total // max(n_gaps, 1)))
    extra = max(0, total - base * n_gaps)
    if n_gaps == 0:
        return []
    shares = rng.multinomial(extra, np.full(n_gaps, 1.0 / n_gaps))
    return [base + int(s) for s in shares]


def generate_match(cfg: GenConfig, seed: int, ordinal: int):
    """Build one match; returns (Match, Summary, [Planted])."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1, ordinal]))
    match_id = "m%03d" % ordinal

    n_target = int(round(rng.normal(cfg.events_mean, cfg.events_mean * cfg.events_sd_frac)))

    # planted instance plan: family name per instance, halves assigned at random
    plan: list[str] = []
    plan += ["goal"] * int(rng.integers(cfg.goals_min, cfg.goals_max + 1))
    plan += ["save"] * int(rng.integers(2, 4))
    plan += ["shot"] * int(rng.integers(2, 4))
    plan += ["corner"] * int(rng.integers(1, 3))
    plan += ["free-kick"] * int(rng.integers(1, 3))
    plan += ["foul"] * int(rng.integers(1, 3))
    halves = [int(rng.integers(2)) for _ in plan]
    order = rng.permutation(len(plan))
    per_half: list[list[str]] = [[], []]
    for i in order:
        per_half[halves[i]].append(plan[i])

    segments: list[list[tuple[list[str], str, int, bool]]] = [[], []]
    for h in (0, 1):
        for fam in per_half[h]:
            seq, ctx_len, noised = _instance_sequence(fam, rng, cfg)
            segments[h].append((seq, fam, ctx_len, noised))

    planted_event_total = (
        sum(len(seq) for seg in segments for seq, *_ in seg)
        + len(OPEN_TEMPLATE) * 2
        + len(CLOSE_TEMPLATE) * 2
    )
    n_bg = max(n_target - planted_event_total,
               (len(plan) + 4) * cfg.min_gap_events)
    bg_half = [n_bg // 2, n_bg - n_bg // 2]

    # stitch: open, (gap, instance)*, gap, half-close | half-open, ..., close
    stream: list[tuple[str, int]] = []  # (type, planted_instance_id or -1)
    planted: list[Planted] = []
    prev_bg = "pass"

    def emit_background(count: int):
        nonlocal prev_bg
        for _ in range(count):
            t = _background_type(rng, prev_bg)
            stream.append((t, -1))
            prev_bg = t

    def emit_instance(seq: list[str], fam: str, ctx_len: int, noised: bool):
        start = len(stream)
        for t in seq:
            stream.append((t, len(planted)))
        planted.append(Planted(fam, start, len(stream) - 1, start + ctx_len, False, noised))

    emit_instance(list(OPEN_TEMPLATE), "start-period", len(OPEN_TEMPLATE), False)
    for h in (0, 1):
        gaps = _gap_sizes(bg_half[h], len(segments[h]) + 1, cfg.min_gap_events, rng)
        for gi, item in enumerate(segments[h]):
            emit_background(gaps[gi])
            emit_instance(item[0], item[1], item[2], item[3])
        emit_background(gaps[len(segments[h])] if gaps else cfg.min_gap_events)
        emit_instance(list(CLOSE_TEMPLATE), "end-period", len(CLOSE_TEMPLATE), False)
        if h == 0:
            emit_background(cfg.min_gap_events)
            emit_instance(list(OPEN_TEMPLATE), "start-period", len(OPEN_TEMPLATE), False)

    # timestamps: quick touches through decisive cores, brisk sustained
    # rhythm through build-up contexts and the period open/close patterns,
    # slower irregular background play elsewhere, one long jump at half time
    half_open_start = None
    for p in planted:
        if p.family == "start-period" and p.start > 0:
            half_open_start = p.start
    times = np.zeros(len(stream))
    t = 0.0
    quick = set()
    ctx_pos = set()
    for p in planted:
        ctx_pos.update(range(p.start + 1, p.core_start))
        quick.update(range(max(p.core_start, p.start + 1), p.end + 1))
    for i in range(len(stream)):
        if i == 0:
            t = 0.0
        elif half_open_start is not None and i == half_open_start:
            t += rng.uniform(600.0, 1000.0)
        elif i in quick:
            t += rng.uniform(0.8, 2.5)
        elif i in ctx_pos:
            t += rng.uniform(1.1, 2.3)
        else:
            t += min(max(rng.exponential(3.5), 0.4), 15.0)
        times[i] = round(t, 6)

    # teams, locations, outcomes, qualifiers
    qual_codes = np.arange(12)
    qual_p = 1.0 / (qual_codes + 1.0)
    qual_p /= qual_p.sum()
    inst_team = {pid: int(rng.integers(2)) for pid in range(len(planted))}

    events: list[Event] = []
    walk_x, walk_y = 50.0, 50.0
    drift = (0.0, 0.0, 0.0, 0.0, 1)  # anchor x/y, target x/y, context length
    n_period_ends = 0

    def _clip_field(v):
        return float(np.clip(v, 0.0, 100.0))

    for i, (etype, pid) in enumerate(stream):
        p = planted[pid] if pid >= 0 else None
        if p is not None:
            team = inst_team[pid]
        else:
            team = int(rng.integers(2))
        attacking_right = (team == 0) == (n_period_ends % 2 == 0)
        gx = 100.0 if attacking_right else 0.0
        toward = -1.0 if attacking_right else 1.0
        if p is not None and i == p.start and p.core_start > p.start:
            # build-up begins: carry the ball from wherever play was toward
            # the edge of the attacking box
            tx = _clip_field(gx + toward * rng.uniform(12.0, 24.0))
            drift = (walk_x, walk_y, tx, rng.uniform(32.0, 68.0),
                     p.core_start - p.start)
        if p is not None and i < p.core_start:
            ax, ay, tx, ty, clen = drift
            f0 = (i - p.start + 1.0) / (clen + 1.0)
            f1 = (i - p.start + 2.0) / (clen + 1.0)
            sx = _clip_field(ax + f0 * (tx - ax) + rng.normal(0.0, 2.0))
            sy = _clip_field(ay + f0 * (ty - ay) + rng.normal(0.0, 2.0))
            ex = _clip_field(ax + f1 * (tx - ax) + rng.normal(0.0, 2.0))
            ey = _clip_field(ay + f1 * (ty - ay) + rng.normal(0.0, 2.0))
        elif p is not None and p.family in ("goal", "save", "shot", "corner"):
            sx = _clip_field(gx + toward * rng.uniform(2.0, 30.0))
            sy = float(rng.uniform(25.0, 75.0))
            ex = _clip_field(gx + toward * rng.uniform(0.5, 25.0))
            ey = float(rng.uniform(30.0, 70.0))
        elif p is not None and p.family in ("foul", "free-kick"):
            sx = _clip_field(gx + toward * rng.uniform(8.0, 40.0))
            sy = float(rng.uniform(20.0, 80.0))
            ex = _clip_field(gx + toward * rng.uniform(5.0, 35.0))
            ey = float(rng.uniform(20.0, 80.0))
        else:
            walk_x = float(np.clip(walk_x + rng.normal(0.0, 8.0), 0.0, 100.0))
            walk_y = float(np.clip(walk_y + rng.normal(0.0, 8.0), 0.0, 100.0))
            sx, sy = walk_x, walk_y
            ex = float(np.clip(walk_x + rng.normal(0.0, 6.0), 0.0, 100.0))
            ey = float(np.clip(walk_y + rng.normal(0.0, 6.0), 0.0, 100.0))
        if etype == "goal-shot":
            outcome = 1
        elif etype in ("out", "foul", "card"):
            outcome = 0
        else:
            outcome = int(rng.uniform() < 0.8)
        events.append(Event(
            index=i, t=float(times[i]), type=etype, team=team,
            player=int(rng.integers(1, 23)),
            sx=round(sx, 6), sy=round(sy, 6), ex=round(ex, 6), ey=round(ey, 6),
            outcome=outcome, qualifier=int(rng.choice(qual_codes, p=qual_p)),
        ))
        if etype == "end-period":
            n_period_ends += 1

    match = Match(match_id=match_id, events=events,
                  attack_right_first=(True, False), audio=None)

    # ground-truth summary: match open/close and every goal are mandatory,
    # then shuffled others fill the sampled duration budget
    budget = float(rng.uniform(cfg.budget_min, cfg.budget_max))
    padding = cfg.padding()
    open_close = [0, len(planted) - 1]
    mandatory = set(open_close)
    for pid, p in enumerate(planted):
        if p.family == "goal":
            mandatory.add(pid)
    chosen = set(mandatory)
    total = 0.0
    for pid in chosen:
        p = planted[pid]
        total += action_duration(Action(p.start, p.end), match, padding)
    optional = [pid for pid in range(len(planted)) if pid not in chosen]
    for pid in rng.permutation(len(optional)):
        p = planted[optional[pid]]
        d = action_duration(Action(p.start, p.end), match, padding)
        if total + d <= budget:
            chosen.add(optional[pid])
            total += d
    if total < budget - 40.0 and len(chosen) == len(planted):
        raise GenerationError(
            "summary budget %.1fs unfillable: all %d planted actions total %.1fs"
            % (budget, len(planted), total)
        )

    gt_actions = []
    for pid in sorted(chosen, key=lambda q: planted[q].start):
        p = planted[pid]
        p.in_summary = True
        act = Action(p.start, p.end)
        gt_actions.append(Action(p.start, p.end, action_type(act, match)))
    summary = Summary(match_id=match_id, actions=gt_actions)

    match.audio = {
        "synth": {
            "rate": cfg.audio_rate,
            "gain": cfg.audio_gain,
            "base_amp": cfg.audio_base_amp,
            "seed": [seed, 2, ordinal],
            "duration": round(float(times[-1]) + 2.0, 6),
        }
    }
    return match, summary, planted


def synth_audio_track(spec: dict, burst_times: list[float]) -> tuple[np.ndarray, int]:
    """Render a crowd-noise track from a manifest spec.

    Baseline Gaussian noise at ``base_amp``; every burst time adds noise of
    ``base_amp * gain`` std over the following 2 seconds.
    """
    fs = int(spec["rate"])
    n = int(round(float(spec["duration"]) * fs))
    rng = np.random.default_rng(np.random.SeedSequence(list(spec["seed"])))
    track = rng.normal(0.0, spec["base_amp"], size=n).astype(np.float32)
    gain = float(spec["gain"])
    if gain > 0:
        amp = spec["base_amp"] * gain
        for t in sorted(burst_times):
            a = int(round(t * fs))
            b = min(a + 2 * fs, n)
            if a >= n:
                continue
            track[a:b] += rng.normal(0.0, amp, size=b - a).astype(np.float32)
    return track, fs


def summary_event_times(match: Match, summary: Summary) -> list[float]:
    times = []
    for act in summary.actions:
        for i in range(act.start_index, act.end_index + 1):
            times.append(match.events[i].t)
    return times


def resolve_audio(dataset: Dataset, match_id: str) -> tuple[np.ndarray, int]:
    """Samples and rate for a match: load from file or re-render a synth spec."""
    match = dataset.by_id(match_id)
    audio = match.audio
    if audio is None:
        raise SoccersumError("match %r has no audio reference" % match_id)
    if isinstance(audio, str):
        return load_audio(audio)
    if isinstance(audio, dict) and "file" in audio:
        return load_audio(audio["file"], audio.get("rate"))
    if isinstance(audio, dict) and "synth" in audio:
        summary = dataset.summaries.get(match_id)
        bursts = summary_event_times(match, summary) if summary else []
        return synth_audio_track(audio["synth"], bursts)
    raise SoccersumError("unrecognized audio reference %r" % (audio,))


def generate_dataset(cfg: GenConfig, seed: int) -> Dataset:
    """Generate a full dataset (no audio rendered; tracks re-render on
    demand from the manifest spec)."""
    matches: list[Match] = []
    summaries = {}
    for ordinal in range(cfg.matches):
        match, summary, _ = generate_match(cfg, seed, ordinal)
        matches.append(match)
        summaries[match.match_id] = summary
    return Dataset(
        vocabulary=DEFAULT_EVENT_TYPES,
        matches=matches,
        summaries=summaries,
        meta={"generator": {"seed": seed, "matches": cfg.matches,
                            "events_mean": cfg.events_mean,
                            "audio_rate": cfg.audio_rate,
                            "audio_gain": cfg.audio_gain}},
    )
