"""Domain model: events, matches, actions, summaries.

An event is one annotated touch/decision in a match (pass, shot, foul, ...).
A match is a dense, chronologically ordered list of events plus an optional
audio track reference.  An action is a contiguous run of events; a summary is
a set of actions chosen to be shown to a viewer.
"""
from __future__ import annotations

from dataclasses import dataclass, field

# Default event-type vocabulary.  Datasets may carry their own vocabulary;
# everything downstream treats the vocabulary as opaque ordered names.
DEFAULT_EVENT_TYPES: tuple[str, ...] = (
    "pass",
    "tackle",
    "out",
    "interception",
    "shot",
    "goal-shot",
    "corner-shot",
    "save",
    "foul",
    "card",
    "free-kick",
    "kick-off",
    "substitution",
    "clearance",
    "start-period",
    "end-period",
    "other",
)

# The ten action categories a summary clip can be labeled with, ordered by
# priority: when an action contains events mapping to several categories the
# highest-priority one wins.
SUMMARY_ACTION_TYPES: tuple[str, ...] = (
    "goal",
    "var",
    "save",
    "shot",
    "free-kick",
    "corner",
    "foul",
    "start-period",
    "end-period",
    "other",
)

# event type -> summary action category (anything absent maps to "other")
_EVENT_TO_ACTION_TYPE: dict[str, str] = {
    "goal-shot": "goal",
    "var": "var",
    "save": "save",
    "shot": "shot",
    "free-kick": "free-kick",
    "corner-shot": "corner",
    "foul": "foul",
    "card": "foul",
    "start-period": "start-period",
    "end-period": "end-period",
}


class SoccersumError(Exception):
    """Base class for errors raised by this package."""


class VocabularyError(SoccersumError):
    """An event type is not part of the active vocabulary."""


class DataFormatError(SoccersumError):
    """A dataset file violates the documented schema."""


class ShapeError(SoccersumError):
    """Arrays passed to a model have inconsistent shapes."""


class TrainingError(SoccersumError):
    """Training cannot proceed (bad labels, non-finite gradients, ...)."""


class ConfigError(SoccersumError):
    """A configuration file or key is invalid."""


@dataclass(frozen=True)
class Event:
    """One annotated match event.

    Coordinates live on a 100x100 pitch with (0, 0) the bottom-left corner.
    ``team`` is 0 or 1, ``outcome`` is 1 for a successful event, ``qualifier``
    is a small opaque annotation code.
    """

    index: int
    t: float
    type: str
    team: int
    player: int
    sx: float
    sy: float
    ex: float
    ey: float
    outcome: int
    qualifier: int


@dataclass
class Match:
    """A match: dense ordered events plus audio/side information.

    ``attack_right_first`` says, per team, whether that team attacks the
    right-hand goal (x = 100) during the first period.  Directions swap each
    period.  ``audio`` is either None, a path string to a WAV/raw file, or a
    dict describing a synthesized track (see synth.resolve_audio).
    """

    match_id: str
    events: list[Event]
    attack_right_first: tuple[bool, bool] = (True, False)
    audio: object = None

    def type_sequence(self) -> tuple[str, ...]:
        return tuple(e.type for e in self.events)

    def n_periods_before(self, index: int) -> int:
        """Number of completed periods before event ``index``."""
        return sum(1 for e in self.events[:index] if e.type == "end-period")

    def attacks_right(self, index: int) -> bool:
        """Whether the team of event ``index`` attacks the right goal there."""
        ev = self.events[index]
        right_first = self.attack_right_first[ev.team]
        # direction flips after every completed period
        if self.n_periods_before(index) % 2 == 0:
            return right_first
        return not right_first


@dataclass(frozen=True)
class Action:
    """A contiguous run of events, [start_index, end_index] inclusive."""

    start_index: int
    end_index: int
    type: str = "other"

    def __post_init__(self):
        if self.end_index < self.start_index:
            raise ValueError(
                "action end_index %d < start_index %d"
                % (self.end_index, self.start_index)
            )

    def length(self) -> int:
        return self.end_index - self.start_index + 1

    def contains(self, index: int) -> bool:
        return self.start_index <= index <= self.end_index


@dataclass
class Summary:
    """A set of actions selected from one match, chronological order."""

    match_id: str
    actions: list[Action] = field(default_factory=list)

    def total_duration(self, match: Match, padding: "PaddingConfig") -> float:
        return sum(action_duration(a, match, padding) for a in self.actions)


@dataclass(frozen=True)
class PaddingConfig:
    """Seconds of context added around an action when cut into a clip."""

    pre: float = 5.0
    post: float = 10.0


def action_type(action: Action, match: Match) -> str:
    """Summary category of an action: highest-priority category among the
    categories its events map to; ``other`` when none maps."""
    present = set()
    for idx in range(action.start_index, action.end_index + 1):
        ev_type = match.events[idx].type
        mapped = _EVENT_TO_ACTION_TYPE.get(ev_type)
        if mapped is not None:
            present.add(mapped)
    for cat in SUMMARY_ACTION_TYPES:
        if cat in present:
            return cat
    return "other"


def action_duration(action: Action, match: Match, padding: PaddingConfig) -> float:
    """Clip length in seconds: event span plus pre/post context padding."""
    t0 = match.events[action.start_index].t
    t1 = match.events[action.end_index].t
    return (t1 - t0) + padding.pre + padding.post


@dataclass
class ValidationIssue:
    kind: str
    message: str
    index: int = -1


def validate_match(match: Match, vocabulary: tuple[str, ...] | list[str]) -> list[ValidationIssue]:
    """Check structural invariants of a match; returns found issues.

    Checked: at least one event, dense indices starting at 0, non-decreasing
    timestamps, coordinates within [0, 100], team in {0, 1}, outcome in
    {0, 1}, and all event types members of ``vocabulary``.
    """
    issues: list[ValidationIssue] = []
    vocab = set(vocabulary)
    if not match.events:
        issues.append(ValidationIssue("empty", "match %r has no events" % match.match_id))
        return issues
    prev_t = None
    for pos, ev in enumerate(match.events):
        if ev.index != pos:
            issues.append(
                ValidationIssue(
                    "index", "event at position %d has index %d" % (pos, ev.index), pos
                )
            )
        if prev_t is not None and ev.t < prev_t:
            issues.append(
                ValidationIssue(
                    "time",
                    "timestamp decreases at index %d (%.6f < %.6f)" % (pos, ev.t, prev_t),
                    pos,
                )
            )
        prev_t = ev.t
        if ev.type not in vocab:
            issues.append(
                ValidationIssue(
                    "type", "unknown event type %r at index %d" % (ev.type, pos), pos
                )
            )
        for name, val in (("sx", ev.sx), ("sy", ev.sy), ("ex", ev.ex), ("ey", ev.ey)):
            if not (0.0 <= val <= 100.0):
                issues.append(
                    ValidationIssue(
                        "coord",
                        "%s=%.6f outside [0, 100] at index %d" % (name, val, pos),
                        pos,
                    )
                )
        if ev.team not in (0, 1):
            issues.append(
                ValidationIssue("team", "team %r not in {0, 1} at index %d" % (ev.team, pos), pos)
            )
        if ev.outcome not in (0, 1):
            issues.append(
                ValidationIssue(
                    "outcome", "outcome %r not in {0, 1} at index %d" % (ev.outcome, pos), pos
                )
            )
    return issues
