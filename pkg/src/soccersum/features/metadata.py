"""Per-event metadata feature vectors.

Layout (width = 10 + |vocabulary| + Q):

    0..3   sx, sy, ex, ey scaled to [0, 1]
    4      seconds elapsed since the previous event (0 for the first)
    5..6   start/end distance to the attacking goal (pitch-diagonal scaled)
    7..8   start/end angle to the attacking goal, radians
    9      outcome flag
    10..   event-type one-hot over the vocabulary
    then   qualifier one-hot over the Q-1 most frequent codes + other bucket
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..core import Event, Match, VocabularyError


@dataclass(frozen=True)
class FieldConfig:
    """Pitch geometry; goals sit at mid-height on the left/right edges."""

    width: float = 100.0
    height: float = 100.0

    def goal_center(self, attacking_right: bool) -> tuple[float, float]:
        x = self.width if attacking_right else 0.0
        return (x, self.height / 2.0)


def geometry_to_goal(x: float, y: float, goal_x: float, goal_y: float,
                     scale: float = 100.0) -> tuple[float, float]:
    """Distance and angle from a pitch location to a goal center.

    Distance is Euclidean, divided by ``scale``.  Angle is
    atan2(lateral offset, longitudinal distance) in (-pi, pi]; a location
    straight in front of goal gives 0, level with the goal line gives
    +/- pi/2, and the goal center itself gives (0, 0).
    """
    dx = x - goal_x
    dy = y - goal_y
    dist = float(np.hypot(dx, dy)) / scale
    angle = float(np.arctan2(goal_y - y, abs(dx)))
    return dist, angle


class QualifierCodebook:
    """One-hot codebook over the most frequent qualifier codes.

    ``dims`` slots total: the dims-1 most frequent codes seen in training
    (ties broken toward the smaller code) plus a final catch-all bucket.
    """

    def __init__(self, codes: list[int], dims: int):
        self.dims = dims
        self.codes = list(codes)
        self._index = {c: i for i, c in enumerate(self.codes)}

    @classmethod
    def from_events(cls, events: list[Event], dims: int = 8) -> "QualifierCodebook":
        counts = Counter(e.qualifier for e in events)
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        keep = [code for code, _ in ranked[: dims - 1]]
        return cls(keep, dims)

    def encode(self, qualifier: int) -> int:
        return self._index.get(qualifier, self.dims - 1)

    def to_dict(self) -> dict:
        return {"dims": self.dims, "codes": self.codes}

    @classmethod
    def from_dict(cls, d: dict) -> "QualifierCodebook":
        return cls(d["codes"], d["dims"])


class MetadataEncoder:
    def __init__(self, vocabulary, codebook: QualifierCodebook,
                 field: FieldConfig = FieldConfig()):
        self.vocabulary = tuple(vocabulary)
        self._type_index = {t: i for i, t in enumerate(self.vocabulary)}
        self.codebook = codebook
        self.field = field
        self.width = 10 + len(self.vocabulary) + codebook.dims

    def feature_names(self) -> list[str]:
        names = [
            "sx", "sy", "ex", "ey", "time_elapsed",
            "start_dist", "end_dist", "start_angle", "end_angle", "outcome",
        ]
        names += ["type=%s" % t for t in self.vocabulary]
        names += ["qualifier=%d" % c for c in self.codebook.codes]
        names += ["qualifier=other"]
        return names

    def encode(self, match: Match, index: int) -> np.ndarray:
        ev = match.events[index]
        if ev.type not in self._type_index:
            raise VocabularyError("event type %r not in vocabulary" % ev.type)
        v = np.zeros(self.width)
        v[0] = ev.sx / self.field.width
        v[1] = ev.sy / self.field.height
        v[2] = ev.ex / self.field.width
        v[3] = ev.ey / self.field.height
        if index > 0:
            # log-squashed so the half-time gap stays a visible marker
            # without swamping the unit-scale features around it
            v[4] = float(np.log1p(ev.t - match.events[index - 1].t))
        gx, gy = self.field.goal_center(match.attacks_right(index))
        v[5], v[7] = geometry_to_goal(ev.sx, ev.sy, gx, gy)
        v[6], v[8] = geometry_to_goal(ev.ex, ev.ey, gx, gy)
        v[9] = float(ev.outcome)
        v[10 + self._type_index[ev.type]] = 1.0
        v[10 + len(self.vocabulary) + self.codebook.encode(ev.qualifier)] = 1.0
        return v

    def encode_match(self, match: Match) -> np.ndarray:
        out = np.zeros((len(match.events), self.width))
        for i in range(len(match.events)):
            out[i] = self.encode(match, i)
        return out
