"""Boundary matching and precision / recall / F-measure scoring."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

DEFAULT_TOLERANCE = 5


class GroundTruthError(ValueError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    transitions: tuple[int, ...]
    total_frames: int

    def __post_init__(self):
        if self.total_frames < 1:
            raise GroundTruthError("total_frames must be positive")
        for t in self.transitions:
            if not isinstance(t, int) or isinstance(t, bool):
                raise GroundTruthError(f"transition {t!r} is not an integer frame index")
            if not 0 < t < self.total_frames:
                raise GroundTruthError(f"transition {t} outside (0, {self.total_frames})")
        if any(a >= b for a, b in zip(self.transitions, self.transitions[1:])):
            raise GroundTruthError("transitions must be strictly increasing")

    @classmethod
    def from_json(cls, payload: dict) -> "GroundTruth":
        try:
            return cls(tuple(payload["transitions"]), int(payload["total_frames"]))
        except (KeyError, TypeError) as exc:
            raise GroundTruthError(f"malformed boundary file: {exc}") from exc

    @classmethod
    def load(cls, path: str | os.PathLike) -> "GroundTruth":
        try:
            with open(path, encoding="utf-8") as fh:
                payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GroundTruthError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(payload, dict):
            raise GroundTruthError(f"{path}: expected a JSON object")
        return cls.from_json(payload)

    def to_json(self) -> dict:
        return {"total_frames": self.total_frames, "transitions": list(self.transitions)}


@dataclass(frozen=True)
class EvalReport:
    detected: int
    missed: int
    false_alarms: int
    precision: float
    recall: float
    f_measure: float

    def to_json(self) -> dict:
        return asdict(self)

    def rounded(self) -> tuple[float, float, float]:
        return round(self.precision, 2), round(self.recall, 2), round(self.f_measure, 2)


def match_boundaries(
    detected: Iterable[int], truth: Iterable[int], tolerance: int = DEFAULT_TOLERANCE
) -> tuple[int, int, int]:
    """Greedy one-to-one matching within +-tolerance frames.

    Detected boundaries are visited in increasing order; each claims the
    earliest still-unmatched truth boundary in its window. With equal-width
    windows on a line this greedy choice is a maximum matching, so the hit
    count does not depend on which list is called the truth.
    Returns ``(D, MD, FA)``.
    """
    det = sorted(detected)
    free = sorted(truth)
    hits = 0
    j = 0
    for d in det:
        # truth boundaries left behind the window can never match again
        while j < len(free) and free[j] < d - tolerance:
            j += 1
        if j < len(free) and free[j] <= d + tolerance:
            hits += 1
            j += 1
    return hits, len(free) - hits, len(det) - hits


def score(detected: int, missed: int, false_alarms: int) -> EvalReport:
    """Percent precision, recall and F-measure; any 0/0 is taken as 0."""
    if min(detected, missed, false_alarms) < 0:
        raise ValueError("counts must be non-negative")
    p = 100.0 * detected / (detected + false_alarms) if detected + false_alarms else 0.0
    r = 100.0 * detected / (detected + missed) if detected + missed else 0.0
    f = 2.0 * p * r / (p + r) if p + r else 0.0
    return EvalReport(detected, missed, false_alarms, p, r, f)


def evaluate(detected: Sequence[int], truth: GroundTruth, tolerance: int = DEFAULT_TOLERANCE) -> EvalReport:
    return score(*match_boundaries(detected, truth.transitions, tolerance))


def average(reports: Sequence[EvalReport]) -> tuple[float, float, float]:
    """Unweighted mean of per-video P, R and F."""
    n = len(reports)
    if not n:
        return 0.0, 0.0, 0.0
    return (
        sum(r.precision for r in reports) / n,
        sum(r.recall for r in reports) / n,
        sum(r.f_measure for r in reports) / n,
    )


def format_table(rows: Sequence[tuple[str, EvalReport]]) -> str:
    lines = [f"{'sequence':<16}{'D':>5}{'MD':>5}{'FA':>5}{'P %':>9}{'R %':>9}{'F %':>9}"]
    for name, r in rows:
        p, rc, f = r.rounded()
        lines.append(f"{name:<16}{r.detected:>5}{r.missed:>5}{r.false_alarms:>5}{p:>9.2f}{rc:>9.2f}{f:>9.2f}")
    return "\n".join(lines)
