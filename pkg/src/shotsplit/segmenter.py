"""Split-and-merge segmentation of a sequence of representative matrices.

A segment is split at the position maximising the Fisher criterion between
its two halves, but only if each half separates from the adjacent segment
strictly better than the whole segment did. Afterwards adjacent segments
are merged whenever merging does not lower the criterion against either
outer neighbour. Conditions that refer to a missing neighbour (sequence
ends) are waived.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fld import RIDGE, SegmentSummaries

logger = logging.getLogger(__name__)

MERGE_GUARD = 1000
LONE_PAIR_POLICIES = ("merge", "internal")


class SegmentationError(RuntimeError):
    pass


class MergeGuardError(SegmentationError):
    pass


@dataclass(frozen=True, order=True)
class Segment:
    start: int
    end: int

    def __len__(self) -> int:
        return self.end - self.start

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class Segmentation:
    segments: tuple[Segment, ...]
    total_frames: int

    def __post_init__(self):
        check_tiling(self.segments, self.total_frames)

    @property
    def transitions(self) -> list[int]:
        return [s.start for s in self.segments[1:]]

    def to_json(self) -> dict:
        return {
            "total_frames": self.total_frames,
            "shots": [{"start": s.start, "end": s.end} for s in self.segments],
            "transitions": self.transitions,
        }


@dataclass(frozen=True)
class SegmenterConfig:
    min_seg_len: int = 2
    ridge: float = RIDGE
    merge_guard: int = MERGE_GUARD
    # how to judge a pair with no outer neighbours: "merge" waives both
    # conditions; "internal" keeps the cut only if it beats the best split
    # found inside either member
    lone_pair: str = "merge"

    def __post_init__(self):
        if self.min_seg_len < 1:
            raise ValueError("min_seg_len must be >= 1")
        if self.lone_pair not in LONE_PAIR_POLICIES:
            raise ValueError(f"lone_pair must be one of {LONE_PAIR_POLICIES}")


def check_tiling(segments: Sequence[Segment], total: int) -> None:
    pos = 0
    for s in segments:
        if s.start != pos or s.end <= s.start:
            raise SegmentationError(f"segments do not tile [0, {total}): {list(segments)}")
        pos = s.end
    if pos != total:
        raise SegmentationError(f"segments do not tile [0, {total}): {list(segments)}")


class _Scorer:
    def __init__(self, rms, config: SegmenterConfig):
        if not isinstance(rms, SegmentSummaries):
            rms = SegmentSummaries([getattr(r, "rm", r) for r in rms])
        self.table = rms
        self.ridge = config.ridge

    def j(self, a: Segment, b: Segment) -> float:
        return self.table.criterion(a.span, b.span, self.ridge)


def best_split(segment: Segment, rms, min_seg_len: int = 2, *, _scorer: _Scorer | None = None) -> int | None:
    """Split position maximising J between the two halves; smallest on ties."""
    if len(segment) < 2 * min_seg_len:
        return None
    scorer = _scorer or _Scorer(rms, SegmenterConfig(min_seg_len=min_seg_len))
    best_p, best_j = None, -np.inf
    for p in range(segment.start + min_seg_len, segment.end - min_seg_len + 1):
        value = scorer.j(Segment(segment.start, p), Segment(p, segment.end))
        if value > best_j:
            best_p, best_j = p, value
    return best_p


def try_split(
    segment: Segment,
    left: Segment | None,
    right: Segment | None,
    rms,
    min_seg_len: int = 2,
    *,
    _scorer: _Scorer | None = None,
) -> tuple[bool, tuple[Segment, Segment] | None]:
    scorer = _scorer or _Scorer(rms, SegmenterConfig(min_seg_len=min_seg_len))
    p = best_split(segment, rms, min_seg_len, _scorer=scorer)
    if p is None:
        return False, None
    s1, s2 = Segment(segment.start, p), Segment(p, segment.end)
    ok_left = left is None or scorer.j(left, s1) > scorer.j(left, segment)
    ok_right = right is None or scorer.j(s2, right) > scorer.j(segment, right)
    return ok_left and ok_right, (s1, s2)


def split_phase(rms, config: SegmenterConfig = SegmenterConfig(), *, _scorer: _Scorer | None = None) -> Segmentation:
    """Recursive binary splitting, processed depth-first from the left."""
    total = len(rms)
    if total < config.min_seg_len:
        raise SegmentationError(f"video has {total} frames, fewer than min_seg_len={config.min_seg_len}")
    scorer = _scorer or _Scorer(rms, config)
    segments = [Segment(0, total)]
    final = [False]
    while True:
        try:
            i = final.index(False)
        except ValueError:
            break
        seg = segments[i]
        left = segments[i - 1] if i > 0 else None
        right = segments[i + 1] if i + 1 < len(segments) else None
        accepted, children = try_split(seg, left, right, rms, config.min_seg_len, _scorer=scorer)
        if accepted:
            segments[i:i + 1] = list(children)
            final[i:i + 1] = [False, False]
            check_tiling(segments, total)
        else:
            final[i] = True
    return Segmentation(tuple(segments), total)


def merge_phase(
    segmentation: Segmentation,
    rms,
    config: SegmenterConfig = SegmenterConfig(),
    *,
    _scorer: _Scorer | None = None,
) -> Segmentation:
    """Merge adjacent pairs until a full left-to-right sweep merges nothing."""
    scorer = _scorer or _Scorer(rms, config)
    segs = list(segmentation.segments)
    merges = 0
    changed = True
    while changed:
        changed = False
        i = 0
        while i + 1 < len(segs):
            a, b = segs[i], segs[i + 1]
            merged = Segment(a.start, b.end)
            left = segs[i - 1] if i > 0 else None
            right = segs[i + 2] if i + 2 < len(segs) else None
            if left is None and right is None and config.lone_pair == "internal":
                ok = scorer.j(a, b) <= _internal_j(a, b, config.min_seg_len, scorer)
            else:
                ok_left = left is None or scorer.j(left, a) <= scorer.j(left, merged)
                ok_right = right is None or scorer.j(b, right) <= scorer.j(merged, right)
                ok = ok_left and ok_right
            if ok:
                segs[i:i + 2] = [merged]
                merges += 1
                changed = True
                if merges > config.merge_guard:
                    raise MergeGuardError(f"more than {config.merge_guard} merges; giving up")
                check_tiling(segs, segmentation.total_frames)
                i = max(i - 1, 0)
            else:
                i += 1
    return Segmentation(tuple(segs), segmentation.total_frames)


def _internal_j(a: Segment, b: Segment, min_seg_len: int, scorer: _Scorer) -> float:
    best = 0.0
    for seg in (a, b):
        p = best_split(seg, None, min_seg_len, _scorer=scorer)
        if p is not None:
            best = max(best, scorer.j(Segment(seg.start, p), Segment(p, seg.end)))
    return best


def segment_sequence(rms, config: SegmenterConfig = SegmenterConfig()) -> Segmentation:
    scorer = _Scorer(rms, config)
    split = split_phase(rms, config, _scorer=scorer)
    logger.debug("split phase: %d segments", len(split.segments))
    return merge_phase(split, rms, config, _scorer=scorer)
