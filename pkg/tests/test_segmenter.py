import json

import numpy as np
import pytest

from shotsplit.fld import criterion_J
from shotsplit.segmenter import (
    MergeGuardError,
    Segment,
    SegmentationError,
    Segmentation,
    SegmenterConfig,
    best_split,
    check_tiling,
    merge_phase,
    segment_sequence,
    split_phase,
    try_split,
)

PROTOS = [np.random.default_rng(0).normal(size=(6, 14)) + 3 * i for i in range(5)]


def sequence(lengths, ids, jitter=0.0, seed=1):
    """Stack of RMs: ``lengths[n]`` frames of prototype ``ids[n]``, optional noise."""
    rng = np.random.default_rng(seed)
    out = []
    for length, i in zip(lengths, ids):
        out += [PROTOS[i] + jitter * rng.normal(size=(6, 14)) for _ in range(length)]
    return np.array(out)


def tiles(total, *cuts):
    bounds = [0, *cuts, total]
    return Segmentation(tuple(Segment(a, b) for a, b in zip(bounds, bounds[1:])), total)


def test_best_split_two_shots_exhaustive():
    rms = sequence([20, 20], [0, 1])
    js = {p: criterion_J(rms[:p], rms[p:]).j for p in range(2, 39)}
    assert max(js, key=js.get) == 20
    assert best_split(Segment(0, 40), rms) == 20


def test_best_split_too_short():
    assert best_split(Segment(0, 3), sequence([3], [0]), 2) is None


def test_best_split_constant_picks_smallest():
    rms = sequence([12], [2])
    assert best_split(Segment(0, 12), rms, 2) == 2
    assert best_split(Segment(0, 12), rms, 3) == 3


def test_root_split_is_always_accepted():
    accepted, (s1, s2) = try_split(Segment(0, 10), None, None, sequence([10], [0]))
    assert accepted and s1 == Segment(0, 2) and s2 == Segment(2, 10)


def test_interior_of_constant_video_is_rejected():
    rms = sequence([30], [0])
    accepted, _ = try_split(Segment(10, 20), Segment(0, 10), Segment(20, 30), rms)
    assert not accepted


def test_segment_straddling_a_change_is_accepted():
    rms = sequence([20, 20, 20, 20], [0, 1, 2, 3], jitter=0.05)
    accepted, (s1, s2) = try_split(Segment(20, 60), Segment(0, 20), Segment(60, 80), rms)
    assert accepted and s1.end == 40


def test_split_phase_three_textures():
    seg = split_phase(sequence([50, 50, 50], [0, 1, 2], jitter=0.05))
    assert {50, 100} <= set(seg.transitions)


def test_split_phase_minimal_video():
    seg = split_phase(sequence([4], [0]), SegmenterConfig(min_seg_len=2))
    assert [s.span for s in seg.segments] == [(0, 2), (2, 4)]


def test_split_phase_too_short():
    with pytest.raises(SegmentationError):
        split_phase(sequence([1], [0]))


def test_constant_video_collapses_to_one_shot():
    rms = sequence([100], [1])
    assert len(split_phase(rms).segments) in (1, 2)
    seg = segment_sequence(rms)
    assert [s.span for s in seg.segments] == [(0, 100)]
    assert seg.transitions == []


def test_merge_lone_pair_of_constant_halves():
    rms = sequence([40], [0])
    assert merge_phase(tiles(40, 20), rms).transitions == []


def test_correct_three_way_split_survives_merging():
    rms = sequence([50, 50, 50], [0, 1, 2], jitter=0.05)
    assert merge_phase(tiles(150, 50, 100), rms).transitions == [50, 100]


def test_over_segmented_run_is_merged():
    rms = sequence([10, 10, 10, 10, 10], [0, 1, 2, 2, 3])
    assert merge_phase(tiles(50, 10, 20, 30, 40), rms).transitions == [10, 20, 40]


def test_end_to_end_three_static_textures():
    seg = segment_sequence(sequence([50, 50, 50], [0, 1, 2]))
    assert seg.transitions == [50, 100]


def test_end_to_end_jittered_textures_keep_true_cuts():
    # per-frame variation can leave extra short segments; the real cuts remain
    seg = segment_sequence(sequence([50, 50, 50], [0, 1, 2], jitter=0.05))
    assert {50, 100} <= set(seg.transitions)


def test_merge_is_idempotent():
    rms = sequence([30, 25, 35], [0, 3, 1], jitter=0.05, seed=9)
    once = segment_sequence(rms)
    twice = merge_phase(once, rms)
    assert once == twice


def test_segments_tile_and_respect_min_length():
    rms = sequence([15, 9, 21, 7], [4, 0, 2, 1], jitter=0.2, seed=3)
    for m in (1, 2, 3):
        seg = segment_sequence(rms, SegmenterConfig(min_seg_len=m))
        check_tiling(seg.segments, len(rms))
        assert all(len(s) >= m for s in seg.segments)


def test_deterministic():
    rms = sequence([20, 20, 20], [0, 1, 0], jitter=0.1, seed=4)
    assert segment_sequence(rms) == segment_sequence(rms)


def test_merge_guard():
    rms = sequence([40], [0])
    with pytest.raises(MergeGuardError):
        merge_phase(tiles(40, 20), rms, SegmenterConfig(merge_guard=0))


def test_lone_pair_policies_on_two_shots():
    rms = sequence([20, 20], [0, 1])
    assert segment_sequence(rms).transitions == []
    internal = segment_sequence(rms, SegmenterConfig(lone_pair="internal"))
    assert internal.transitions == [20]
    one = sequence([40], [0])
    assert segment_sequence(one, SegmenterConfig(lone_pair="internal")).transitions == []


def test_bad_tiling_is_rejected():
    with pytest.raises(SegmentationError):
        Segmentation((Segment(0, 5), Segment(6, 10)), 10)
    with pytest.raises(SegmentationError):
        Segmentation((Segment(0, 5),), 10)


def test_config_validation():
    with pytest.raises(ValueError):
        SegmenterConfig(min_seg_len=0)
    with pytest.raises(ValueError):
        SegmenterConfig(lone_pair="never")


def test_json_shape():
    payload = tiles(10, 4).to_json()
    assert payload == {
        "total_frames": 10,
        "shots": [{"start": 0, "end": 4}, {"start": 4, "end": 10}],
        "transitions": [4],
    }
    json.dumps(payload)
