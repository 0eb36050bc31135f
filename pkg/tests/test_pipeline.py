import io

import numpy as np
import pytest

from shotsplit.ingest import GrayFrame, iter_y4m, resize_bilinear
from shotsplit.pipeline import Config, ConfigError, NoFramesError, detect_shots
from shotsplit.synth import SynthSpecError, checkerboard, constant, gradient, noise, parse_spec, render, write_corpus


def frames_for(shots):
    spec = parse_spec(shots)
    return [GrayFrame(i, resize_bilinear(px)) for i, px in enumerate(render(spec))]


TWO_SHOTS = [
    {"length": 20, "generator": "constant", "value": 40},
    {"length": 20, "generator": "checkerboard", "period": 8},
]


def test_constant_video_has_no_transitions():
    result = detect_shots(frames_for([{"length": 100, "generator": "constant", "value": 77}]))
    assert result.transitions == []
    assert len(result.representatives) == 100


def test_three_textures_with_gradient():
    shots = [
        {"length": 30, "generator": "gradient", "axis": "horizontal"},
        {"length": 30, "generator": "noise", "seed": 3},
        {"length": 30, "generator": "checkerboard", "period": 4},
    ]
    assert detect_shots(frames_for(shots)).transitions == [30, 60]


@pytest.mark.xfail(
    strict=True,
    reason="with the default lone-pair rule the last two segments always merge, so a 2-shot video collapses",
)
def test_two_shots_default_rule():
    assert detect_shots(frames_for(TWO_SHOTS)).transitions == [20]


def test_two_shots_internal_rule():
    assert detect_shots(frames_for(TWO_SHOTS), Config(lone_pair="internal")).transitions == [20]


def test_workers_do_not_change_the_result():
    shots = [
        {"length": 8, "generator": "noise", "seed": 1},
        {"length": 8, "generator": "checkerboard", "period": 2},
        {"length": 8, "generator": "constant", "value": 0},
    ]
    frames = frames_for(shots)
    a = detect_shots(frames, Config(workers=1))
    b = detect_shots(frames, Config(workers=3))
    assert a.segmentation == b.segmentation
    for x, y in zip(a.representatives, b.representatives):
        np.testing.assert_array_equal(x.rm, y.rm)


def test_no_frames():
    with pytest.raises(NoFramesError):
        detect_shots([])


def test_fewer_frames_than_min_len():
    with pytest.raises(NoFramesError):
        detect_shots(frames_for([{"length": 2, "generator": "constant"}]), Config(min_seg_len=3))


@pytest.mark.parametrize(
    "bad",
    [dict(k=1), dict(k=65), dict(n_g=1), dict(block_size=16), dict(min_seg_len=0),
     dict(tolerance=-1), dict(workers=0), dict(orientations=(10,)), dict(lone_pair="x")],
)
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        Config(**bad)


def test_config_from_mapping():
    cfg = Config.from_mapping({"graylevels": 16, "orientations": "0,90", "k": None})
    assert (cfg.n_g, cfg.orientations, cfg.k) == (16, (0, 90), 6)
    with pytest.raises(ConfigError):
        Config.from_mapping({"nope": 1})


def test_generators():
    assert np.all(constant(4, 4, 9) == 9)
    board = checkerboard(16, 16, period=8, low=1, high=2)
    assert board[0, 0] == 1 and board[0, 8] == 2 and board[8, 8] == 1
    np.testing.assert_array_equal(noise(8, 8, seed=3), noise(8, 8, seed=3))
    assert not np.array_equal(noise(8, 8, seed=3), noise(8, 8, seed=4))
    ramp = gradient(4, 256)
    assert ramp[0, 0] == 0 and ramp[0, 255] == 255 and np.all(ramp == ramp[0])
    assert np.all(gradient(256, 4, "vertical")[:, 0] == ramp[0])


@pytest.mark.parametrize(
    "spec",
    [[], {"shots": []}, [{"generator": "constant"}], [{"length": 0, "generator": "constant"}],
     [{"length": 3, "generator": "plasma"}], [{"length": 3, "generator": "constant", "value": 300}],
     [{"length": 3, "generator": "constant", "colour": 3}], "shots"],
)
def test_bad_specs(spec):
    with pytest.raises(SynthSpecError):
        render(parse_spec(spec))


def test_write_corpus_round_trip():
    spec = parse_spec({"width": 40, "height": 24, "frame_rate": "30000:1001",
                       "shots": [{"length": 3, "generator": "noise", "seed": 2},
                                 {"length": 2, "generator": "gradient", "axis": "vertical"}]})
    buf = io.BytesIO()
    truth = write_corpus(spec, buf)
    assert truth == {"total_frames": 5, "transitions": [3]}
    frames = list(iter_y4m(io.BytesIO(buf.getvalue())))
    assert len(frames) == 5
    np.testing.assert_array_equal(frames[0].pixels, resize_bilinear(noise(24, 40, seed=2)))
