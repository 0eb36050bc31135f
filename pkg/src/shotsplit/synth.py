"""Procedural test videos with known shot boundaries.

A corpus spec is a JSON object (or a bare list of shots)::

    {"width": 256, "height": 256, "frame_rate": "25:1",
     "shots": [{"length": 50, "generator": "constant", "value": 32},
               {"length": 50, "generator": "checkerboard", "period": 8},
               {"length": 50, "generator": "noise", "seed": 7},
               {"length": 50, "generator": "gradient", "axis": "horizontal"}]}

Every frame of a shot is the same image, so the only content changes in the
video are the cuts between shots.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, BinaryIO

import numpy as np

from .linalg import make_rng


class SynthSpecError(ValueError):
    pass


@dataclass(frozen=True)
class ShotSpec:
    length: int
    generator: str
    params: dict[str, Any]


@dataclass(frozen=True)
class CorpusSpec:
    shots: tuple[ShotSpec, ...]
    width: int = 256
    height: int = 256
    frame_rate: Fraction = Fraction(25, 1)

    @property
    def total_frames(self) -> int:
        return sum(s.length for s in self.shots)

    @property
    def transitions(self) -> list[int]:
        out, pos = [], 0
        for shot in self.shots[:-1]:
            pos += shot.length
            out.append(pos)
        return out


def constant(h: int, w: int, value: int = 128) -> np.ndarray:
    if not 0 <= value <= 255:
        raise SynthSpecError(f"constant value {value} outside [0, 255]")
    return np.full((h, w), value, dtype=np.uint8)


def checkerboard(h: int, w: int, period: int = 8, low: int = 0, high: int = 255) -> np.ndarray:
    """Alternating squares of side ``period`` pixels."""
    if period < 1:
        raise SynthSpecError("checkerboard period must be >= 1")
    rows, cols = np.indices((h, w))
    cells = (rows // period + cols // period) % 2
    return np.where(cells == 1, high, low).astype(np.uint8)


def noise(h: int, w: int, seed: int = 0) -> np.ndarray:
    return make_rng(seed).integers(0, 256, size=(h, w), dtype=np.uint8)


def gradient(h: int, w: int, axis: str = "horizontal") -> np.ndarray:
    if axis not in ("horizontal", "vertical"):
        raise SynthSpecError(f"unknown gradient axis {axis!r}")
    n = w if axis == "horizontal" else h
    ramp = np.floor(np.arange(n) * 255.0 / max(n - 1, 1) + 0.5).astype(np.uint8)
    return np.broadcast_to(ramp[None, :] if axis == "horizontal" else ramp[:, None], (h, w)).copy()


GENERATORS = {
    "constant": constant,
    "checkerboard": checkerboard,
    "noise": noise,
    "gradient": gradient,
}


def parse_spec(payload: Any) -> CorpusSpec:
    if isinstance(payload, list):
        payload = {"shots": payload}
    if not isinstance(payload, dict):
        raise SynthSpecError("corpus spec must be a JSON object or list")
    raw_shots = payload.get("shots") or []
    if not raw_shots:
        raise SynthSpecError("corpus spec lists no shots")
    shots = []
    for item in raw_shots:
        item = dict(item)
        try:
            length = int(item.pop("length"))
            name = item.pop("generator")
        except KeyError as exc:
            raise SynthSpecError(f"shot entry missing {exc}") from None
        if length < 1:
            raise SynthSpecError("shot length must be >= 1")
        if name not in GENERATORS:
            raise SynthSpecError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
        shots.append(ShotSpec(length, name, item))
    rate = payload.get("frame_rate", "25:1")
    num, _, den = str(rate).partition(":")
    return CorpusSpec(
        tuple(shots),
        int(payload.get("width", 256)),
        int(payload.get("height", 256)),
        Fraction(int(num), int(den or 1)),
    )


def render_shot(spec: CorpusSpec, shot: ShotSpec) -> np.ndarray:
    try:
        return GENERATORS[shot.generator](spec.height, spec.width, **shot.params)
    except TypeError as exc:
        raise SynthSpecError(f"bad parameters for {shot.generator}: {exc}") from None


def render(spec: CorpusSpec) -> list[np.ndarray]:
    frames = []
    for shot in spec.shots:
        image = render_shot(spec, shot)
        frames.extend([image] * shot.length)
    return frames


def write_corpus(spec: CorpusSpec, stream: BinaryIO) -> dict:
    """Write the video as mono Y4M; returns the ground-truth payload."""
    from .ingest import write_y4m

    write_y4m(stream, render(spec), spec.frame_rate)
    return {"total_frames": spec.total_frames, "transitions": spec.transitions}
