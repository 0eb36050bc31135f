"""End-to-end shot detection: frames -> representative matrices -> shots."""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field, fields, replace
from typing import Any, Sequence

from .evaluation import DEFAULT_TOLERANCE
from .frame_repr import RepresentativeMatrix, frame_representatives
from .ingest import BLOCK_SIZE, FRAME_SIZE, GrayFrame
from .segmenter import SegmenterConfig, Segmentation, segment_sequence
from .texture import DEFAULT_ORIENTATIONS, TextureConfig, orientation_list

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class NoFramesError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    k: int = 6
    n_g: int = 8
    block_size: int = BLOCK_SIZE
    resize: int = FRAME_SIZE
    min_seg_len: int = 2
    seed: int = 42
    tolerance: int = DEFAULT_TOLERANCE
    orientations: tuple[int, ...] = DEFAULT_ORIENTATIONS
    workers: int = 1
    lone_pair: str = "merge"

    def __post_init__(self):
        if not 2 <= self.k <= 64:
            raise ConfigError(f"k must be in [2, 64], got {self.k}")
        if not 2 <= self.n_g <= 256:
            raise ConfigError(f"graylevels must be in [2, 256], got {self.n_g}")
        if self.block_size != BLOCK_SIZE or self.resize != FRAME_SIZE:
            raise ConfigError(f"only {FRAME_SIZE}x{FRAME_SIZE} frames with {BLOCK_SIZE}px blocks are supported")
        if self.min_seg_len < 1:
            raise ConfigError("min_seg_len must be >= 1")
        if self.tolerance < 0:
            raise ConfigError("tolerance must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.texture
            self.segmenter
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def texture(self) -> TextureConfig:
        return TextureConfig(self.n_g, tuple(self.orientations))

    @property
    def segmenter(self) -> SegmenterConfig:
        return SegmenterConfig(min_seg_len=self.min_seg_len, lone_pair=self.lone_pair)

    @classmethod
    def from_mapping(cls, values: dict[str, Any], base: "Config | None" = None) -> "Config":
        """Overlay ``values`` on ``base`` (or the defaults); unknown keys are an error."""
        aliases = {"graylevels": "n_g", "min-seg-len": "min_seg_len", "lone-pair": "lone_pair"}
        known = {f.name for f in fields(cls)}
        updates = {}
        for key, value in values.items():
            key = aliases.get(key, key)
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if value is None:
                continue
            if key == "orientations":
                value = orientation_list(value)
            elif key != "lone_pair":
                value = int(value)
            updates[key] = value
        return replace(base or cls(), **updates)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Config":
        try:
            with open(path, encoding="utf-8") as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_mapping(payload)


@dataclass
class DetectionResult:
    segmentation: Segmentation
    representatives: list[RepresentativeMatrix]
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def transitions(self) -> list[int]:
        return self.segmentation.transitions


def detect_shots(frames: Sequence[GrayFrame], config: Config = Config()) -> DetectionResult:
    frames = list(frames)
    if not frames:
        raise NoFramesError("no frames")
    if len(frames) < config.min_seg_len:
        raise NoFramesError(f"need at least {config.min_seg_len} frames, got {len(frames)}")
    timings = {}
    t0 = time.perf_counter()
    rms = frame_representatives(frames, config.k, config.seed, config.texture, config.workers)
    timings["representation"] = time.perf_counter() - t0
    t1 = time.perf_counter()
    seg = segment_sequence(rms, config.segmenter)
    timings["segmentation"] = time.perf_counter() - t1
    logger.info("%d frames -> %d shots", len(frames), len(seg.segments))
    return DetectionResult(seg, rms, timings)
