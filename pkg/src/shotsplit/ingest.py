"""Decoding of raw video input into 256x256 grayscale frames.

Two sources are supported: YUV4MPEG2 streams (only the luma plane is kept)
and image sequences (binary PGM or 8-bit PNG, ordered by file name).
"""

from __future__ import annotations

import enum
import glob
import io
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import BinaryIO, Iterator, Sequence

import numpy as np

FRAME_SIZE = 256
BLOCK_SIZE = 32
BLOCKS_PER_SIDE = FRAME_SIZE // BLOCK_SIZE

Y4M_SIGNATURE = b"YUV4MPEG2"
_FRAME_TAG = b"FRAME"
_MAX_LINE = 4096


class IngestError(ValueError):
    """Base class for every input decoding failure."""


class SignatureError(IngestError):
    pass


class MissingParameterError(IngestError):
    pass


class UnknownParameterError(IngestError):
    pass


class UnsupportedChromaError(IngestError):
    pass


class FrameMarkerError(IngestError):
    pass


class TruncatedFrameError(IngestError):
    pass


class UnreadableImageError(IngestError):
    pass


class UnsupportedBitDepthError(IngestError):
    pass


class ChromaMode(enum.Enum):
    C420 = "420"
    C422 = "422"
    C444 = "444"
    MONO = "mono"


_CHROMA_TAGS = {
    "420": ChromaMode.C420,
    "420jpeg": ChromaMode.C420,
    "420paldv": ChromaMode.C420,
    "420mpeg2": ChromaMode.C420,
    "422": ChromaMode.C422,
    "444": ChromaMode.C444,
    "mono": ChromaMode.MONO,
}


@dataclass(frozen=True)
class StreamInfo:
    width: int
    height: int
    frame_rate: Fraction
    chroma_mode: ChromaMode = ChromaMode.C420
    frame_count: int | None = None
    interlacing: str = "p"
    aspect: str = "0:0"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise IngestError(f"invalid frame size {self.width}x{self.height}")
        if self.frame_rate <= 0:
            raise IngestError(f"invalid frame rate {self.frame_rate}")

    @property
    def luma_size(self) -> int:
        return self.width * self.height

    @property
    def chroma_size(self) -> int:
        """Bytes occupied by both chroma planes of one frame."""
        cw = (self.width + 1) // 2
        ch = (self.height + 1) // 2
        if self.chroma_mode is ChromaMode.C420:
            return 2 * cw * ch
        if self.chroma_mode is ChromaMode.C422:
            return 2 * cw * self.height
        if self.chroma_mode is ChromaMode.C444:
            return 2 * self.width * self.height
        return 0


@dataclass(frozen=True)
class GrayFrame:
    index: int
    pixels: np.ndarray  # (256, 256) uint8, read-only

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("frame index must be non-negative")
        px = np.asarray(self.pixels)
        if px.shape != (FRAME_SIZE, FRAME_SIZE):
            raise ValueError(f"frame must be {FRAME_SIZE}x{FRAME_SIZE}, got {px.shape}")
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise ValueError("pixel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)


@dataclass(frozen=True)
class Block:
    frame_index: int
    block_row: int
    block_col: int
    pixels: np.ndarray  # (32, 32) view into the frame


def _round_half_away(values: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def resize_bilinear(grid: np.ndarray, size: int = FRAME_SIZE) -> np.ndarray:
    """Bilinear resample of an HxW grid to ``size`` x ``size`` uint8.

    Pixel centres are aligned (``src = (dst + 0.5) * S / size - 0.5``) and
    source coordinates are clamped to the image edge.
    """
    src = np.asarray(grid, dtype=float)
    if src.ndim != 2 or src.shape[0] < 1 or src.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D grid, got shape {src.shape}")
    h, w = src.shape
    if (h, w) == (size, size):
        return np.clip(_round_half_away(src), 0, 255).astype(np.uint8)

    def axis(n_src):
        pos = (np.arange(size) + 0.5) * n_src / size - 0.5
        pos = np.clip(pos, 0.0, n_src - 1)
        lo = np.floor(pos).astype(int)
        hi = np.minimum(lo + 1, n_src - 1)
        return lo, hi, pos - lo

    y0, y1, fy = axis(h)
    x0, x1, fx = axis(w)
    top = src[y0][:, x0] * (1.0 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1.0 - fx) + src[y1][:, x1] * fx
    out = top * (1.0 - fy)[:, None] + bottom * fy[:, None]
    return np.clip(_round_half_away(out), 0, 255).astype(np.uint8)


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded half away from zero; exact integer arithmetic."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[-1] != 3:
        raise ValueError(f"expected an (H, W, 3) array, got shape {rgb.shape}")
    c = rgb.astype(np.int64)
    milli = 299 * c[..., 0] + 587 * c[..., 1] + 114 * c[..., 2]
    return np.clip((milli + 500) // 1000, 0, 255).astype(np.uint8)


def partition_blocks(frame: GrayFrame) -> list[Block]:
    """Split a frame into its 64 32x32 blocks in row-major order."""
    px = frame.pixels
    if px.shape != (FRAME_SIZE, FRAME_SIZE):
        raise ValueError("frame must be 256x256")
    blocks = []
    for i in range(BLOCKS_PER_SIDE):
        for j in range(BLOCKS_PER_SIDE):
            tile = px[i * BLOCK_SIZE:(i + 1) * BLOCK_SIZE, j * BLOCK_SIZE:(j + 1) * BLOCK_SIZE]
            blocks.append(Block(frame.index, i, j, tile))
    return blocks


def assemble_blocks(blocks: Sequence[Block]) -> np.ndarray:
    out = np.zeros((FRAME_SIZE, FRAME_SIZE), dtype=np.uint8)
    for b in blocks:
        r, c = b.block_row * BLOCK_SIZE, b.block_col * BLOCK_SIZE
        out[r:r + BLOCK_SIZE, c:c + BLOCK_SIZE] = b.pixels
    return out


# --- YUV4MPEG2 -----------------------------------------------------------


def _read_line(stream: BinaryIO) -> bytes:
    buf = bytearray()
    while True:
        ch = stream.read(1)
        if not ch:
            break
        if ch == b"\n":
            return bytes(buf) + b"\n"
        buf += ch
        if len(buf) > _MAX_LINE:
            raise IngestError("header line too long")
    return bytes(buf)


def parse_y4m_header(stream: BinaryIO) -> StreamInfo:
    """Read the stream header; leaves ``stream`` at the first FRAME marker."""
    line = _read_line(stream)
    if not line.startswith(Y4M_SIGNATURE) or (
        len(line) > len(Y4M_SIGNATURE) and line[len(Y4M_SIGNATURE)] not in b" \n"
    ):
        raise SignatureError("stream does not start with the YUV4MPEG2 signature")
    if not line.endswith(b"\n"):
        raise SignatureError("unterminated YUV4MPEG2 header")

    width = height = None
    rate = Fraction(25, 1)
    chroma = ChromaMode.C420
    interlacing = "p"
    aspect = "0:0"
    for token in line[len(Y4M_SIGNATURE):].decode("ascii", "replace").split():
        key, value = token[0], token[1:]
        try:
            if key == "W":
                width = int(value)
            elif key == "H":
                height = int(value)
            elif key == "F":
                num, den = value.split(":")
                num, den = int(num), int(den)
                if num <= 0 or den <= 0:
                    raise IngestError(f"invalid frame rate {value!r}")
                rate = Fraction(num, den)
            elif key == "C":
                try:
                    chroma = _CHROMA_TAGS[value.lower()]
                except KeyError:
                    raise UnsupportedChromaError(f"unsupported chroma tag C{value}") from None
            elif key == "I":
                interlacing = value
            elif key == "A":
                aspect = value
            elif key == "X":
                pass
            else:
                raise UnknownParameterError(f"unknown header parameter {token!r}")
        except ValueError as exc:
            if isinstance(exc, IngestError):
                raise
            raise IngestError(f"malformed header parameter {token!r}") from exc
    if width is None or height is None:
        raise MissingParameterError("header lacks W or H")
    return StreamInfo(width, height, rate, chroma, None, interlacing, aspect)


def read_y_plane(stream: BinaryIO, info: StreamInfo) -> np.ndarray | None:
    """Read one frame record and return its raw HxW luma plane, or None at EOF."""
    marker = _read_line(stream)
    if not marker:
        return None
    if not marker.startswith(_FRAME_TAG) or not marker.endswith(b"\n") or (
        len(marker) > len(_FRAME_TAG) + 1 and marker[len(_FRAME_TAG)] != ord(" ")
    ):
        raise FrameMarkerError(f"malformed FRAME marker {marker[:16]!r}")
    luma = stream.read(info.luma_size)
    if len(luma) != info.luma_size:
        raise TruncatedFrameError("frame payload ends inside the luma plane")
    skip = info.chroma_size
    if skip:
        chroma = stream.read(skip)
        if len(chroma) != skip:
            raise TruncatedFrameError("frame payload ends inside the chroma planes")
    return np.frombuffer(luma, dtype=np.uint8).reshape(info.height, info.width)


def next_frame(stream: BinaryIO, info: StreamInfo, index: int = 0) -> GrayFrame | None:
    plane = read_y_plane(stream, info)
    if plane is None:
        return None
    return GrayFrame(index, resize_bilinear(plane))


def iter_y4m(stream: BinaryIO) -> Iterator[GrayFrame]:
    info = parse_y4m_header(stream)
    index = 0
    while (frame := next_frame(stream, info, index)) is not None:
        yield frame
        index += 1


def read_y4m_planes(path: str | os.PathLike) -> tuple[StreamInfo, list[np.ndarray]]:
    """All raw (unresized) luma planes of a Y4M file."""
    with open(path, "rb") as fh:
        info = parse_y4m_header(fh)
        planes = []
        while (plane := read_y_plane(fh, info)) is not None:
            planes.append(plane)
    return StreamInfo(info.width, info.height, info.frame_rate, info.chroma_mode,
                      len(planes), info.interlacing, info.aspect), planes


def write_y4m(
    stream: BinaryIO,
    planes: Sequence[np.ndarray],
    frame_rate: Fraction = Fraction(25, 1),
) -> None:
    """Write luma planes as a mono YUV4MPEG2 stream."""
    if not planes:
        raise ValueError("no frames to write")
    h, w = planes[0].shape
    stream.write(
        f"YUV4MPEG2 W{w} H{h} F{frame_rate.numerator}:{frame_rate.denominator} "
        f"Ip A1:1 Cmono\n".encode("ascii")
    )
    for plane in planes:
        if plane.shape != (h, w):
            raise ValueError("all frames must share one size")
        stream.write(b"FRAME\n")
        stream.write(np.ascontiguousarray(plane, dtype=np.uint8).tobytes())


# --- image sequences -------------------------------------------------------


def _pgm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif data[pos:pos + 1].isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise UnreadableImageError(f"{path}: not a binary (P5) PGM file")
    pos = 2
    fields = []
    try:
        for _ in range(3):
            tok, pos = _pgm_token(data, pos)
            fields.append(int(tok))
    except ValueError:
        raise UnreadableImageError(f"{path}: malformed PGM header") from None
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedBitDepthError(f"{path}: PGM maxval {maxval}, only 255 supported")
    pos += 1  # single whitespace byte before the raster
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        raise UnreadableImageError(f"{path}: truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)


def write_pgm(path: str | os.PathLike, pixels: np.ndarray) -> None:
    px = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w = px.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + px.tobytes())


def _read_png(path: str | os.PathLike) -> np.ndarray:
    from PIL import Image

    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            if mode in ("1", "I", "I;16", "I;16B", "I;16L", "F"):
                raise UnsupportedBitDepthError(f"{path}: unsupported image mode {mode}")
            if mode == "P":
                img = img.convert("RGBA" if "transparency" in img.info else "RGB")
                mode = img.mode
            arr = np.asarray(img)
    except UnsupportedBitDepthError:
        raise
    except (OSError, SyntaxError) as exc:
        raise UnreadableImageError(f"{path}: {exc}") from exc
    if mode in ("L",):
        return arr.astype(np.uint8)
    if mode == "LA":
        return arr[..., 0].astype(np.uint8)
    if mode in ("RGB", "RGBA"):
        return rgb_to_gray(arr[..., :3])
    raise UnsupportedBitDepthError(f"{path}: unsupported image mode {mode}")


def read_gray_image(path: str | os.PathLike) -> np.ndarray:
    """Read a PGM or PNG file as an 8-bit gray grid at its native size."""
    suffix = Path(path).suffix.lower()
    if suffix == ".pgm":
        return read_pgm(path)
    if suffix == ".png":
        return _read_png(path)
    raise UnreadableImageError(f"{path}: unsupported image type {suffix!r}")


_IMAGE_SUFFIXES = (".pgm", ".png")


def expand_image_paths(pattern: str | os.PathLike) -> list[str]:
    pattern = os.fspath(pattern)
    if os.path.isdir(pattern):
        names = [
            os.path.join(pattern, n)
            for n in os.listdir(pattern)
            if n.lower().endswith(_IMAGE_SUFFIXES)
        ]
    else:
        names = glob.glob(pattern)
    return sorted(names)


def load_image_sequence(pattern: str | os.PathLike) -> list[GrayFrame]:
    """Load a sorted image sequence given a directory or a glob pattern."""
    paths = expand_image_paths(pattern)
    return [GrayFrame(i, resize_bilinear(read_gray_image(p))) for i, p in enumerate(paths)]


def load_frames(path: str | os.PathLike) -> list[GrayFrame]:
    """Decode a .y4m file, an image directory or a glob into frames.

    Raises ``FileNotFoundError`` when nothing exists at ``path``; an empty
    input yields an empty list.
    """
    path = os.fspath(path)
    if path.lower().endswith(".y4m"):
        with open(path, "rb") as fh:
            data = fh.read()
        if not data:
            return []
        return list(iter_y4m(io.BytesIO(data)))
    if os.path.isdir(path) or glob.has_magic(path):
        return load_image_sequence(path)
    if os.path.isfile(path):
        return [GrayFrame(0, resize_bilinear(read_gray_image(path)))]
    raise FileNotFoundError(path)
