"""Gray-level co-occurrence matrices and the 14 Haralick texture features.

Gray levels are indexed from 1 in every feature that depends on the
absolute level (correlation, sum of squares, sum average/variance), so the
sums over ``p_{x+y}`` run over ``k = i + j`` in ``[2, 2 * N_g]``.

The per-matrix math works on stacks ``(..., N_g, N_g)`` so a whole frame
(64 blocks x 4 orientations) is evaluated in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .linalg import jacobi_eigh

FEATURE_NAMES = (
    "angular_second_moment",
    "contrast",
    "correlation",
    "sum_of_squares_variance",
    "inverse_difference_moment",
    "sum_average",
    "sum_variance",
    "sum_entropy",
    "entropy",
    "difference_variance",
    "difference_entropy",
    "info_measure_correlation_1",
    "info_measure_correlation_2",
    "maximal_correlation_coefficient",
)
N_FEATURES = len(FEATURE_NAMES)

# (row, col) step for a unit distance in each supported direction
_OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}
DEFAULT_ORIENTATIONS = (0, 45, 90, 135)

_DEGENERATE = 1e-12


class NoPairsError(ValueError):
    pass


@dataclass(frozen=True)
class TextureConfig:
    n_g: int = 8
    orientations: tuple[int, ...] = DEFAULT_ORIENTATIONS
    distance: int = 1

    def __post_init__(self):
        if not 2 <= self.n_g <= 256:
            raise ValueError(f"gray levels must be in [2, 256], got {self.n_g}")
        if not self.orientations:
            raise ValueError("at least one orientation is required")
        bad = [o for o in self.orientations if o not in _OFFSETS]
        if bad:
            raise ValueError(f"unsupported orientations {bad}; choose from {sorted(_OFFSETS)}")
        if len(set(self.orientations)) != len(self.orientations):
            raise ValueError("orientations must be distinct")
        if self.distance < 1:
            raise ValueError("distance must be >= 1")


@dataclass(frozen=True)
class Glcm:
    """Normalized symmetric co-occurrence matrix with its marginals."""

    p: np.ndarray
    pair_count: int
    orientation: int = 0
    p_x: np.ndarray = field(init=False, repr=False)
    p_y: np.ndarray = field(init=False, repr=False)
    p_sum: np.ndarray = field(init=False, repr=False)
    p_diff: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_x", p.sum(axis=1))
        # summing the contiguous transpose keeps p_x == p_y bit-exact for symmetric p
        object.__setattr__(self, "p_y", np.ascontiguousarray(p.T).sum(axis=1))
        p_sum, p_diff = _sum_diff(p)
        object.__setattr__(self, "p_sum", p_sum)
        object.__setattr__(self, "p_diff", p_diff)

    @property
    def levels(self) -> int:
        return self.p.shape[0]


def quantize(pixels: np.ndarray, n_g: int) -> np.ndarray:
    if not 2 <= n_g <= 256:
        raise ValueError(f"gray levels must be in [2, 256], got {n_g}")
    px = np.asarray(pixels, dtype=np.int64)
    return (px * n_g) // 256


def _pair_slices(shape, orientation, distance):
    dr, dc = _OFFSETS[orientation]
    dr, dc = dr * distance, dc * distance
    h, w = shape

    def span(step, n):
        if step >= 0:
            return slice(0, n - step), slice(step, n)
        return slice(-step, n), slice(0, n + step)

    (ra, rb), (ca, cb) = span(dr, h), span(dc, w)
    return (ra, ca), (rb, cb)


def cooccurrence_counts(levels: np.ndarray, n_g: int, orientation: int, distance: int = 1) -> np.ndarray:
    """Symmetric raw counts for a stack of level grids ``(..., h, w)``."""
    levels = np.asarray(levels, dtype=np.int64)
    *lead, h, w = levels.shape
    stack = levels.reshape((-1, h, w))
    (ra, ca), (rb, cb) = _pair_slices((h, w), orientation, distance)
    a = stack[:, ra, ca].reshape(stack.shape[0], -1)
    b = stack[:, rb, cb].reshape(stack.shape[0], -1)
    base = (np.arange(stack.shape[0]) * n_g * n_g)[:, None]
    counts = np.bincount((base + a * n_g + b).ravel(), minlength=stack.shape[0] * n_g * n_g)
    counts = counts.reshape(stack.shape[0], n_g, n_g)
    counts = counts + np.swapaxes(counts, 1, 2)
    return counts.reshape(tuple(lead) + (n_g, n_g))


def compute_glcm(levels: np.ndarray, n_g: int, orientation: int = 0, distance: int = 1) -> Glcm:
    """One normalized GLCM for a single level grid and direction.

    Each neighbouring pair is counted in both orders, so ``p`` is symmetric
    and ``R`` is twice the number of in-bounds pairs.
    """
    levels = np.asarray(levels)
    if levels.ndim != 2 or levels.size == 0:
        raise ValueError("expected a non-empty 2-D level grid")
    if levels.min() < 0 or levels.max() >= n_g:
        raise ValueError(f"levels must lie in [0, {n_g - 1}]")
    counts = cooccurrence_counts(levels, n_g, orientation, distance)
    total = int(counts.sum())
    if total == 0:
        raise NoPairsError("no co-occurring pairs")
    return Glcm(counts / total, total, orientation)


def _sum_diff(p):
    n_g = p.shape[-1]
    i, j = np.indices((n_g, n_g))
    lead = p.shape[:-2]
    flat = p.reshape((-1, n_g * n_g))
    p_sum = np.zeros((flat.shape[0], 2 * n_g - 1))
    p_diff = np.zeros((flat.shape[0], n_g))
    np.add.at(p_sum, (slice(None), (i + j).ravel()), flat)
    np.add.at(p_diff, (slice(None), np.abs(i - j).ravel()), flat)
    return p_sum.reshape(lead + (2 * n_g - 1,)), p_diff.reshape(lead + (n_g,))


def _xlogx(x):
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, x * np.log(safe), 0.0)


def maximal_correlation(p: np.ndarray) -> np.ndarray:
    """Second largest singular value of ``p(i,j) / sqrt(p_x(i) p_y(j))``.

    Its square is the second largest eigenvalue of
    ``Q(i,j) = sum_k p(i,k) p(j,k) / (p_x(i) p_y(k))`` (similar matrices).
    Indices with zero marginal are zeroed rather than dropped; that only
    adds zero singular values, and fewer than two live indices gives 0.
    """
    p = np.asarray(p, dtype=float)
    px = p.sum(axis=-1)
    py = p.sum(axis=-2)
    sx = np.where(px > 0, 1.0 / np.sqrt(np.where(px > 0, px, 1.0)), 0.0)
    sy = np.where(py > 0, 1.0 / np.sqrt(np.where(py > 0, py, 1.0)), 0.0)
    s = sx[..., :, None] * p * sy[..., None, :]
    gram = s @ np.swapaxes(s, -1, -2)
    vals = jacobi_eigh(gram).eigenvalues
    second = vals[..., 1] if vals.shape[-1] > 1 else np.zeros(vals.shape[:-1])
    return np.clip(np.sqrt(np.clip(second, 0.0, None)), 0.0, 1.0)


def maximal_correlation_coefficient(glcm: Glcm) -> float:
    return float(maximal_correlation(glcm.p))


def features_from_p(p: np.ndarray) -> np.ndarray:
    """The 14 features for a stack of normalized GLCMs, shape ``(..., 14)``."""
    p = np.asarray(p, dtype=float)
    n_g = p.shape[-1]
    lev = np.arange(1, n_g + 1, dtype=float)
    sums = np.arange(2, 2 * n_g + 1, dtype=float)
    diffs = np.arange(n_g, dtype=float)
    i, j = lev[:, None], lev[None, :]

    px = p.sum(axis=-1)
    py = p.sum(axis=-2)
    p_sum, p_diff = _sum_diff(p)

    mu_x = px @ lev
    mu_y = py @ lev
    dx = lev - mu_x[..., None]
    dy = lev - mu_y[..., None]
    var_x = np.sum(px * dx**2, axis=-1)
    var_y = np.sum(py * dy**2, axis=-1)
    sd = np.sqrt(var_x * var_y)

    f1 = np.sum(p * p, axis=(-2, -1))
    f2 = p_diff @ diffs**2
    cross = np.sum(p * dx[..., :, None] * dy[..., None, :], axis=(-2, -1))
    with np.errstate(divide="ignore", invalid="ignore"):
        f3 = np.where(sd < _DEGENERATE, 0.0, cross / np.where(sd < _DEGENERATE, 1.0, sd))
    f4 = var_x
    f5 = np.sum(p / (1.0 + (i - j) ** 2), axis=(-2, -1))
    f6 = p_sum @ sums
    f7 = np.sum(p_sum * (sums - f6[..., None]) ** 2, axis=-1)
    f8 = -np.sum(_xlogx(p_sum), axis=-1)
    f9 = -np.sum(_xlogx(p), axis=(-2, -1))
    mu_d = p_diff @ diffs
    f10 = np.sum(p_diff * (diffs - mu_d[..., None]) ** 2, axis=-1)
    f11 = -np.sum(_xlogx(p_diff), axis=-1)

    hx = -np.sum(_xlogx(px), axis=-1)
    hy = -np.sum(_xlogx(py), axis=-1)
    hxy = f9
    outer = px[..., :, None] * py[..., None, :]
    log_outer = np.log(np.where(outer > 0, outer, 1.0))
    hxy1 = -np.sum(np.where(p > 0, p * log_outer, 0.0), axis=(-2, -1))
    hxy2 = -np.sum(_xlogx(outer), axis=(-2, -1))
    hmax = np.maximum(hx, hy)
    f12 = np.where(hmax < _DEGENERATE, 0.0, (hxy - hxy1) / np.where(hmax < _DEGENERATE, 1.0, hmax))
    f13 = np.sqrt(np.clip(1.0 - np.exp(-2.0 * (hxy2 - hxy)), 0.0, None))
    f14 = maximal_correlation(p)

    out = np.stack([f1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11, f12, f13, f14], axis=-1)
    return out + 0.0  # no negative zeros


def haralick_features(glcms: Glcm | Iterable[Glcm]) -> np.ndarray:
    """Feature vector averaged over the given orientations' GLCMs."""
    if isinstance(glcms, Glcm):
        glcms = [glcms]
    glcms = sorted(glcms, key=lambda g: g.orientation)
    stack = np.stack([g.p for g in glcms])
    return features_from_p(stack).mean(axis=0)


def _normalized_stack(levels: np.ndarray, config: TextureConfig) -> np.ndarray:
    # orientations are processed in sorted order so their average does not
    # depend on how the caller listed them
    mats = []
    for orientation in sorted(config.orientations):
        counts = cooccurrence_counts(levels, config.n_g, orientation, config.distance)
        totals = counts.sum(axis=(-2, -1), keepdims=True)
        if np.any(totals == 0):
            raise NoPairsError("no co-occurring pairs")
        mats.append(counts / totals)
    return np.stack(mats, axis=-3)


def block_features(pixels: np.ndarray, config: TextureConfig = TextureConfig()) -> np.ndarray:
    """Texture vector (14,) of one block of 8-bit pixels."""
    levels = quantize(pixels, config.n_g)
    return features_from_p(_normalized_stack(levels, config)).mean(axis=-2)


def blocks_features(blocks: np.ndarray, config: TextureConfig = TextureConfig()) -> np.ndarray:
    """Texture vectors for a stack of blocks ``(n, h, w)`` -> ``(n, 14)``."""
    levels = quantize(blocks, config.n_g)
    return features_from_p(_normalized_stack(levels, config)).mean(axis=-2)


def glcms_for_block(pixels: np.ndarray, config: TextureConfig = TextureConfig()) -> list[Glcm]:
    levels = quantize(pixels, config.n_g)
    return [compute_glcm(levels, config.n_g, o, config.distance) for o in sorted(config.orientations)]


def orientation_list(text: str | Sequence[int]) -> tuple[int, ...]:
    if isinstance(text, str):
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    return tuple(int(t) for t in text)
