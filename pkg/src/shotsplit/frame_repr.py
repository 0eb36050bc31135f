"""Per-frame representative matrices.

A frame's 64 blocks become a 64x14 texture matrix; the blocks are grouped
by normalized spectral clustering (Ng-Jordan-Weiss) and each group is
replaced by its mean feature row, giving a fixed-size k x 14 descriptor.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .ingest import BLOCK_SIZE, BLOCKS_PER_SIDE, FRAME_SIZE, GrayFrame
from .linalg import jacobi_eigh, kmeans
from .texture import TextureConfig, blocks_features

N_BLOCKS = BLOCKS_PER_SIDE * BLOCKS_PER_SIDE


@dataclass(frozen=True)
class FrameFeatureMatrix:
    frame_index: int
    fm: np.ndarray  # (64, 14), row-major block order


@dataclass(frozen=True)
class RepresentativeMatrix:
    frame_index: int
    rm: np.ndarray  # (k, 14), canonical row order
    cluster_sizes: tuple[int, ...]

    @property
    def k(self) -> int:
        return self.rm.shape[0]


def frame_blocks(pixels: np.ndarray) -> np.ndarray:
    """(64, 32, 32) view of a 256x256 frame, row-major block order."""
    px = np.asarray(pixels)
    if px.shape != (FRAME_SIZE, FRAME_SIZE):
        raise ValueError("frame must be 256x256")
    tiles = px.reshape(BLOCKS_PER_SIDE, BLOCK_SIZE, BLOCKS_PER_SIDE, BLOCK_SIZE)
    return tiles.transpose(0, 2, 1, 3).reshape(N_BLOCKS, BLOCK_SIZE, BLOCK_SIZE)


def frame_feature_matrix(frame: GrayFrame, config: TextureConfig = TextureConfig()) -> FrameFeatureMatrix:
    return FrameFeatureMatrix(frame.index, blocks_features(frame_blocks(frame.pixels), config))


def _standardize(x: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    # columns that are constant up to rounding noise stay at zero
    flat = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    z = (x - mean) / np.where(flat, 1.0, std)
    z[:, flat] = 0.0
    return z


def affinity_matrix(fm: FrameFeatureMatrix | np.ndarray) -> np.ndarray:
    """Gaussian similarity of z-scored rows, median-distance bandwidth, zero diagonal."""
    x = fm.fm if isinstance(fm, FrameFeatureMatrix) else np.asarray(fm, dtype=float)
    z = _standardize(x)
    diff = z[:, None, :] - z[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    d = np.sqrt(d2)
    upper = d[np.triu_indices_from(d, k=1)]
    positive = upper[upper > 0]
    sigma = float(np.median(positive)) if positive.size else 1.0
    w = np.exp(-d2 / (2.0 * sigma * sigma))
    np.fill_diagonal(w, 0.0)
    return w


def spectral_cluster(w: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Ng-Jordan-Weiss spectral clustering of an affinity matrix into k labels."""
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if k == 1:
        return np.zeros(n, dtype=int)
    deg = w.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    lap = inv_sqrt[:, None] * w * inv_sqrt[None, :]
    vecs = jacobi_eigh(lap).eigenvectors[:, :k]
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    emb = np.where(norms > 0, vecs / np.where(norms > 0, norms, 1.0), 0.0)
    return kmeans(emb, k, seed).labels


def _shifted_mean(rows: np.ndarray) -> np.ndarray:
    # shifting by the first row keeps the mean of identical rows exact
    return rows[0] + (rows - rows[0]).mean(axis=0)


def representative_matrix(
    fm: FrameFeatureMatrix | np.ndarray, labels: np.ndarray, k: int, frame_index: int | None = None
) -> RepresentativeMatrix:
    """Cluster-mean rows sorted by descending cluster size, then lexicographically."""
    if isinstance(fm, FrameFeatureMatrix):
        frame_index = fm.frame_index if frame_index is None else frame_index
        x = fm.fm
    else:
        x = np.asarray(fm, dtype=float)
    labels = np.asarray(labels)
    if labels.shape != (x.shape[0],) or labels.min() < 0 or labels.max() >= k:
        raise ValueError("labels do not match the feature matrix")
    global_mean = _shifted_mean(x)
    rows = []
    for c in range(k):
        members = x[labels == c]
        mean = _shifted_mean(members) if len(members) else global_mean
        rows.append((len(members), mean))
    rows.sort(key=lambda item: (-item[0], tuple(item[1])))
    return RepresentativeMatrix(
        frame_index if frame_index is not None else 0,
        np.stack([r for _, r in rows]),
        tuple(size for size, _ in rows),
    )


def frame_seed(base_seed: int, frame: GrayFrame) -> int:
    """Per-frame clustering seed: ``base_seed`` XOR a 64-bit digest of the pixels.

    Keyed on content rather than position, so identical frames always get
    identical descriptors and frames can be processed in any order.
    """
    digest = hashlib.blake2b(np.ascontiguousarray(frame.pixels).tobytes(), digest_size=8).digest()
    return (base_seed ^ int.from_bytes(digest, "little")) & 0xFFFFFFFFFFFFFFFF


def frame_representative(
    frame: GrayFrame, k: int = 6, seed: int = 42, config: TextureConfig = TextureConfig()
) -> RepresentativeMatrix:
    """Full per-frame pipeline: texture rows -> affinity -> clusters -> RM."""
    fm = frame_feature_matrix(frame, config)
    labels = spectral_cluster(affinity_matrix(fm), k, frame_seed(seed, frame))
    return representative_matrix(fm, labels, k)


def frame_representatives(
    frames, k: int = 6, seed: int = 42, config: TextureConfig = TextureConfig(), workers: int = 1
) -> list[RepresentativeMatrix]:
    """RMs for a frame sequence, in frame order.

    Frames with identical pixels are computed once. With ``workers > 1`` the
    distinct frames are spread over a process pool; results do not depend on
    completion order.
    """
    frames = list(frames)
    unique: dict[bytes, GrayFrame] = {}
    keys = []
    for fr in frames:
        key = hashlib.blake2b(fr.pixels.tobytes(), digest_size=16).digest()
        keys.append(key)
        unique.setdefault(key, fr)
    todo = list(unique.items())
    if workers > 1 and len(todo) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_rm_task, [(fr, k, seed, config) for _, fr in todo]))
    else:
        results = [frame_representative(fr, k, seed, config) for _, fr in todo]
    by_key = {key: res.rm for (key, _), res in zip(todo, results)}
    sizes = {key: res.cluster_sizes for (key, _), res in zip(todo, results)}
    return [RepresentativeMatrix(fr.index, by_key[key], sizes[key]) for fr, key in zip(frames, keys)]


def _rm_task(args):
    frame, k, seed, config = args
    return frame_representative(frame, k, seed, config)

