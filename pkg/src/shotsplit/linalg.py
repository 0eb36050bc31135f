"""Dense symmetric eigendecomposition and seeded k-means.

Both routines are sized for the small problems the detector produces
(8x8 co-occurrence similarity matrices, 64x64 block affinities), so they
favour predictability and determinism over asymptotic speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_SWEEPS = 100
OFF_DIAGONAL_TOL = 1e-12


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SymEigen:
    eigenvalues: np.ndarray  # descending along the last axis
    eigenvectors: np.ndarray  # columns match eigenvalues


@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    # inertia after each Lloyd iteration of the winning restart
    history: tuple[float, ...] = field(default=(), compare=False)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; identical streams on every platform for a given seed."""
    return np.random.Generator(np.random.PCG64(seed & 0xFFFFFFFFFFFFFFFF))


def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # Circle-method tournament: m-1 rounds of m/2 disjoint pairs covering
    # every (p, q) exactly once per sweep.
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        half = m // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        rounds.append((lo, hi))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a: np.ndarray) -> SymEigen:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Accepts a single ``(n, n)`` matrix or a stack ``(..., n, n)``. Each sweep
    visits every off-diagonal pair once, in a round-robin order where the
    pairs of one round are disjoint so their rotations are applied together.
    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``1e-12 * ||A||_F`` for every matrix in the stack.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    n = a.shape[-1]
    batch_shape = a.shape[:-2]
    work = 0.5 * (a + np.swapaxes(a, -1, -2))
    work = work.reshape((-1, n, n))

    m = n + (n % 2)
    if m != n:
        # pad to an even order; the extra index is decoupled (zero row/col)
        # and never mixes with the others
        padded = np.zeros((work.shape[0], m, m))
        padded[:, :n, :n] = work
        work = padded
    vecs = np.broadcast_to(np.eye(m), work.shape).copy()

    norms = np.sqrt(np.sum(work * work, axis=(-1, -2)))
    tol = OFF_DIAGONAL_TOL * norms
    offmask = ~np.eye(m, dtype=bool)
    rounds = _round_robin(m) if m >= 2 else []

    for _ in range(MAX_SWEEPS + 1):
        off = np.sqrt(np.sum(np.where(offmask, work, 0.0) ** 2, axis=(-1, -2)))
        if np.all(off <= tol):
            break
        for p, q in rounds:
            app = work[:, p, p]
            aqq = work[:, q, q]
            apq = work[:, p, q]
            nonzero = apq != 0.0
            # a tiny apq overflows theta to inf, which correctly gives t = 0
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                theta = np.where(nonzero, (aqq - app) / (2.0 * apq), 0.0)
                sign = np.where(theta >= 0.0, 1.0, -1.0)
                t = np.where(nonzero, sign / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            c3 = c[:, :, None]
            s3 = s[:, :, None]

            rows_p = work[:, p, :]
            rows_q = work[:, q, :]
            work[:, p, :] = c3 * rows_p - s3 * rows_q
            work[:, q, :] = s3 * rows_p + c3 * rows_q

            cols_p = work[:, :, p]
            cols_q = work[:, :, q]
            c2 = c[:, None, :]
            s2 = s[:, None, :]
            work[:, :, p] = c2 * cols_p - s2 * cols_q
            work[:, :, q] = s2 * cols_p + c2 * cols_q
            work[:, p, q] = 0.0
            work[:, q, p] = 0.0

            vp = vecs[:, :, p]
            vq = vecs[:, :, q]
            vecs[:, :, p] = c2 * vp - s2 * vq
            vecs[:, :, q] = s2 * vp + c2 * vq
    else:
        raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")

    vals = np.diagonal(work, axis1=-2, axis2=-1).copy()
    if m != n:
        vals = vals[:, :n]
        vecs = vecs[:, :n, :n]
    order = np.argsort(-vals, axis=-1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=-1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=-1)
    return SymEigen(
        eigenvalues=vals.reshape(batch_shape + (n,)),
        eigenvectors=vecs.reshape(batch_shape + (n, n)),
    )


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _plus_plus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    closest = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0.0:
            # inverse-CDF draw; avoids Generator.choice's renormalisation
            cdf = np.cumsum(closest)
            idx = int(np.searchsorted(cdf, rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        chosen.append(idx)
        closest = np.minimum(closest, np.sum((points - points[idx]) ** 2, axis=1))
    return points[chosen].copy()


def _repair_empty(labels: np.ndarray, dist: np.ndarray, k: int) -> None:
    counts = np.bincount(labels, minlength=k)
    for empty in np.flatnonzero(counts == 0):
        own = dist[np.arange(labels.size), labels]
        donor_ok = counts[labels] > 1
        own = np.where(donor_ok, own, -1.0)
        victim = int(np.argmax(own))
        counts[labels[victim]] -= 1
        labels[victim] = empty
        counts[empty] += 1


def _lloyd(points, centroids, k, max_iter):
    labels = None
    history = []
    for _ in range(max_iter):
        dist = _sq_dists(points, centroids)
        new_labels = np.argmin(dist, axis=1)
        _repair_empty(new_labels, dist, k)
        converged = labels is not None and np.array_equal(new_labels, labels)
        labels = new_labels
        centroids = np.stack([points[labels == c].mean(axis=0) for c in range(k)])
        inertia = float(np.sum((points - centroids[labels]) ** 2))
        if history and inertia > history[-1] * (1.0 + 1e-12) + 1e-300:
            raise AssertionError("k-means inertia increased during Lloyd iteration")
        history.append(inertia)
        if converged:
            break
    return labels, centroids, history


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int,
    restarts: int = 10,
    max_iter: int = 100,
) -> KMeansResult:
    """Lloyd's k-means with k-means++ seeding; best of ``restarts`` runs.

    All randomness comes from one PCG64 stream seeded with ``seed``, so
    identical arguments give identical labels.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be an (n, d) array")
    n = points.shape[0]
    if k < 1:
        raise ValueError("k must be at least 1")
    if n < k:
        raise ValueError(f"cannot form {k} clusters from {n} points")

    rng = make_rng(seed)
    best = None
    for _ in range(max(1, restarts)):
        init = _plus_plus(points, k, rng)
        labels, centroids, history = _lloyd(points, init, k, max_iter)
        inertia = history[-1]
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels, centroids, inertia, tuple(history))
    return best
