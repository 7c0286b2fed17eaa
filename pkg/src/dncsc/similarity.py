"""Sparse point-to-landmark affinity.

The approximate search exploits that landmarks are subset centers: the
landmarks nearest a point are almost always among the landmarks nearest its
own subset center, so each point only scans a short candidate list.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .kmeans import assign_nearest

_BLOCK_ELEMS = 1 << 21


@dataclass
class NeighborLists:
    """Per-point landmark indices and squared distances, nearest first.

    ``distance_evals`` counts point-to-landmark distance evaluations and
    ``table_entries`` the size of the landmark candidate table, so callers
    can check the cost of a search without timing it.
    """

    indices: np.ndarray
    sq_distances: np.ndarray
    method: str
    distance_evals: int = 0
    table_entries: int = 0

    @property
    def K(self):
        return self.indices.shape[1]


@dataclass
class SparseAffinity:
    matrix: sp.csr_matrix
    sigma: float

    @property
    def shape(self):
        return self.matrix.shape


def _row_sq_dists(points, cand_points):
    # direct differences keep approximate and exact searches bit-identical
    diff = points[:, None, :] - cand_points
    return (diff * diff).sum(axis=-1)


def smallest_k(d2, k):
    """Column indices of the ``k`` smallest entries per row, ordered by
    (value, column index). Same result as a stable full sort, cheaper."""
    m = d2.shape[1]
    if k >= m or m <= 64:
        return np.argsort(d2, axis=1, kind="stable")[:, :k]
    part = np.argpartition(d2, k - 1, axis=1)[:, :k]
    part.sort(axis=1)
    vals = np.take_along_axis(d2, part, axis=1)
    threshold = vals.max(axis=1)
    # rows with ties straddling the cut need the full ordering
    ambiguous = (d2 <= threshold[:, None]).sum(axis=1) > k
    order = np.argsort(vals, axis=1, kind="stable")
    out = np.take_along_axis(part, order, axis=1)
    if ambiguous.any():
        rows = np.flatnonzero(ambiguous)
        out[rows] = np.argsort(d2[rows], axis=1, kind="stable")[:, :k]
    return out


def _block_rows(width, d):
    return max(1, _BLOCK_ELEMS // max(1, width * d))


def landmark_knn_table(centers, k_prime):
    """The ``k_prime`` landmarks nearest each landmark, itself first.

    Ties go to the lower landmark index.
    """
    centers = np.asarray(centers, dtype=np.float64)
    p, d = centers.shape
    if not 1 <= k_prime <= p:
        raise ValueError(f"k_prime must satisfy 1 <= k_prime <= p={p}, got {k_prime}")
    table = np.empty((p, k_prime), dtype=np.int64)
    step = _block_rows(p, d)
    for start in range(0, p, step):
        stop = min(p, start + step)
        d2 = _row_sq_dists(centers[start:stop], centers[None, :, :])
        d2[np.arange(stop - start), np.arange(start, stop)] = -1.0
        table[start:stop] = smallest_k(d2, k_prime)
    return table


def _point_assignment(X, landmarks):
    assignment = getattr(landmarks, "assignment", None)
    if assignment is not None and assignment.shape == (X.shape[0],):
        return assignment
    # landmarks without construction-time subsets (e.g. new points)
    return assign_nearest(X, landmarks.centers)


def approx_knn(X, landmarks, K, k_prime=None):
    """K nearest landmarks of each point, searched among the ``k_prime``
    landmarks nearest the point's own subset center."""
    X = np.asarray(X, dtype=np.float64)
    centers = landmarks.centers
    p = centers.shape[0]
    if k_prime is None:
        k_prime = min(10 * K, p)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if K > k_prime:
        raise ValueError(f"K={K} must not exceed k_prime={k_prime}")
    if k_prime > p:
        raise ValueError(f"k_prime={k_prime} exceeds the number of landmarks {p}")
    if X.shape[1] != centers.shape[1]:
        raise ValueError(f"dimension mismatch: points have {X.shape[1]}, landmarks {centers.shape[1]}")

    table = landmark_knn_table(centers, k_prime)
    assignment = _point_assignment(X, landmarks)
    n = X.shape[0]
    indices = np.empty((n, K), dtype=np.int64)
    dists = np.empty((n, K))
    step = _block_rows(k_prime, X.shape[1])
    for start in range(0, n, step):
        stop = min(n, start + step)
        cand = np.sort(table[assignment[start:stop]], axis=1)
        d2 = _row_sq_dists(X[start:stop], centers[cand])
        order = smallest_k(d2, K)
        indices[start:stop] = np.take_along_axis(cand, order, axis=1)
        dists[start:stop] = np.take_along_axis(d2, order, axis=1)
    return NeighborLists(indices, dists, "approx", distance_evals=n * k_prime, table_entries=p * k_prime)


def exact_knn(X, landmarks, K):
    """K nearest landmarks of each point by a full scan over all landmarks."""
    X = np.asarray(X, dtype=np.float64)
    centers = landmarks.centers if hasattr(landmarks, "centers") else np.asarray(landmarks, dtype=np.float64)
    p = centers.shape[0]
    if not 1 <= K <= p:
        raise ValueError(f"K must satisfy 1 <= K <= p={p}, got {K}")
    if X.shape[1] != centers.shape[1]:
        raise ValueError(f"dimension mismatch: points have {X.shape[1]}, landmarks {centers.shape[1]}")
    n = X.shape[0]
    indices = np.empty((n, K), dtype=np.int64)
    dists = np.empty((n, K))
    step = _block_rows(p, X.shape[1])
    for start in range(0, n, step):
        stop = min(n, start + step)
        d2 = _row_sq_dists(X[start:stop], centers[None, :, :])
        order = smallest_k(d2, K)
        indices[start:stop] = order
        dists[start:stop] = np.take_along_axis(d2, order, axis=1)
    return NeighborLists(indices, dists, "exact", distance_evals=n * p)


def knn_recall(approx, exact):
    """Fraction of exact neighbor slots recovered by the approximate search."""
    if approx.indices.shape != exact.indices.shape:
        raise ValueError("neighbor lists must have the same shape")
    a = np.sort(approx.indices, axis=1)
    hits = 0
    for j in range(exact.indices.shape[1]):
        col = exact.indices[:, j : j + 1]
        hits += int((a == col).any(axis=1).sum())
    return hits / exact.indices.size


def estimate_bandwidth(neighbors, policy="mean_knn"):
    """Gaussian kernel width.

    ``"mean_knn"`` uses the root of the mean stored squared distance (1.0 if
    they are all zero). A number, or a string ``"fixed:V"``, fixes it.
    """
    if isinstance(policy, str) and policy.startswith("fixed:"):
        policy = float(policy.split(":", 1)[1])
    if isinstance(policy, (int, float)) and not isinstance(policy, bool):
        if not policy > 0:
            raise ValueError(f"fixed bandwidth must be positive, got {policy}")
        return float(policy)
    if policy != "mean_knn":
        raise ValueError(f"unknown bandwidth policy {policy!r}")
    mean_sq = float(np.mean(neighbors.sq_distances))
    if mean_sq <= 0:
        return 1.0
    return float(np.sqrt(mean_sq))


def build_affinity(neighbors, sigma, n_landmarks=None):
    """Gaussian weights ``exp(-d^2 / (2 sigma^2))`` on the neighbor pattern.

    Weights that would underflow are clamped to the smallest normal float so
    every stored entry stays positive.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    n, K = neighbors.indices.shape
    if n_landmarks is None:
        n_landmarks = int(neighbors.indices.max()) + 1 if neighbors.indices.size else 0
    weights = np.exp(-neighbors.sq_distances / (2.0 * sigma * sigma))
    np.maximum(weights, np.finfo(np.float64).tiny, out=weights)
    indptr = np.arange(0, n * K + 1, K)
    matrix = sp.csr_matrix((weights.ravel(), neighbors.indices.ravel(), indptr), shape=(n, n_landmarks))
    return SparseAffinity(matrix, float(sigma))


def dump_affinity(affinity, fh):
    """Write the nonzeros as ``row col weight`` lines (17 significant digits)."""
    coo = affinity.matrix.tocoo()
    for r, c, w in zip(coo.row, coo.col, coo.data):
        fh.write(f"{r} {c} {w:.17g}\n")


def load_affinity(fh, shape, sigma=float("nan")):
    rows, cols, vals = [], [], []
    for line in fh:
        if not line.strip():
            continue
        r, c, w = line.split()
        rows.append(int(r))
        cols.append(int(c))
        vals.append(float(w))
    return SparseAffinity(sp.csr_matrix((vals, (rows, cols)), shape=shape), sigma)
