"""Lloyd k-means with k-means++ seeding, and the sampled light-k-means variant.

Everything here uses squared Euclidean distance. Ties between centers go to
the lowest center index, and center sums are accumulated in a fixed order,
so results depend only on the data and the seed.
"""

from dataclasses import dataclass, field

import numpy as np

from ._random import as_seed_sequence, child_seed, make_rng

# rows per distance block; bounds the (rows, k) scratch matrix
_BLOCK_ELEMS = 1 << 22


@dataclass
class KMeansResult:
    assignments: np.ndarray
    centers: np.ndarray
    rss: float
    iterations: int
    rss_history: list = field(default_factory=list)

    @property
    def k(self):
        return self.centers.shape[0]


def _check_points(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {X.shape}")
    return X


def _nearest(X, centers, x_sq=None):
    """Index of and squared distance to the nearest center for every row."""
    n, k = X.shape[0], centers.shape[0]
    if x_sq is None:
        x_sq = np.einsum("ij,ij->i", X, X)
    c_sq = np.einsum("ij,ij->i", centers, centers)
    labels = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    step = max(1, _BLOCK_ELEMS // max(k, 1))
    for start in range(0, n, step):
        stop = min(n, start + step)
        d2 = X[start:stop] @ centers.T
        d2 *= -2.0
        d2 += x_sq[start:stop, None]
        d2 += c_sq[None, :]
        np.maximum(d2, 0.0, out=d2)
        idx = np.argmin(d2, axis=1)
        labels[start:stop] = idx
        dist[start:stop] = d2[np.arange(stop - start), idx]
    return labels, dist


def assign_nearest(points, centers):
    """Map each point to its nearest center; ties go to the lowest index."""
    points = _check_points(points)
    centers = _check_points(centers)
    if centers.shape[0] == 0:
        raise ValueError("at least one center is required")
    if points.shape[1] != centers.shape[1]:
        raise ValueError(f"dimension mismatch: points have {points.shape[1]}, centers {centers.shape[1]}")
    return _nearest(points, centers)[0]


def kmeans_plusplus(X, k, rng, x_sq=None):
    """k-means++ seeding. Returns the indices of the chosen rows."""
    n = X.shape[0]
    if x_sq is None:
        x_sq = np.einsum("ij,ij->i", X, X)
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    closest = np.maximum(x_sq - 2.0 * (X @ X[chosen[0]]) + x_sq[chosen[0]], 0.0)
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            cdf = np.cumsum(closest)
            pick = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
            pick = min(pick, n - 1)
            while closest[pick] == 0:  # guard the right edge of the cdf
                pick -= 1
        else:
            # every point coincides with a center already chosen
            pick = int(rng.integers(n))
        chosen[j] = pick
        d_new = np.maximum(x_sq - 2.0 * (X @ X[pick]) + x_sq[pick], 0.0)
        np.minimum(closest, d_new, out=closest)
    return chosen


def _means(X, labels, k):
    n, d = X.shape
    counts = np.bincount(labels, minlength=k)
    if d <= 16:
        sums = np.empty((k, d))
        for j in range(d):
            sums[:, j] = np.bincount(labels, weights=X[:, j], minlength=k)
    else:
        order = np.argsort(labels, kind="stable")
        starts = np.cumsum(counts) - counts
        filled = counts > 0
        sums = np.zeros((k, d))
        sums[filled] = np.add.reduceat(X[order], starts[filled], axis=0)
    counts = counts.astype(np.float64)
    return sums / np.maximum(counts, 1.0)[:, None], counts


def _cost(X, labels, centers):
    diff = X - centers[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def _fill_empty(X, labels, dist, centers):
    """Move every empty center onto the worst-served point of a shared subset."""
    k = centers.shape[0]
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return
    for j in empty:
        donors = counts[labels] > 1
        candidates = np.flatnonzero(donors)
        i = candidates[np.argmax(dist[candidates])]
        counts[labels[i]] -= 1
        labels[i] = j
        counts[j] = 1
        centers[j] = X[i]
        dist[i] = 0.0


def kmeans(X, k, max_iter=5, seed=0):
    """Lloyd's algorithm from k-means++ seeds.

    Stops after ``max_iter`` center updates or as soon as an update leaves
    every assignment unchanged. ``rss_history[j]`` is the cost after update
    ``j`` (entry 0 is the seeding cost) and never increases.
    """
    X = _check_points(X)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n={n}, got {k}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    rng = make_rng(seed)
    x_sq = np.einsum("ij,ij->i", X, X)

    centers = X[kmeans_plusplus(X, k, rng, x_sq)].copy()
    labels, dist = _nearest(X, centers, x_sq)
    _fill_empty(X, labels, dist, centers)
    history = [_cost(X, labels, centers)]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        centers, _ = _means(X, labels, k)
        new_labels, dist = _nearest(X, centers, x_sq)
        _fill_empty(X, new_labels, dist, centers)
        history.append(_cost(X, new_labels, centers))
        unchanged = np.array_equal(new_labels, labels)
        labels = new_labels
        if unchanged:
            break
    return KMeansResult(labels, centers, history[-1], iterations, history)


def light_kmeans(X, k, p_prime, max_iter=5, seed=0, kmeans_fn=None):
    """k-means on a random sample of ``p_prime`` rows, then one assignment pass.

    The returned centers are those fitted on the sample; the rest of the rows
    are attached to their nearest one. When ``p_prime >= n`` the sample is
    every row and the result equals ``kmeans(X, k, max_iter, seed)``.
    """
    X = _check_points(X)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n={n}, got {k}")
    if p_prime < k:
        raise ValueError(f"p_prime={p_prime} must be >= k={k}")
    kmeans_fn = kmeans if kmeans_fn is None else kmeans_fn
    seed = as_seed_sequence(seed)
    if p_prime >= n:
        return kmeans_fn(X, k, max_iter, seed)

    sample_rng = make_rng(child_seed(seed, 1))
    sample = np.sort(sample_rng.choice(n, size=p_prime, replace=False))
    fitted = kmeans_fn(X[sample], k, max_iter, seed)
    rest = np.ones(n, dtype=bool)
    rest[sample] = False

    labels = np.empty(n, dtype=np.int64)
    labels[sample] = fitted.assignments
    labels[rest] = _nearest(X[rest], fitted.centers)[0]
    rss = _cost(X, labels, fitted.centers)
    return KMeansResult(labels, fitted.centers, rss, fitted.iterations, [rss])
