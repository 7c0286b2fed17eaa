"""Landmark selection: divide-and-conquer, plain k-means and random baselines."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._random import as_seed_sequence, child_seed, make_rng
from .kmeans import _cost, _means, assign_nearest, kmeans, light_kmeans

logger = logging.getLogger(__name__)

METHODS = ("dnc", "kmeans", "random")
_EPS = 1e-9


@dataclass
class LandmarkSet:
    """p landmarks plus the subset each data point belongs to.

    For ``dnc`` and ``kmeans`` the landmark of subset ``i`` is its center, so
    ``centers[assignment[j]]`` is the center of the subset holding point j.
    ``requested`` records the landmark count asked for; ``complete`` is False
    when duplicated points made that count unreachable.
    """

    centers: np.ndarray
    assignment: np.ndarray
    subset_rss: np.ndarray
    method: str
    requested: int
    rounds: int = 0

    @property
    def p(self):
        return self.centers.shape[0]

    @property
    def complete(self):
        return self.p == self.requested

    @property
    def total_rss(self):
        return float(self.subset_rss.sum())

    def subset_sizes(self):
        return np.bincount(self.assignment, minlength=self.p)


def _subset_rss(X, assignment, centers):
    diff = X - centers[assignment]
    return np.bincount(assignment, weights=np.einsum("ij,ij->i", diff, diff), minlength=centers.shape[0])


def allocate_counts(rss, p, alpha):
    """Split a budget of ``p`` subsets across current subsets by their RSS.

    Each subset's raw share ``rss_i / sum(rss) * p`` is capped at ``alpha``,
    floored (minimum 1), and the leftover ``p - sum(counts)`` is handed out
    one unit at a time by largest fractional remainder (ties: larger rss,
    then lower index), skipping capped subsets and zero remainders. The
    result never sums past ``p``. Mass cut off by the ``alpha`` cap is not
    redistributed; later rounds pick it up.
    """
    rss = np.asarray(rss, dtype=np.float64)
    c = rss.size
    if c == 0:
        raise ValueError("rss must be non-empty")
    if (rss < 0).any() or not np.isfinite(rss).all():
        raise ValueError("rss values must be finite and non-negative")
    if p < c:
        raise ValueError(f"p={p} is smaller than the number of subsets {c}")
    if alpha < 2:
        raise ValueError(f"alpha must be >= 2, got {alpha}")

    total = rss.sum()
    weights = rss / total if total > 0 else np.full(c, 1.0 / c)
    raw = np.minimum(weights * p, alpha)
    counts = np.maximum(np.floor(raw + _EPS), 1).astype(np.int64)
    counts = np.minimum(counts, alpha)
    remainder = np.where(raw >= alpha, 0.0, raw - np.floor(raw + _EPS))
    remainder = np.maximum(remainder, 0.0)

    # raising zeros to 1 can overshoot p; take back from the least deserving
    excess = int(counts.sum()) - p
    if excess > 0:
        order = np.lexsort((-np.arange(c), rss, -(counts - raw)))
        for i in order:
            if excess == 0:
                break
            take = min(excess, counts[i] - 1)
            counts[i] -= take
            excess -= take

    budget = p - int(counts.sum())
    if budget > 0:
        order = np.lexsort((np.arange(c), -rss, -remainder))
        for i in order:
            if budget == 0 or remainder[i] <= _EPS:
                break
            if counts[i] < alpha:
                counts[i] += 1
                budget -= 1
    return counts


def _identity(X, p):
    n = X.shape[0]
    return LandmarkSet(X.copy(), np.arange(n), np.zeros(n), "dnc", requested=p)


def select_landmarks_dnc(X, p, alpha=50, p_prime=None, max_iter=5, seed=0, dividing="light", on_round=None):
    """Divide-and-conquer landmark selection.

    Starts from one subset holding every point, splits it into
    ``min(alpha, p)`` parts, then keeps splitting the current subsets with
    RSS-proportional targets from :func:`allocate_counts` until there are
    ``p`` of them. Subsets larger than ``p_prime`` are split by
    :func:`light_kmeans`, smaller ones by :func:`kmeans` (``dividing="kmeans"``
    always uses plain k-means). The landmarks are the final subset means.

    ``on_round`` is called with the list of subset index arrays after every
    round; tests use it to check that the subsets keep partitioning X.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if alpha < 2:
        raise ValueError(f"alpha must be >= 2, got {alpha}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if dividing not in ("light", "kmeans"):
        raise ValueError(f"dividing must be 'light' or 'kmeans', got {dividing!r}")
    if p >= n:
        return _identity(X, p)
    if p_prime is None:
        p_prime = max(10 * p, alpha)
    p_prime = min(p_prime, n)
    if p_prime < alpha and p_prime < n:
        raise ValueError(f"p_prime={p_prime} must be >= alpha={alpha}")
    seed = as_seed_sequence(seed)

    # subsets are index arrays; paths identify them for seeding
    subsets = [np.arange(n)]
    paths = [()]
    center0 = X.mean(axis=0)
    rss = [_cost(X, np.zeros(n, dtype=np.int64), center0[None, :])]
    max_rounds = math.ceil(math.log(p) / math.log(alpha)) + p if p > 1 else 1
    rounds = 0

    while len(subsets) < p:
        c = len(subsets)
        sizes = np.array([s.size for s in subsets])
        rss_arr = np.array(rss)
        divisible = (sizes > 1) & (rss_arr > 0)
        if not divisible.any():
            logger.warning("only %d distinct subsets reachable out of p=%d", c, p)
            break
        if rounds == 0:
            targets = np.array([min(alpha, p, n)])
        else:
            targets = allocate_counts(rss_arr, p, alpha)
        targets = np.where(divisible, np.minimum(targets, sizes), 1)
        if not (targets >= 2).any():
            i = int(np.argmax(np.where(divisible, rss_arr, -1.0)))
            targets[i] = min(alpha, sizes[i], p - c + 1)

        new_subsets, new_paths, new_rss = [], [], []
        for idx, path, t, r in zip(subsets, paths, targets, rss):
            if t < 2:
                new_subsets.append(idx)
                new_paths.append(path)
                new_rss.append(r)
                continue
            pts = X[idx]
            sub_seed = child_seed(seed, *path) if path else child_seed(seed, 0)
            if dividing == "light" and idx.size > p_prime:
                res = light_kmeans(pts, int(t), p_prime, max_iter, sub_seed)
            else:
                res = kmeans(pts, int(t), max_iter, sub_seed)
            centers, _ = _means(pts, res.assignments, int(t))
            child_rss = _subset_rss(pts, res.assignments, centers)
            for j in range(int(t)):
                members = idx[res.assignments == j]
                if members.size == 0:
                    continue
                new_subsets.append(members)
                new_paths.append(path + (j + 1,))
                new_rss.append(float(child_rss[j]))
        subsets, paths, rss = new_subsets, new_paths, new_rss
        rounds += 1
        if on_round is not None:
            on_round(subsets)
        if rounds > max_rounds:
            raise RuntimeError(f"landmark selection exceeded {max_rounds} rounds")

    assignment = np.empty(n, dtype=np.int64)
    for i, idx in enumerate(subsets):
        assignment[idx] = i
    centers, _ = _means(X, assignment, len(subsets))
    subset_rss = _subset_rss(X, assignment, centers)
    return LandmarkSet(centers, assignment, subset_rss, "dnc", requested=p, rounds=rounds)


def select_landmarks_kmeans(X, p, max_iter=5, seed=0):
    """Landmarks from a single k-means run with ``k = p``."""
    X = np.asarray(X, dtype=np.float64)
    if p > X.shape[0]:
        raise ValueError(f"p={p} exceeds the number of points {X.shape[0]}")
    res = kmeans(X, p, max_iter, seed)
    return LandmarkSet(
        res.centers, res.assignments, _subset_rss(X, res.assignments, res.centers), "kmeans", requested=p, rounds=1
    )


def select_landmarks_random(X, p, seed=0):
    """``p`` distinct data points chosen uniformly; points join their nearest one."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= p <= n:
        raise ValueError(f"p must satisfy 1 <= p <= n={n}, got {p}")
    rng = make_rng(seed)
    centers = X[rng.choice(n, size=p, replace=False)]
    assignment = assign_nearest(X, centers)
    return LandmarkSet(centers, assignment, _subset_rss(X, assignment, centers), "random", requested=p)
