"""scikit-learn compatible estimators."""

import time
from contextlib import contextmanager

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._random import as_seed_sequence, child_seed
from .exceptions import StageError
from .landmarks import select_landmarks_dnc, select_landmarks_kmeans, select_landmarks_random
from .partition import cluster_embedding, degrees, lift, reduced_laplacian, solve_reduced
from .similarity import approx_knn, build_affinity, estimate_bandwidth, exact_knn

SELECTIONS = ("dnc", "dnc-kmeans", "kmeans", "random")
KNN_METHODS = ("approx", "exact")
PHASES = ("selection", "similarity", "partitioning", "discretization")

# alpha switches to the smaller value from this many points upward
LARGE_DATASET = 100_000


def default_alpha(n):
    return 200 if n < LARGE_DATASET else 50


@contextmanager
def _stage(name, timings):
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, f"{type(exc).__name__}: {exc}") from exc
    finally:
        timings[name] = timings.get(name, 0.0) + time.perf_counter() - start


def _seed_for(random_state):
    if isinstance(random_state, np.random.RandomState):
        return as_seed_sequence(int(random_state.randint(0, 2**31 - 1)))
    return as_seed_sequence(random_state)


def _select(X, p, selection, alpha, p_prime, max_iter, seed):
    if selection == "dnc":
        return select_landmarks_dnc(X, p, alpha, p_prime, max_iter, seed, dividing="light")
    if selection == "dnc-kmeans":
        return select_landmarks_dnc(X, p, alpha, p_prime, max_iter, seed, dividing="kmeans")
    if selection == "kmeans":
        return select_landmarks_kmeans(X, p, max_iter, seed)
    return select_landmarks_random(X, p, seed)


class _LandmarkParams:
    def _check_landmark_params(self, n):
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}, got {self.selection!r}")
        if self.knn not in KNN_METHODS:
            raise ValueError(f"knn must be one of {KNN_METHODS}, got {self.knn!r}")
        if self.n_landmarks < 1 or self.n_neighbors < 1:
            raise ValueError("n_landmarks and n_neighbors must be positive")
        alpha = default_alpha(n) if self.alpha is None else self.alpha
        if alpha < 2:
            raise ValueError(f"alpha must be >= 2, got {alpha}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        p = min(self.n_landmarks, n)
        K = min(self.n_neighbors, p)
        k_prime = min(max(K, int(round(self.k_prime_factor * K))), p)
        p_prime = min(max(alpha, int(round(self.p_prime_factor * p))), n)
        return p, K, alpha, k_prime, p_prime

    def _affinity(self, X, landmarks, K, k_prime):
        if self.knn == "approx":
            neighbors = approx_knn(X, landmarks, K, k_prime)
        else:
            neighbors = exact_knn(X, landmarks, K)
        sigma = estimate_bandwidth(neighbors, self.sigma)
        return neighbors, build_affinity(neighbors, sigma, landmarks.p)


class LandmarkAffinity(_LandmarkParams, TransformerMixin, BaseEstimator):
    """Select landmarks and map data to its sparse Gaussian affinity to them.

    ``fit_transform`` on the training data uses the subset structure of the
    selection for the approximate search; ``transform`` on new data falls back
    to an exact scan over the landmarks, keeping the fitted bandwidth.

    Parameters
    ----------
    n_landmarks : int, default=1000
    n_neighbors : int, default=5
        Nonzeros per row of the affinity.
    alpha : int or None, default=None
        Most subsets a single split may create. ``None`` picks 200 below
        100 000 points and 50 otherwise.
    k_prime_factor, p_prime_factor : float, default=10
        Candidate-list length and light-k-means sample size, as multiples of
        ``n_neighbors`` and ``n_landmarks``.
    selection : {"dnc", "dnc-kmeans", "kmeans", "random"}, default="dnc"
    knn : {"approx", "exact"}, default="approx"
    sigma : "mean_knn", "fixed:V" or float, default="mean_knn"
    max_iter : int, default=5
        Lloyd iterations per split during selection.
    random_state : int, SeedSequence or None
    """

    def __init__(
        self,
        n_landmarks=1000,
        n_neighbors=5,
        alpha=None,
        k_prime_factor=10,
        p_prime_factor=10,
        selection="dnc",
        knn="approx",
        sigma="mean_knn",
        max_iter=5,
        random_state=None,
    ):
        self.n_landmarks = n_landmarks
        self.n_neighbors = n_neighbors
        self.alpha = alpha
        self.k_prime_factor = k_prime_factor
        self.p_prime_factor = p_prime_factor
        self.selection = selection
        self.knn = knn
        self.sigma = sigma
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        self.fit_transform(X)
        return self

    def fit_transform(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        p, K, alpha, k_prime, p_prime = self._check_landmark_params(X.shape[0])
        seed = _seed_for(self.random_state)
        self.landmarks_ = _select(X, p, self.selection, alpha, p_prime, self.max_iter, child_seed(seed, 0))
        self.n_features_in_ = X.shape[1]
        neighbors, affinity = self._affinity(X, self.landmarks_, min(K, self.landmarks_.p), min(k_prime, self.landmarks_.p))
        self.sigma_ = affinity.sigma
        return affinity.matrix

    def transform(self, X):
        check_is_fitted(self, "landmarks_")
        X = check_array(X, dtype=np.float64)
        K = min(self.n_neighbors, self.landmarks_.p)
        neighbors = exact_knn(X, self.landmarks_, K)
        return build_affinity(neighbors, self.sigma_, self.landmarks_.p).matrix


class DnCSpectralClustering(_LandmarkParams, ClusterMixin, BaseEstimator):
    """Large-scale spectral clustering on a point/landmark bipartite graph.

    Landmarks come from divide-and-conquer selection, each point keeps
    Gaussian affinities to its ``n_neighbors`` nearest landmarks, and the
    graph is cut through the small landmark-side eigenproblem.

    Parameters
    ----------
    n_clusters : int, default=2
    n_landmarks : int, default=1000
        Capped at the number of samples.
    n_neighbors, alpha, k_prime_factor, p_prime_factor, selection, knn, sigma, max_iter
        As in :class:`LandmarkAffinity`.
    final_max_iter : int, default=100
        Lloyd iterations of the final k-means on the embedding.
    random_state : int, SeedSequence or None

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    landmarks_ : LandmarkSet
    affinity_ : scipy.sparse.csr_matrix of shape (n_samples, n_landmarks)
    sigma_ : float
    eigenvalues_ : ndarray of shape (n_clusters,)
        Bottom eigenvalues of the landmark-side problem.
    embedding_ : SpectralEmbedding
    timings_ : dict
        Wall-clock seconds per phase plus ``total``.
    """

    def __init__(
        self,
        n_clusters=2,
        n_landmarks=1000,
        n_neighbors=5,
        alpha=None,
        k_prime_factor=10,
        p_prime_factor=10,
        selection="dnc",
        knn="approx",
        sigma="mean_knn",
        max_iter=5,
        final_max_iter=100,
        random_state=None,
    ):
        self.n_clusters = n_clusters
        self.n_landmarks = n_landmarks
        self.n_neighbors = n_neighbors
        self.alpha = alpha
        self.k_prime_factor = k_prime_factor
        self.p_prime_factor = p_prime_factor
        self.selection = selection
        self.knn = knn
        self.sigma = sigma
        self.max_iter = max_iter
        self.final_max_iter = final_max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=1)
        n = X.shape[0]
        p, K, alpha, k_prime, p_prime = self._check_landmark_params(n)
        if not 1 <= self.n_clusters <= p:
            raise ValueError(f"n_clusters={self.n_clusters} must be between 1 and the {p} landmarks")
        seed = _seed_for(self.random_state)
        timings = {}
        start = time.perf_counter()

        with _stage("selection", timings):
            landmarks = _select(X, p, self.selection, alpha, p_prime, self.max_iter, child_seed(seed, 0))
        with _stage("similarity", timings):
            K = min(K, landmarks.p)
            neighbors, affinity = self._affinity(X, landmarks, K, min(max(k_prime, K), landmarks.p))
        with _stage("partitioning", timings):
            deg = degrees(affinity)
            L_R = reduced_laplacian(affinity, deg)
            spectrum = solve_reduced(L_R, deg.d_r[deg.kept_landmarks], self.n_clusters)
            embedding = lift(affinity, deg, spectrum)
        with _stage("discretization", timings):
            labels = cluster_embedding(embedding, self.n_clusters, child_seed(seed, 1), self.final_max_iter)
        timings["total"] = time.perf_counter() - start

        self.n_features_in_ = X.shape[1]
        self.alpha_ = alpha
        self.landmarks_ = landmarks
        self.neighbors_ = neighbors
        self.affinity_ = affinity.matrix
        self.sigma_ = affinity.sigma
        self.degrees_ = deg
        self.spectrum_ = spectrum
        self.eigenvalues_ = spectrum.lambdas
        self.embedding_ = embedding
        self.labels_ = labels
        self.timings_ = timings
        return self

    def predict(self, X):
        """Lift new points into the fitted embedding and return the cluster
        whose embedding centroid is nearest."""
        check_is_fitted(self, "labels_")
        X = check_array(X, dtype=np.float64)
        K = self.neighbors_.K
        aff = build_affinity(exact_knn(X, self.landmarks_, K), self.sigma_, self.landmarks_.p)
        Bk = aff.matrix[:, self.degrees_.kept_landmarks]
        d_x = np.asarray(aff.matrix.sum(axis=1)).ravel()
        u = (Bk @ self.spectrum_.v) / d_x[:, None] / (1.0 - self.spectrum_.gammas[None, :])
        u /= np.maximum(np.abs(u).sum(axis=1), np.finfo(np.float64).tiny)[:, None]
        centroids = np.zeros((self.n_clusters, u.shape[1]))
        for c in range(self.n_clusters):
            members = self.labels_ == c
            if members.any():
                centroids[c] = self.embedding_.u_normalized[members].mean(axis=0)
        d2 = ((u[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=-1)
        return np.argmin(d2, axis=1)
