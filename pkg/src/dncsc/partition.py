"""Bipartite graph partitioning by transfer cuts.

Given the N x p affinity B between points and landmarks, the bottom
eigenvectors of the (N + p)-node bipartite graph are recovered from a p x p
generalized problem on the landmark side and lifted back to the points
through the transition matrix ``D_X^-1 B``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .exceptions import PartitionError
from .kmeans import kmeans

# a few ulps below 1: absorbs rounding past 1 without moving genuine
# eigenvalues close to 1, whose 1 - gamma scaling matters in the lift
LAMBDA_MAX = 1.0 - 1e-15
GAMMA_MAX = 1.0 - 1e-9
ORACLE_MAX_NODES = 512


@dataclass
class DegreePair:
    d_x: np.ndarray
    d_r: np.ndarray
    kept_landmarks: np.ndarray

    @property
    def pruned_landmarks(self):
        return np.setdiff1d(np.arange(self.d_r.size), self.kept_landmarks)


@dataclass
class ReducedSpectrum:
    lambdas: np.ndarray
    v: np.ndarray
    gammas: np.ndarray


@dataclass
class SpectralEmbedding:
    u: np.ndarray
    u_normalized: np.ndarray


@dataclass
class OracleResult:
    gammas: np.ndarray
    embedding: np.ndarray
    labels: np.ndarray


def _as_csr(B):
    if hasattr(B, "matrix"):
        B = B.matrix
    return sp.csr_matrix(B, dtype=np.float64)


def degrees(B):
    """Row and column sums of B; landmarks with zero column sum are dropped."""
    B = _as_csr(B)
    d_x = np.asarray(B.sum(axis=1)).ravel()
    d_r = np.asarray(B.sum(axis=0)).ravel()
    zero_rows = np.flatnonzero(d_x <= 0)
    if zero_rows.size:
        raise PartitionError(f"point {zero_rows[0]} has no positive affinity to any landmark")
    return DegreePair(d_x, d_r, np.flatnonzero(d_r > 0))


def reduced_laplacian(B, deg):
    """``L_R = D_R - B^T D_X^-1 B`` restricted to the kept landmarks."""
    B = _as_csr(B)
    if B.shape != (deg.d_x.size, deg.d_r.size):
        raise ValueError(f"B has shape {B.shape}, degrees describe {(deg.d_x.size, deg.d_r.size)}")
    Bk = B[:, deg.kept_landmarks]
    scaled = sp.diags(1.0 / np.sqrt(deg.d_x)) @ Bk
    gram = (scaled.T @ scaled).toarray()
    L = np.diag(deg.d_r[deg.kept_landmarks]) - gram
    return 0.5 * (L + L.T)


def _canonical_signs(vectors, reference=None):
    """Flip columns so the largest-magnitude entry of ``reference`` is positive."""
    ref = vectors if reference is None else reference
    pivot = np.argmax(np.abs(ref), axis=0)
    signs = np.sign(ref[pivot, np.arange(ref.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def solve_reduced(L_R, d_r, k):
    """Bottom-k eigenpairs of ``L_R v = lambda D_R v``.

    Solved as the symmetric problem ``D^-1/2 L D^-1/2 w = lambda w`` with
    ``v = D^-1/2 w``, so the returned vectors are D_R-orthonormal. Eigenvalues
    are clamped into ``[0, LAMBDA_MAX]`` before ``gamma = 1 - sqrt(1 - lambda)``.
    """
    L_R = np.asarray(L_R, dtype=np.float64)
    d_r = np.asarray(d_r, dtype=np.float64)
    m = L_R.shape[0]
    if L_R.shape != (m, m) or d_r.shape != (m,):
        raise ValueError(f"L_R {L_R.shape} and d_r {d_r.shape} do not match")
    if not 1 <= k <= m:
        raise ValueError(f"k={k} must be between 1 and the {m} retained landmarks")
    if not (d_r > 0).all():
        raise ValueError("landmark degrees must be strictly positive")
    s = 1.0 / np.sqrt(d_r)
    M = s[:, None] * L_R * s[None, :]
    M = 0.5 * (M + M.T)
    try:
        lam, w = scipy.linalg.eigh(M, subset_by_index=[0, k - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise PartitionError(f"reduced eigenproblem did not converge: {exc}") from exc
    lam = np.clip(lam, 0.0, LAMBDA_MAX)
    v = _canonical_signs(s[:, None] * w)
    return ReducedSpectrum(lam, v, 1.0 - np.sqrt(1.0 - lam))


def _normalize_rows(u):
    norms = np.abs(u).sum(axis=1)
    out = np.zeros_like(u)
    nz = norms > 0
    out[nz] = u[nz] / norms[nz, None]
    return out


def lift(B, deg, spectrum):
    """Point-side eigenvectors ``u_i = T v_i / (1 - gamma_i)`` with ``T = D_X^-1 B``."""
    B = _as_csr(B)
    if (spectrum.gammas >= GAMMA_MAX).any():
        raise PartitionError("eigenvalue at 1: the bipartite graph is degenerate")
    Bk = B[:, deg.kept_landmarks]
    u = (Bk @ spectrum.v) / deg.d_x[:, None]
    u /= 1.0 - spectrum.gammas[None, :]
    return SpectralEmbedding(u, _normalize_rows(u))


def cluster_embedding(embedding, k, seed=0, max_iter=100):
    """k-means on the row-normalized embedding.

    Rows that are entirely zero take the label of the nearest nonzero row.
    """
    U = embedding.u_normalized if hasattr(embedding, "u_normalized") else np.asarray(embedding)
    n = U.shape[0]
    nonzero = np.abs(U).sum(axis=1) > 0
    labels = np.zeros(n, dtype=np.int64)
    if not nonzero.any():
        return labels
    res = kmeans(U[nonzero], min(k, int(nonzero.sum())), max_iter, seed)
    labels[nonzero] = res.assignments
    if not nonzero.all():
        # nearest nonzero row to the origin is the one with smallest norm
        rows = U[nonzero]
        nearest = int(np.argmin(np.einsum("ij,ij->i", rows, rows)))
        labels[~nonzero] = res.assignments[nearest]
    return labels


def transfer_cut(B, k, seed=0, max_iter=100):
    """Full partitioning pipeline on an affinity; returns labels and intermediates."""
    deg = degrees(B)
    L_R = reduced_laplacian(B, deg)
    spectrum = solve_reduced(L_R, deg.d_r[deg.kept_landmarks], k)
    emb = lift(B, deg, spectrum)
    return cluster_embedding(emb, k, seed, max_iter), spectrum, emb


def full_bipartite_oracle(B, k, seed=0, max_iter=100):
    """Brute-force reference: dense generalized eigensolve of the whole
    ``(N + p)``-node bipartite Laplacian, for small instances only."""
    B = _as_csr(B)
    n, p = B.shape
    if n + p > ORACLE_MAX_NODES:
        raise ValueError(f"oracle limited to {ORACLE_MAX_NODES} nodes, got {n + p}")
    dense = B.toarray()
    dense = dense[:, dense.sum(axis=0) > 0]
    p_kept = dense.shape[1]
    W = np.zeros((n + p_kept, n + p_kept))
    W[:n, n:] = dense
    W[n:, :n] = dense.T
    D = W.sum(axis=1)
    if (D <= 0).any():
        raise PartitionError("oracle graph has an isolated node")
    L = np.diag(D) - W
    gam, f = scipy.linalg.eigh(L, np.diag(D), subset_by_index=[0, k - 1])
    f = _canonical_signs(f, reference=f[n:])
    u = f[:n]
    labels = cluster_embedding(_normalize_rows(u), k, seed, max_iter)
    return OracleResult(np.clip(gam, 0.0, None), u, labels)
