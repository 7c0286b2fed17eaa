"""Divide-and-conquer landmark spectral clustering."""

from .datasets import BlobParams, DataMatrix, SyntheticSpec, generate, load_csv, write_csv
from .estimator import DnCSpectralClustering, LandmarkAffinity
from .exceptions import DatasetError, PartitionError, StageError
from .kmeans import KMeansResult, assign_nearest, kmeans, light_kmeans
from .landmarks import (
    LandmarkSet,
    allocate_counts,
    select_landmarks_dnc,
    select_landmarks_kmeans,
    select_landmarks_random,
)
from .metrics import accuracy, nmi
from .partition import (
    cluster_embedding,
    degrees,
    full_bipartite_oracle,
    lift,
    reduced_laplacian,
    solve_reduced,
    transfer_cut,
)
from .pipeline import RunConfig, RunReport, emit_report, run_pipeline
from .similarity import (
    NeighborLists,
    SparseAffinity,
    approx_knn,
    build_affinity,
    estimate_bandwidth,
    exact_knn,
    landmark_knn_table,
)

__version__ = "0.1.0"
