"""End-to-end runs with per-phase timings, repeats and machine-readable reports."""

import csv
import io
import json
import logging
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .datasets import SyntheticSpec, generate, load_csv
from .estimator import KNN_METHODS, PHASES, SELECTIONS, DnCSpectralClustering, default_alpha
from .exceptions import StageError
from .metrics import accuracy, nmi

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    k: int
    input: Optional[str] = None
    label_column: Optional[int] = None
    synthetic: Optional[SyntheticSpec] = None
    p: int = 1000
    K: int = 5
    alpha: Optional[int] = None
    k_prime_factor: float = 10
    p_prime_factor: float = 10
    selection: str = "dnc"
    knn: str = "approx"
    sigma: str = "mean_knn"
    max_iter: int = 5
    seed: int = 0
    repeats: int = 1
    labels_path: Optional[str] = None

    def validate(self):
        if (self.input is None) == (self.synthetic is None):
            raise ValueError("exactly one of input and synthetic must be given")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.p < self.k:
            raise ValueError(f"p={self.p} must be >= k={self.k}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.alpha is not None and self.alpha < 2:
            raise ValueError(f"alpha must be >= 2, got {self.alpha}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}")
        if self.knn not in KNN_METHODS:
            raise ValueError(f"knn must be one of {KNN_METHODS}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def echo(self):
        out = asdict(self)
        if self.synthetic is not None:
            out["synthetic"] = asdict(self.synthetic)
            out["synthetic"]["blob_params"]["box"] = list(self.synthetic.blob_params.box)
        return out


@dataclass
class RunReport:
    config: dict
    n: int
    d: int
    alpha: int
    seeds: list = field(default_factory=list)
    timings: list = field(default_factory=list)
    landmarks: list = field(default_factory=list)
    metrics: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    labels_path: Optional[str] = None
    labels: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self):
        out = {k: v for k, v in asdict(self).items() if k != "labels"}
        return out


def _mean_std(values):
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def _load(config):
    if config.synthetic is not None:
        return generate(config.synthetic)
    return load_csv(config.input, config.label_column)


def run_pipeline(config, data=None):
    """Cluster the configured dataset ``config.repeats`` times.

    Repeat ``r`` runs with seed ``config.seed + r``. When ground truth is
    available each repeat is scored with ACC and NMI and the summary holds
    mean and sample standard deviation. Failures surface as
    :class:`StageError` tagged with the failing stage.
    """
    try:
        config.validate()
    except ValueError as exc:
        raise StageError("config", str(exc), config.echo()) from exc
    if data is None:
        try:
            data = _load(config)
        except (ValueError, OSError) as exc:
            raise StageError("input", str(exc), config.echo()) from exc

    alpha = config.alpha if config.alpha is not None else default_alpha(data.n)
    report = RunReport(config=config.echo(), n=data.n, d=data.d, alpha=alpha)
    labels = None
    for r in range(config.repeats):
        seed = config.seed + r
        model = DnCSpectralClustering(
            n_clusters=config.k,
            n_landmarks=config.p,
            n_neighbors=config.K,
            alpha=alpha,
            k_prime_factor=config.k_prime_factor,
            p_prime_factor=config.p_prime_factor,
            selection=config.selection,
            knn=config.knn,
            sigma=config.sigma,
            max_iter=config.max_iter,
            random_state=seed,
        )
        try:
            model.fit(data.points)
        except StageError as exc:
            exc.config = config.echo()
            raise
        except ValueError as exc:
            raise StageError("config", str(exc), config.echo()) from exc
        labels = model.labels_
        report.seeds.append(seed)
        report.timings.append({k: float(v) for k, v in model.timings_.items()})
        report.landmarks.append(int(model.landmarks_.p))
        if data.labels is not None:
            report.metrics.append({"acc": accuracy(data.labels, labels), "nmi": nmi(data.labels, labels)})
        logger.info("repeat %d/%d done in %.3fs", r + 1, config.repeats, model.timings_["total"])

    summary = {}
    for phase in PHASES + ("total",):
        summary[f"time_{phase}"] = statistics.fmean(t[phase] for t in report.timings)
    if report.metrics:
        for name in ("acc", "nmi"):
            mean, std = _mean_std([m[name] for m in report.metrics])
            summary[f"{name}_mean"] = mean
            summary[f"{name}_std"] = std
    report.summary = summary
    report.labels = labels
    if config.labels_path:
        write_labels(labels, config.labels_path)
        report.labels_path = str(config.labels_path)
    return report


def write_labels(labels, path):
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels))


def read_labels(path):
    return np.array([int(line) for line in Path(path).read_text().split()], dtype=np.int64)


_CSV_SCALARS = ("k", "p", "K", "k_prime_factor", "p_prime_factor", "selection", "knn", "sigma", "max_iter", "seed", "repeats")


def emit_report(report, fmt="json"):
    """Serialize a report as one JSON object or a one-row CSV summary."""
    if fmt == "json":
        # repr floats round-trip exactly (at most 17 significant digits)
        return json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if fmt == "csv-summary":
        row = {"n": report.n, "d": report.d, "alpha": report.alpha}
        row.update({name: report.config[name] for name in _CSV_SCALARS})
        row["dataset"] = report.config["input"] or report.config["synthetic"]["shape"]
        row["landmarks"] = min(report.landmarks) if report.landmarks else 0
        for key, value in report.summary.items():
            row[key] = f"{value:.17g}" if isinstance(value, float) else value
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")
