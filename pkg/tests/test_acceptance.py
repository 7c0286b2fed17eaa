"""End-to-end acceptance criteria.

Each test prints one ``PASS``/``FAIL`` line (visible even under pytest's
output capture) and then asserts the criterion at its stated tolerance.
"""

import csv
import io
import json
import time

import numpy as np
import pytest

from conftest import oracle_gap, random_connected_affinity
from dncsc import DnCSpectralClustering
from dncsc.datasets import BlobParams, SyntheticSpec, generate
from dncsc.kmeans import kmeans, light_kmeans
from dncsc.landmarks import select_landmarks_dnc, select_landmarks_kmeans, select_landmarks_random
from dncsc.metrics import accuracy, nmi
from dncsc.partition import full_bipartite_oracle, transfer_cut
from dncsc.pipeline import RunConfig, emit_report, run_pipeline
from dncsc.similarity import approx_knn, exact_knn, knn_recall

pytestmark = pytest.mark.acceptance

BLOBS_20 = BlobParams(n_blobs=20)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}")

    return emit


def test_criterion_1_two_moons_quality(report):
    start = time.perf_counter()
    config = RunConfig(
        k=2, synthetic=SyntheticSpec("two_moons", 100_000, noise=0.05, seed=0),
        p=500, K=5, alpha=50, repeats=10, seed=0,
    )
    r = run_pipeline(config)
    elapsed = time.perf_counter() - start
    acc, score = r.summary["acc_mean"], r.summary["nmi_mean"]
    ok = acc >= 0.99 and score >= 0.95 and elapsed < 60
    report(1, "two-moons quality", ok,
           f"ACC {acc:.4f}±{r.summary['acc_std']:.4f} (>=0.99), NMI {score:.4f}±{r.summary['nmi_std']:.4f} (>=0.95), {elapsed:.1f}s (<60s)")
    assert acc >= 0.99 and score >= 0.95
    assert elapsed < 60


def test_criterion_2_transfer_cut_matches_oracle(report):
    start = time.perf_counter()
    r = np.random.default_rng(2024)
    worst_eig, checked_labels, label_failures = 0.0, 0, 0
    for i in range(200):
        B = random_connected_affinity(r, n_max=50, p_max=8)
        p = B.shape[1]
        k = int(r.integers(2, p + 1))
        labels, spectrum, _ = transfer_cut(B, k, seed=i)
        orc = full_bipartite_oracle(B, k, seed=i)
        worst_eig = max(worst_eig, float(np.max(np.abs(spectrum.lambdas - orc.gammas * (2 - orc.gammas)))))
        gap = oracle_gap(full_bipartite_oracle(B, k + 1).gammas, k)
        if gap > 1e-6:
            checked_labels += 1
            label_failures += accuracy(orc.labels, labels) != 1.0
    elapsed = time.perf_counter() - start
    ok = worst_eig <= 1e-8 and label_failures == 0 and elapsed < 30
    report(2, "transfer cut vs full bipartite oracle", ok,
           f"max |lambda - gamma(2-gamma)| {worst_eig:.2e} (<=1e-8), label mismatches {label_failures}/{checked_labels} gapped instances, {elapsed:.1f}s (<30s)")
    assert worst_eig <= 1e-8
    assert label_failures == 0
    assert elapsed < 30


def test_criterion_3_approximate_knn_fidelity(report):
    start = time.perf_counter()
    recalls, diffs = [], []
    for seed in range(10):
        data = generate(SyntheticSpec("gaussian_blobs", 50_000, blob_params=BLOBS_20, seed=seed))
        lm = select_landmarks_dnc(data.points, 500, alpha=50, seed=seed)
        recalls.append(knn_recall(approx_knn(data.points, lm, 5, 50), exact_knn(data.points, lm, 5)))
        accs = []
        for knn in ("approx", "exact"):
            est = DnCSpectralClustering(
                n_clusters=20, n_landmarks=500, n_neighbors=5, alpha=50, k_prime_factor=10,
                knn=knn, random_state=seed,
            ).fit(data.points)
            accs.append(accuracy(data.labels, est.labels_))
        diffs.append(abs(accs[0] - accs[1]))
    elapsed = time.perf_counter() - start
    mean_diff = float(np.mean(diffs))
    ok = min(recalls) >= 0.90 and mean_diff <= 0.03 and elapsed < 60
    report(3, "approximate KNN fidelity", ok,
           f"recall min {min(recalls):.4f} mean {np.mean(recalls):.4f} (>=0.90), mean |dACC| {mean_diff:.4f} (<=0.03), {elapsed:.1f}s (<60s)")
    assert min(recalls) >= 0.90
    assert mean_diff <= 0.03
    assert elapsed < 60


def test_criterion_4_selection_quality(report):
    start = time.perf_counter()
    rss = {"dnc": [], "random": [], "kmeans": []}
    for seed in range(10):
        X = generate(SyntheticSpec("gaussian_blobs", 50_000, blob_params=BLOBS_20, seed=seed)).points
        rss["dnc"].append(select_landmarks_dnc(X, 500, alpha=50, seed=seed).total_rss)
        rss["random"].append(select_landmarks_random(X, 500, seed=seed).total_rss)
        rss["kmeans"].append(select_landmarks_kmeans(X, 500, seed=seed).total_rss)
    elapsed = time.perf_counter() - start
    mean = {k: float(np.mean(v)) for k, v in rss.items()}
    ratio = mean["dnc"] / mean["kmeans"]
    ok = mean["dnc"] <= mean["random"] and ratio <= 1.25 and elapsed < 120
    report(4, "selection quality ordering", ok,
           f"mean RSS dnc {mean['dnc']:.1f}, random {mean['random']:.1f}, kmeans {mean['kmeans']:.1f}; dnc/kmeans {ratio:.3f} (<=1.25), {elapsed:.1f}s (<120s)")
    assert mean["dnc"] <= mean["random"]
    assert ratio <= 1.25
    assert elapsed < 120


def test_criterion_5_light_kmeans_degeneracy(report):
    start = time.perf_counter()
    r = np.random.default_rng(5)
    mismatches = 0
    for i in range(50):
        n = int(r.integers(5, 400))
        X = r.normal(size=(n, int(r.integers(1, 6)))) * r.uniform(0.1, 10)
        k = int(r.integers(1, min(n, 12) + 1))
        seed = int(r.integers(0, 2**31))
        a = light_kmeans(X, k, p_prime=n + int(r.integers(0, 3)), max_iter=5, seed=seed)
        b = kmeans(X, k, max_iter=5, seed=seed)
        same = (np.array_equal(a.assignments, b.assignments) and np.array_equal(a.centers, b.centers)
                and a.rss == b.rss)
        mismatches += not same
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 10
    report(5, "light-k-means degeneracy", ok, f"{50 - mismatches}/50 identical, {elapsed:.1f}s (<10s)")
    assert mismatches == 0
    assert elapsed < 10


def _selection_time(n, seed):
    X = generate(SyntheticSpec("gaussian_blobs", n, blob_params=BLOBS_20, seed=seed)).points
    start = time.perf_counter()
    select_landmarks_dnc(X, 1000, alpha=50, seed=seed)
    return time.perf_counter() - start


def test_criterion_6_selection_scales_linearly(report):
    start = time.perf_counter()
    _selection_time(20_000, 0)  # warm caches and allocator
    ratios = [_selection_time(200_000, 0) / _selection_time(100_000, 0) for _ in range(5)]
    median = float(np.median(ratios))
    elapsed = time.perf_counter() - start
    ok = 1.5 <= median <= 2.8 and elapsed < 120
    report(6, "linear scaling of selection", ok,
           f"median t(200k)/t(100k) {median:.2f} in [1.5, 2.8] (trials {', '.join(f'{x:.2f}' for x in ratios)}), {elapsed:.1f}s (<120s)")
    assert 1.5 <= median <= 2.8
    assert elapsed < 120


def test_criterion_7_metric_examples(report):
    start = time.perf_counter()
    checks = [
        abs(accuracy([0, 0, 1, 1], [1, 1, 0, 0]) - 1.0) <= 1e-12,
        abs(accuracy([0, 0, 1, 1], [0, 1, 0, 1]) - 0.5) <= 1e-12,
        abs(accuracy([2, 0, 1, 1, 5], [2, 0, 1, 1, 5]) - 1.0) <= 1e-12,
        abs(nmi([0, 0, 1, 1, 2, 2], [0, 0, 1, 1, 2, 2]) - 1.0) <= 1e-12,
        abs(nmi([0, 0, 1, 1], [0, 0, 0, 0]) - 0.0) <= 1e-12,
        abs(nmi([0, 0, 0], [4, 4, 4]) - 1.0) <= 1e-12,
    ]
    r = np.random.default_rng(7)
    perm_failures = 0
    for _ in range(100):
        n = int(r.integers(2, 300))
        truth, pred = r.integers(0, 5, n), r.integers(0, 6, n)
        relabeled = r.permutation(6)[pred]
        perm_failures += not (
            abs(accuracy(truth, pred) - accuracy(truth, relabeled)) <= 1e-12
            and abs(nmi(truth, pred) - nmi(truth, relabeled)) <= 1e-12
            and abs(nmi(truth, pred) - nmi(pred, truth)) <= 1e-12
        )
    elapsed = time.perf_counter() - start
    ok = all(checks) and perm_failures == 0 and elapsed < 5
    report(7, "metrics", ok, f"{sum(checks)}/{len(checks)} examples, {100 - perm_failures}/100 permutation pairs, {elapsed:.2f}s (<5s)")
    assert all(checks)
    assert perm_failures == 0
    assert elapsed < 5


COMBINATIONS = [(s, k) for s in ("dnc", "dnc-kmeans", "kmeans") for k in ("approx", "exact")]


def _well_formed(r):
    parsed = json.loads(emit_report(r, "json"))
    rows = list(csv.DictReader(io.StringIO(emit_report(r, "csv-summary"))))
    phases = {"selection", "similarity", "partitioning", "discretization", "total"}
    return (
        len(rows) == 1
        and set(parsed["timings"][0]) == phases
        and all(v >= 0 for v in parsed["timings"][0].values())
        and 0 <= parsed["metrics"][0]["acc"] <= 1
        and parsed["landmarks"] == [1000]
    )


def test_criterion_8_ablation_parity(report):
    start = time.perf_counter()
    spec = SyntheticSpec("two_moons", 20_000, noise=0.05, seed=0)
    data = generate(spec)
    wins, malformed = 0, 0
    for trial in range(5):
        totals = {}
        for selection, knn in COMBINATIONS:
            config = RunConfig(k=2, synthetic=spec, selection=selection, knn=knn, seed=trial)
            r = run_pipeline(config, data=data)
            malformed += not _well_formed(r)
            totals[(selection, knn)] = r.timings[0]["total"]
        wins += min(totals, key=totals.get) == ("dnc", "approx")
    elapsed = time.perf_counter() - start
    ok = malformed == 0 and wins >= 4 and elapsed < 120
    report(8, "ablation harness parity", ok,
           f"{30 - malformed}/30 well-formed reports, dnc+approx fastest in {wins}/5 trials (>=4), {elapsed:.1f}s (<120s)")
    assert malformed == 0
    assert wins >= 4
    assert elapsed < 120
