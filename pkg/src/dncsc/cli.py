import argparse
import logging
import sys

from .datasets import SHAPES, BlobParams, SyntheticSpec, write_csv
from .estimator import KNN_METHODS, SELECTIONS
from .exceptions import StageError
from .pipeline import RunConfig, emit_report, run_pipeline


def _sigma(text):
    if text == "mean_knn":
        return text
    if text.startswith("fixed:"):
        try:
            value = float(text.split(":", 1)[1])
        except ValueError:
            value = -1.0
        if value > 0:
            return text
    raise argparse.ArgumentTypeError(f"expected mean_knn or fixed:V with V > 0, got {text!r}")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="dncsc",
        description="Divide-and-conquer landmark spectral clustering.",
    )
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="CSV file of numeric rows")
    src.add_argument("--synthetic", choices=SHAPES, help="generate a synthetic dataset")
    ap.add_argument("--label-column", type=int, default=None, help="0-based ground-truth column of --input")
    ap.add_argument("--n", type=int, default=10000, help="synthetic point count")
    ap.add_argument("--noise", type=float, default=None, help="synthetic jitter std (shape default if omitted)")
    ap.add_argument("--blobs", type=int, default=3, help="number of gaussian blobs")
    ap.add_argument("--blob-std", type=float, default=1.0)
    ap.add_argument("--dim", type=int, default=2, help="gaussian blob dimension")
    ap.add_argument("--data-seed", type=int, default=None, help="synthetic seed (defaults to --seed)")

    ap.add_argument("--k", type=int, required=True, help="number of clusters")
    ap.add_argument("--p", type=int, default=1000, help="number of landmarks")
    ap.add_argument("--K", type=int, default=5, help="nearest landmarks per point")
    ap.add_argument("--alpha", type=int, default=None, help="selection rate (200 below 100k points, else 50)")
    ap.add_argument("--kprime-factor", type=float, default=10)
    ap.add_argument("--pprime-factor", type=float, default=10)
    ap.add_argument("--selection", choices=SELECTIONS, default="dnc")
    ap.add_argument("--knn", choices=KNN_METHODS, default="approx")
    ap.add_argument("--sigma", type=_sigma, default="mean_knn", help="mean_knn or fixed:V")
    ap.add_argument("--max-iter", type=int, default=5, help="Lloyd iterations per split")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=1)

    ap.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    ap.add_argument("--labels", metavar="PATH", help="write predicted labels, one per line")
    ap.add_argument("--format", choices=("json", "csv-summary"), default="json")
    ap.add_argument("--export-data", metavar="PATH", help="also write the input dataset as CSV")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(args):
    synthetic = None
    if args.synthetic:
        synthetic = SyntheticSpec(
            shape=args.synthetic,
            n=args.n,
            noise=args.noise,
            blob_params=BlobParams(n_blobs=args.blobs, std=args.blob_std, n_features=args.dim),
            seed=args.seed if args.data_seed is None else args.data_seed,
        )
    return RunConfig(
        k=args.k,
        input=args.input,
        label_column=args.label_column,
        synthetic=synthetic,
        p=args.p,
        K=args.K,
        alpha=args.alpha,
        k_prime_factor=args.kprime_factor,
        p_prime_factor=args.pprime_factor,
        selection=args.selection,
        knn=args.knn,
        sigma=args.sigma,
        max_iter=args.max_iter,
        seed=args.seed,
        repeats=args.repeats,
        labels_path=args.labels,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    config = config_from_args(args)
    try:
        if args.export_data:
            from .pipeline import _load

            try:
                write_csv(_load(config), args.export_data)
            except (ValueError, OSError) as exc:
                raise StageError("input", str(exc)) from exc
        report = run_pipeline(config)
        text = emit_report(report, args.format)
        if args.report:
            try:
                with open(args.report, "w") as fh:
                    fh.write(text if text.endswith("\n") else text + "\n")
            except OSError as exc:
                raise StageError("report", str(exc)) from exc
        else:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
    except StageError as exc:
        print(f"dncsc: error {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
