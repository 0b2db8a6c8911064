"""Recompute the MovieLens-20m / EASE table at k=20 and compare to published values.

Needs the raw ratings.csv and an EASE top-k predictions file
(user_id,item_id,score, rank order per user), neither of which is shipped:

    python scripts/reproduce_tables.py ratings.csv ease_predictions.csv [--threads 8]
"""

import argparse
import sys
from pathlib import Path

from recvariants.harness import evaluate_matrix, registry_default
from recvariants.ingest import SplitConfig, extract_ground_truth, parse_interactions, parse_predictions, split_protocol
from recvariants.published import ML20M_EASE_K, ML20M_EASE_TOLERANCE, compare


def load_ratings(path):
    raw = Path(path).read_bytes()
    header, _, body = raw.partition(b"\n")
    # MovieLens headers use userId/movieId
    header = header.replace(b"userId", b"user_id").replace(b"movieId", b"item_id")
    return parse_interactions(header + b"\n" + body)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("ratings")
    ap.add_argument("predictions")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    train, test = split_protocol(load_ratings(args.ratings), SplitConfig(4.5, 0.2))
    truth = extract_ground_truth(test)
    preds = parse_predictions(Path(args.predictions).read_bytes())
    report = evaluate_matrix(preds, truth, train, registry_default(), ML20M_EASE_K,
                             workers=args.threads, dataset="ml-20m")
    rows = compare(report, ML20M_EASE_TOLERANCE)
    print(f"{'variant':32s} {'published':>10s} {'computed':>10s}")
    for name, ref, got, ok in rows:
        print(f"{name:32s} {ref:10.3f} {got:10.4f} {'' if ok else 'MISMATCH'}")
    return 0 if all(ok for *_, ok in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
