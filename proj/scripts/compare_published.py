#!/usr/bin/env python3
"""Compare a report CSV against the published per-cell results.

A cell passes when |measured EER - published EER| <= published std + margin.
t-DCF differences are printed but not judged.
"""
import argparse
import csv
import sys

# report manifest name -> column prefix in the published CSV
SETS = {"asvspoof_eval": "asv", "asv": "asv", "itw": "itw"}


def mean_std(cell):
    if cell in ("", "-"):
        return None
    mean, _, std = cell.partition("±")
    return float(mean), float(std or 0.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("report", help="output of `spoofbench report --format csv`")
    ap.add_argument("published", help="published results CSV")
    ap.add_argument("--margin", type=float, default=4.0, help="extra EER points allowed")
    args = ap.parse_args()

    with open(args.published, newline="") as f:
        published = {(r["model"], r["feature"], r["length"]): r for r in csv.DictReader(f)}

    checked = failed = 0
    with open(args.report, newline="") as f:
        for row in csv.DictReader(f):
            if row["section"] != "cell" or row["eval_manifest"] not in SETS:
                continue
            ref = published.get((row["model"], row["feature"], row["length"]))
            if ref is None:
                continue
            prefix = SETS[row["eval_manifest"]]
            eer, _ = mean_std(row["eer"])
            ref_eer = float(ref[prefix + "_eer_mean"])
            bound = float(ref[prefix + "_eer_std"]) + args.margin
            ok = abs(eer - ref_eer) <= bound
            checked += 1
            failed += not ok
            extra = ""
            tdcf = mean_std(row["tdcf"])
            if tdcf and ref.get(prefix + "_tdcf_mean"):
                extra = f"  t-DCF {tdcf[0]:.3f} vs {float(ref[prefix + '_tdcf_mean']):.3f}"
            print(f"{'PASS' if ok else 'FAIL'} {row['eval_manifest']} {row['model']} "
                  f"{row['feature']} {row['length']}: EER {eer:.2f} vs {ref_eer:.2f} "
                  f"(bound {bound:.2f}){extra}")

    print(f"{checked - failed}/{checked} cells within bound")
    return 1 if failed or not checked else 0


if __name__ == "__main__":
    sys.exit(main())
