"""Generates the t-DCF golden cases under tests/fixtures/tdcf/.

Each case is a CM score file, a matching CM protocol, an ASV score file and
the minimum normalized t-DCF computed by tdcf_reference.py.
"""

import json
import pathlib

import numpy as np

import tdcf_reference as ref

OUT = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "tdcf"


def make_case(rng, idx):
    n_bona = int(rng.integers(5, 40))
    n_spoof = int(rng.integers(5, 40))
    sep = float(rng.uniform(0.0, 3.0))
    bona = rng.normal(sep, 1.0, n_bona)
    spoof = rng.normal(0.0, 1.0, n_spoof)
    if idx % 4 == 1:  # coarse scores to exercise ties
        bona = np.round(bona, 1)
        spoof = np.round(spoof, 1)
    if idx == 19:  # uninformative countermeasure
        bona = np.full(n_bona, 0.25)
        spoof = np.full(n_spoof, 0.25)
    n_tar, n_non, n_sp = (int(rng.integers(10, 60)) for _ in range(3))
    tar = rng.normal(4.0, 1.5, n_tar)
    non = rng.normal(-2.0, 1.5, n_non)
    spoof_asv = rng.normal(float(rng.uniform(-1.0, 3.0)), 1.5, n_sp)
    return bona, spoof, tar, non, spoof_asv


def main():
    rng = np.random.default_rng(20190101)
    OUT.mkdir(parents=True, exist_ok=True)
    expected = {}
    for idx in range(20):
        bona, spoof, tar, non, spoof_asv = make_case(rng, idx)
        name = f"case{idx:02d}"
        cm_lines, proto_lines = [], []
        order = [("B", s, "bonafide") for s in bona] + [("S", s, "spoof") for s in spoof]
        perm = rng.permutation(len(order))
        for k in perm:
            tag, score, key = order[k]
            utt = f"CM_{tag}_{k:04d}"
            cm_lines.append(f"{utt} {float(score)!r}")
            attack = "-" if key == "bonafide" else "A07"
            proto_lines.append(f"SPK_{k % 7:02d} {utt} - {attack} {key}")
        asv_lines = [f"{float(s)!r} target" for s in tar]
        asv_lines += [f"{float(s)!r} nontarget" for s in non]
        asv_lines += [f"{float(s)!r} spoof" for s in spoof_asv]
        (OUT / f"{name}_cm.txt").write_text("\n".join(cm_lines) + "\n")
        (OUT / f"{name}_protocol.txt").write_text("\n".join(proto_lines) + "\n")
        (OUT / f"{name}_asv.txt").write_text("\n".join(asv_lines) + "\n")
        expected[name] = ref.min_tdcf(bona, spoof, tar, non, spoof_asv)
    (OUT / "expected.json").write_text(json.dumps(expected, indent=1) + "\n")


if __name__ == "__main__":
    main()
