import math

import numpy as np
import pytest

import spoofbench as sb


def test_models_listed():
    assert len(sb.MODELS) == 12
    assert sb.parameter_count("LSTM") == 1842690


def test_eer_examples():
    assert sb.compute_eer([3, 4, 5], [0, 1, 2])[0] == 0.0
    assert sb.compute_eer([0, 1, 2], [3, 4, 5])[0] == 1.0
    with pytest.raises(RuntimeError):
        sb.compute_eer([1.0, 2.0], [])


def test_tdcf_perfect_and_flat():
    target = [5 + 0.1 * i for i in range(20)]
    nontarget = [-5 - 0.1 * i for i in range(20)]
    spoof = [5.5 + 0.05 * i for i in range(20)]
    assert sb.compute_tdcf([2, 3], [-1, 0], target, nontarget, spoof) == 0.0
    assert sb.compute_tdcf([0.3, 0.3], [0.3, 0.3], target, nontarget, spoof) == 1.0


def test_length_policy_and_features():
    x = np.sin(np.arange(20000, dtype=np.float32) * 0.05)
    fixed = sb.apply_length_policy(x, "fixed4s", seed=3, utt_id="a")
    assert fixed.shape == (64000,)
    again = sb.apply_length_policy(x, "fixed4s", seed=3, utt_id="a")
    assert np.array_equal(fixed, again)
    spec = sb.extract_features(fixed, "logspec")
    assert spec.shape == (513, 251)
    assert np.isfinite(spec).all()


def test_score_model_shapes():
    x = np.random.default_rng(0).standard_normal((2, 513, 64)).astype(np.float32)
    scores = sb.score_model("LCNN", x, seed=1)
    assert len(scores) == 2
    assert all(s <= 0.0 and math.isfinite(s) for s in scores)
    assert scores == sb.score_model("LCNN", x, seed=1)


def test_grid_expansion():
    assert sb.expand_grid(["RAWNET2"], ["melspec", "raw"], ["full"]) == ["RAWNET2_raw_full"]
    assert len(sb.expand_grid(sb.MODELS, ["cqtspec", "logspec", "melspec", "raw"],
                              ["fixed4s", "full"])) == 56


def test_published_report(tmp_path, published_csv):
    store = tmp_path / "results.sqlite"
    assert sb.import_published(store, published_csv) == 56
    report = sb.build_report(store, "csv")
    full = [r for r in report["rollup"] if r["eval_manifest"] == "asv" and r["length"] == "full"]
    assert abs(full[0]["eer_mean"] - 9.85) <= 0.01
    fx = sb.feature_effect(store, "asv", "melspec", "cqtspec")
    assert 0.30 <= fx["mean_pairwise_reduction"] <= 0.42


def test_synthetic_corpus_roundtrip(tmp_path):
    rows = sb.generate_synthetic_corpus(6, 0.5, 1, tmp_path)
    assert sum(r["label"] == "bonafide" for r in rows) == 3
    audio = sb.load_audio(rows[0]["path"])
    assert 16000 <= audio.shape[0] <= 6 * 16000
