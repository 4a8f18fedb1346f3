"""Port of the ASVspoof 2019 evaluation package's EER and t-DCF routines.

Kept numerically identical to the challenge script (numpy, stable mergesort,
same operation order). Used only to generate golden values for the C++ tests.
Differences: no console printing, and the "soft scores" sanity exit is
skipped so that constant CM scores can be evaluated.
"""

import sys

import numpy as np


def compute_det_curve(target_scores, nontarget_scores):
    n_scores = target_scores.size + nontarget_scores.size
    all_scores = np.concatenate((target_scores, nontarget_scores))
    labels = np.concatenate((np.ones(target_scores.size), np.zeros(nontarget_scores.size)))

    indices = np.argsort(all_scores, kind="mergesort")
    labels = labels[indices]

    tar_trial_sums = np.cumsum(labels)
    nontarget_trial_sums = nontarget_scores.size - (np.arange(1, n_scores + 1) - tar_trial_sums)

    frr = np.concatenate((np.atleast_1d(0), tar_trial_sums / target_scores.size))
    far = np.concatenate((np.atleast_1d(1), nontarget_trial_sums / nontarget_scores.size))
    thresholds = np.concatenate((np.atleast_1d(all_scores[indices[0]] - 0.001), all_scores[indices]))
    return frr, far, thresholds


def compute_eer(target_scores, nontarget_scores):
    frr, far, thresholds = compute_det_curve(target_scores, nontarget_scores)
    abs_diffs = np.abs(frr - far)
    min_index = np.argmin(abs_diffs)
    eer = np.mean((frr[min_index], far[min_index]))
    return eer, thresholds[min_index]


def obtain_asv_error_rates(tar_asv, non_asv, spoof_asv, asv_threshold):
    Pfa_asv = sum(non_asv >= asv_threshold) / non_asv.size
    Pmiss_asv = sum(tar_asv < asv_threshold) / tar_asv.size
    if spoof_asv.size == 0:
        Pmiss_spoof_asv = None
    else:
        Pmiss_spoof_asv = np.sum(spoof_asv < asv_threshold) / spoof_asv.size
    return Pfa_asv, Pmiss_asv, Pmiss_spoof_asv


def compute_tDCF(bonafide_score_cm, spoof_score_cm, Pfa_asv, Pmiss_asv, Pmiss_spoof_asv, cost_model):
    if cost_model["Cfa_asv"] < 0 or cost_model["Cmiss_asv"] < 0 or \
            cost_model["Cfa_cm"] < 0 or cost_model["Cmiss_cm"] < 0:
        raise ValueError("costs must be non-negative")
    if cost_model["Ptar"] < 0 or cost_model["Pnon"] < 0 or cost_model["Pspoof"] < 0 or \
            np.abs(cost_model["Ptar"] + cost_model["Pnon"] + cost_model["Pspoof"] - 1) > 1e-10:
        raise ValueError("priors must sum to one")
    if Pmiss_spoof_asv is None:
        raise ValueError("spoof ASV scores required")

    combined_scores = np.concatenate((bonafide_score_cm, spoof_score_cm))
    if np.isnan(combined_scores).any() or np.isinf(combined_scores).any():
        raise ValueError("scores contain nan or inf")

    Pmiss_cm, Pfa_cm, CM_thresholds = compute_det_curve(bonafide_score_cm, spoof_score_cm)

    C1 = cost_model["Ptar"] * (cost_model["Cmiss_cm"] - cost_model["Cmiss_asv"] * Pmiss_asv) - \
        cost_model["Pnon"] * cost_model["Cfa_asv"] * Pfa_asv
    C2 = cost_model["Cfa_cm"] * cost_model["Pspoof"] * (1 - Pmiss_spoof_asv)
    if C1 < 0 or C2 < 0:
        raise ValueError("negative t-DCF weights")

    tDCF = C1 * Pmiss_cm + C2 * Pfa_cm
    tDCF_norm = tDCF / np.minimum(C1, C2)
    return tDCF_norm, CM_thresholds


def challenge_cost_model():
    Pspoof = 0.05
    return {
        "Pspoof": Pspoof,
        "Ptar": (1 - Pspoof) * 0.99,
        "Pnon": (1 - Pspoof) * 0.01,
        "Cmiss_asv": 1,
        "Cfa_asv": 10,
        "Cmiss_cm": 1,
        "Cfa_cm": 10,
    }


def min_tdcf(bona_cm, spoof_cm, tar_asv, non_asv, spoof_asv, cost_model=None):
    cost_model = cost_model or challenge_cost_model()
    _, asv_threshold = compute_eer(tar_asv, non_asv)
    Pfa_asv, Pmiss_asv, Pmiss_spoof_asv = obtain_asv_error_rates(tar_asv, non_asv, spoof_asv, asv_threshold)
    curve, _ = compute_tDCF(bona_cm, spoof_cm, Pfa_asv, Pmiss_asv, Pmiss_spoof_asv, cost_model)
    return float(np.min(curve))


if __name__ == "__main__":
    sys.exit("import this module; see make_tdcf_cases.py")
