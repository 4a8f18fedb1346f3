#include "spoofbench/metrics/tdcf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace spoofbench::metrics {

TdcfCosts TdcfCosts::asvspoof2019() {
  TdcfCosts c;
  c.p_spoof = 0.05;
  c.p_target = (1.0 - c.p_spoof) * 0.99;
  c.p_nontarget = (1.0 - c.p_spoof) * 0.01;
  c.c_miss_asv = 1.0;
  c.c_fa_asv = 10.0;
  c.c_miss_cm = 1.0;
  c.c_fa_cm = 10.0;
  return c;
}

void TdcfCosts::validate() const {
  if (c_fa_asv < 0 || c_miss_asv < 0 || c_fa_cm < 0 || c_miss_cm < 0) {
    throw DegenerateCosts("t-DCF costs must be non-negative");
  }
  if (p_target < 0 || p_nontarget < 0 || p_spoof < 0 ||
      std::abs(p_target + p_nontarget + p_spoof - 1.0) > 1e-10) {
    throw DegenerateCosts("t-DCF priors must be non-negative and sum to one");
  }
}

ChallengeDet challenge_det_curve(std::span<const double> target, std::span<const double> nontarget) {
  const std::size_t n_tar = target.size();
  const std::size_t n_non = nontarget.size();
  const std::size_t n = n_tar + n_non;
  std::vector<double> all(n);
  std::copy(target.begin(), target.end(), all.begin());
  std::copy(nontarget.begin(), nontarget.end(), all.begin() + static_cast<std::ptrdiff_t>(n_tar));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return all[a] < all[b]; });

  ChallengeDet det;
  det.frr.reserve(n + 1);
  det.far.reserve(n + 1);
  det.thresholds.reserve(n + 1);
  det.frr.push_back(0.0);
  det.far.push_back(1.0);
  det.thresholds.push_back(n ? all[idx[0]] - 0.001 : 0.0);
  std::size_t tar_sum = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (idx[k] < n_tar) ++tar_sum;
    const std::size_t non_sum = n_non - ((k + 1) - tar_sum);
    det.frr.push_back(static_cast<double>(tar_sum) / static_cast<double>(n_tar));
    det.far.push_back(static_cast<double>(non_sum) / static_cast<double>(n_non));
    det.thresholds.push_back(all[idx[k]]);
  }
  return det;
}

std::pair<double, double> challenge_eer(std::span<const double> target,
                                        std::span<const double> nontarget) {
  if (target.empty() || nontarget.empty()) throw MissingAsvClass("ASV scores need target and nontarget trials");
  const auto det = challenge_det_curve(target, nontarget);
  std::size_t best = 0;
  double best_diff = std::abs(det.frr[0] - det.far[0]);
  for (std::size_t i = 1; i < det.frr.size(); ++i) {
    const double d = std::abs(det.frr[i] - det.far[i]);
    if (d < best_diff) {
      best_diff = d;
      best = i;
    }
  }
  return {(det.frr[best] + det.far[best]) / 2.0, det.thresholds[best]};
}

AsvErrorRates asv_error_rates(const AsvScores& asv, double threshold) {
  if (asv.target.empty() || asv.nontarget.empty() || asv.spoof.empty()) {
    throw MissingAsvClass("ASV scores need target, nontarget and spoof trials");
  }
  auto frac = [](const std::vector<double>& xs, auto pred) {
    return static_cast<double>(std::count_if(xs.begin(), xs.end(), pred)) /
           static_cast<double>(xs.size());
  };
  AsvErrorRates r;
  r.pfa = frac(asv.nontarget, [&](double x) { return x >= threshold; });
  r.pmiss = frac(asv.target, [&](double x) { return x < threshold; });
  r.pmiss_spoof = frac(asv.spoof, [&](double x) { return x < threshold; });
  return r;
}

std::vector<double> tdcf_curve(std::span<const double> bonafide_cm, std::span<const double> spoof_cm,
                               const AsvErrorRates& asv, const TdcfCosts& costs) {
  costs.validate();
  if (bonafide_cm.empty() || spoof_cm.empty()) throw SingleClassInput();
  for (auto xs : {bonafide_cm, spoof_cm}) {
    for (double x : xs) {
      if (!std::isfinite(x)) throw Error("CM scores must be finite");
    }
  }
  const double c1 = costs.p_target * (costs.c_miss_cm - costs.c_miss_asv * asv.pmiss) -
                    costs.p_nontarget * costs.c_fa_asv * asv.pfa;
  const double c2 = costs.c_fa_cm * costs.p_spoof * (1.0 - asv.pmiss_spoof);
  if (c1 < 0.0 || c2 < 0.0) {
    throw DegenerateCosts("t-DCF weights are negative; ASV error rates or costs are inconsistent");
  }
  const double norm = std::min(c1, c2);
  if (norm == 0.0) throw DegenerateCosts("t-DCF normalization is zero");

  const auto det = challenge_det_curve(bonafide_cm, spoof_cm);
  std::vector<double> out(det.frr.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (c1 * det.frr[i] + c2 * det.far[i]) / norm;
  }
  return out;
}

double compute_tdcf(std::span<const ScoreRecord> cm_records, const AsvScores& asv,
                    const TdcfCosts& costs) {
  std::vector<double> b, s;
  split_by_label(cm_records, b, s);
  if (b.empty() || s.empty()) throw SingleClassInput();
  const auto [asv_eer, asv_threshold] = challenge_eer(asv.target, asv.nontarget);
  (void)asv_eer;
  const auto rates = asv_error_rates(asv, asv_threshold);
  const auto curve = tdcf_curve(b, s, rates, costs);
  return *std::min_element(curve.begin(), curve.end());
}

AsvScores parse_asv_scores(std::string_view text) {
  AsvScores out;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    std::string key, score_text;
    if (tok.size() == 2) {
      score_text = tok[0];
      key = tok[1];
    } else if (tok.size() == 3) {
      key = tok[1];
      score_text = tok[2];
    } else {
      throw Error("ASV score line " + std::to_string(line_no) + ": expected 2 or 3 fields");
    }
    double v = 0.0;
    try {
      v = std::stod(score_text);
    } catch (const std::exception&) {
      throw Error("ASV score line " + std::to_string(line_no) + ": bad score '" + score_text + "'");
    }
    if (key == "target") {
      out.target.push_back(v);
    } else if (key == "nontarget") {
      out.nontarget.push_back(v);
    } else if (key == "spoof") {
      out.spoof.push_back(v);
    } else {
      throw Error("ASV score line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return out;
}

AsvScores read_asv_scores(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read ASV scores " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_asv_scores(ss.str());
}

std::string format_asv_scores(const AsvScores& asv) {
  std::string out;
  char buf[64];
  auto emit = [&](const std::vector<double>& xs, const char* key) {
    for (double x : xs) {
      std::snprintf(buf, sizeof buf, "%.17g %s\n", x, key);
      out += buf;
    }
  };
  emit(asv.target, "target");
  emit(asv.nontarget, "nontarget");
  emit(asv.spoof, "spoof");
  return out;
}

}  // namespace spoofbench::metrics
