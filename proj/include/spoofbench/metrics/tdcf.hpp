#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "spoofbench/metrics/scores.hpp"

namespace spoofbench::metrics {

class MissingAsvClass : public Error {
 public:
  using Error::Error;
};

class DegenerateCosts : public Error {
 public:
  using Error::Error;
};

struct TdcfCosts {
  double p_target = 0.0;
  double p_nontarget = 0.0;
  double p_spoof = 0.0;
  double c_miss_asv = 0.0;
  double c_fa_asv = 0.0;
  double c_miss_cm = 0.0;
  double c_fa_cm = 0.0;

  // Cost model of the ASVspoof 2019 evaluation package.
  static TdcfCosts asvspoof2019();
  void validate() const;
};

struct AsvScores {
  std::vector<double> target;
  std::vector<double> nontarget;
  std::vector<double> spoof;
};

struct AsvErrorRates {
  double pfa = 0.0;
  double pmiss = 0.0;
  double pmiss_spoof = 0.0;
};

// DET curve exactly as the 2019 challenge tooling builds it: a stable sort
// of the pooled scores with one point per trial (ties are not merged).
struct ChallengeDet {
  std::vector<double> frr;
  std::vector<double> far;
  std::vector<double> thresholds;
};
ChallengeDet challenge_det_curve(std::span<const double> target, std::span<const double> nontarget);

// Challenge EER convention (argmin |frr - far|, no interpolation); used to
// fix the ASV operating point.
std::pair<double, double> challenge_eer(std::span<const double> target,
                                        std::span<const double> nontarget);

AsvErrorRates asv_error_rates(const AsvScores& asv, double threshold);

// Normalized t-DCF at every CM operating point of challenge_det_curve.
std::vector<double> tdcf_curve(std::span<const double> bonafide_cm, std::span<const double> spoof_cm,
                               const AsvErrorRates& asv, const TdcfCosts& costs);

// Minimum normalized t-DCF with the ASV threshold at its EER point.
double compute_tdcf(std::span<const ScoreRecord> cm_records, const AsvScores& asv,
                    const TdcfCosts& costs = TdcfCosts::asvspoof2019());

// "<score> <key>" lines, or the challenge's "<source> <key> <score>" layout.
AsvScores parse_asv_scores(std::string_view text);
AsvScores read_asv_scores(const std::filesystem::path& path);
std::string format_asv_scores(const AsvScores& asv);

}  // namespace spoofbench::metrics
