#include "spoofbench/metrics/eer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spoofbench::metrics {
namespace {

void check_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw Error("scores must be finite");
  }
}

}  // namespace

std::vector<DetPoint> det_curve(std::span<const double> bonafide, std::span<const double> spoof) {
  if (bonafide.empty() || spoof.empty()) throw SingleClassInput();
  check_finite(bonafide);
  check_finite(spoof);

  std::vector<double> b(bonafide.begin(), bonafide.end());
  std::vector<double> s(spoof.begin(), spoof.end());
  std::sort(b.begin(), b.end());
  std::sort(s.begin(), s.end());
  std::vector<double> all;
  all.reserve(b.size() + s.size());
  std::merge(b.begin(), b.end(), s.begin(), s.end(), std::back_inserter(all));
  all.erase(std::unique(all.begin(), all.end()), all.end());

  const double nb = static_cast<double>(b.size());
  const double ns = static_cast<double>(s.size());
  std::vector<DetPoint> curve;
  curve.reserve(all.size() + 1);
  // Two-pointer sweep: bi counts bonafide < t, si counts spoof < t.
  std::size_t bi = 0;
  std::size_t si = 0;
  for (double t : all) {
    while (bi < b.size() && b[bi] < t) ++bi;
    while (si < s.size() && s[si] < t) ++si;
    curve.push_back({t, static_cast<double>(bi) / nb, static_cast<double>(s.size() - si) / ns});
  }
  curve.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
  return curve;
}

EerResult compute_eer(std::span<const double> bonafide, std::span<const double> spoof) {
  const auto curve = det_curve(bonafide, spoof);
  // miss - false_alarm is nondecreasing along the curve, -1 at the first
  // point and +1 at the last, so a bracketing pair always exists.
  std::size_t i = 0;
  while (curve[i].miss - curve[i].false_alarm < 0.0) ++i;
  const DetPoint& hi = curve[i];
  const double d_hi = hi.miss - hi.false_alarm;
  if (d_hi == 0.0 || i == 0) return {hi.miss, hi.threshold};

  const DetPoint& lo = curve[i - 1];
  const double d_lo = lo.miss - lo.false_alarm;
  const double alpha = -d_lo / (d_hi - d_lo);
  const double eer = lo.miss + alpha * (hi.miss - lo.miss);
  const double threshold = std::isfinite(hi.threshold)
                               ? lo.threshold + alpha * (hi.threshold - lo.threshold)
                               : lo.threshold;
  return {eer, threshold};
}

EerResult compute_eer(std::span<const ScoreRecord> records) {
  std::vector<double> b, s;
  split_by_label(records, b, s);
  return compute_eer(b, s);
}

}  // namespace spoofbench::metrics
