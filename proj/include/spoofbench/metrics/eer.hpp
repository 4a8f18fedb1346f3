#pragma once

#include <span>
#include <vector>

#include "spoofbench/metrics/scores.hpp"

namespace spoofbench::metrics {

struct EerResult {
  double eer = 0.0;        // fraction in [0, 1]
  double threshold = 0.0;  // score at the crossing
};

// One operating point of the detection-error trade-off. A trial is accepted
// as bonafide when score >= threshold.
struct DetPoint {
  double threshold = 0.0;
  double miss = 0.0;         // bonafide rejected
  double false_alarm = 0.0;  // spoof accepted
};

// Operating points at every distinct score plus one above the maximum
// (threshold +inf), in increasing threshold order.
std::vector<DetPoint> det_curve(std::span<const double> bonafide, std::span<const double> spoof);

// Crossing of the miss and false-alarm curves, linearly interpolated
// between the two adjacent operating points that bracket it.
EerResult compute_eer(std::span<const double> bonafide, std::span<const double> spoof);
EerResult compute_eer(std::span<const ScoreRecord> records);

}  // namespace spoofbench::metrics
