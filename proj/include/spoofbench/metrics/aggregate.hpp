#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spoofbench/common/error.hpp"

namespace spoofbench::metrics {

class EmptyGroup : public Error {
 public:
  using Error::Error;
};

class NoMatchedPairs : public Error {
 public:
  using Error::Error;
};

struct EvalResult {
  double eer = 0.0;  // fraction
  double eer_threshold = 0.0;
  std::optional<double> min_tdcf;  // absent for in-the-wild evaluations
};

struct AggregateKey {
  std::string model;
  std::string feature;
  std::string length;
};

struct AggregateRow {
  std::string model;
  std::string feature;
  std::string length;
  double eer_mean = 0.0;  // percent
  double eer_std = 0.0;   // percent, population
  std::optional<double> tdcf_mean;
  std::optional<double> tdcf_std;
  std::size_t n_runs = 0;
};

double mean(std::span<const double> xs);
double population_std(std::span<const double> xs);

// Mean and population standard deviation over runs. t-DCF statistics are
// present only when every run carries one.
AggregateRow aggregate(std::span<const EvalResult> runs, const AggregateKey& key);

struct FeatureEffect {
  double mean_pairwise_reduction = 0.0;  // mean of (from - to) / from
  double pooled_reduction = 0.0;         // (mean(from) - mean(to)) / mean(from)
  std::size_t n_pairs = 0;
};

// Pairs rows on (model, length) between two feature kinds.
FeatureEffect feature_effect(std::span<const AggregateRow> rows, const std::string& from_kind,
                             const std::string& to_kind);

// CSV: model,feature,length,eer_mean,eer_std,tdcf_mean,tdcf_std,n_runs
std::string format_aggregate_csv(std::span<const AggregateRow> rows);

}  // namespace spoofbench::metrics
