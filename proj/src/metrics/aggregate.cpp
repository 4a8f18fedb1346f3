#include "spoofbench/metrics/aggregate.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace spoofbench::metrics {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw EmptyGroup("mean of empty set");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

AggregateRow aggregate(std::span<const EvalResult> runs, const AggregateKey& key) {
  if (runs.empty()) {
    throw EmptyGroup("no runs for " + key.model + "/" + key.feature + "/" + key.length);
  }
  std::vector<double> eers;
  std::vector<double> tdcfs;
  for (const auto& r : runs) {
    eers.push_back(100.0 * r.eer);
    if (r.min_tdcf) tdcfs.push_back(*r.min_tdcf);
  }
  AggregateRow row;
  row.model = key.model;
  row.feature = key.feature;
  row.length = key.length;
  row.eer_mean = mean(eers);
  row.eer_std = population_std(eers);
  if (tdcfs.size() == runs.size()) {
    row.tdcf_mean = mean(tdcfs);
    row.tdcf_std = population_std(tdcfs);
  }
  row.n_runs = runs.size();
  return row;
}

FeatureEffect feature_effect(std::span<const AggregateRow> rows, const std::string& from_kind,
                             const std::string& to_kind) {
  std::vector<double> from, to;
  double rel_sum = 0.0;
  for (const auto& a : rows) {
    if (a.feature != from_kind) continue;
    for (const auto& b : rows) {
      if (b.feature == to_kind && b.model == a.model && b.length == a.length) {
        from.push_back(a.eer_mean);
        to.push_back(b.eer_mean);
        rel_sum += (a.eer_mean - b.eer_mean) / a.eer_mean;
        break;
      }
    }
  }
  if (from.empty()) throw NoMatchedPairs("no (model, length) pairs between " + from_kind + " and " + to_kind);
  FeatureEffect fx;
  fx.n_pairs = from.size();
  fx.mean_pairwise_reduction = rel_sum / static_cast<double>(from.size());
  const double mf = mean(from);
  fx.pooled_reduction = (mf - mean(to)) / mf;
  return fx;
}

std::string format_aggregate_csv(std::span<const AggregateRow> rows) {
  std::string out = "model,feature,length,eer_mean,eer_std,tdcf_mean,tdcf_std,n_runs\n";
  char buf[256];
  for (const auto& r : rows) {
    std::string td_mean;
    if (r.tdcf_mean) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.tdcf_mean);
      td_mean = buf;
    }
    std::string td_std;
    if (r.tdcf_std) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.tdcf_std);
      td_std = buf;
    }
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,", r.eer_mean, r.eer_std);
    out += r.model + "," + r.feature + "," + r.length + "," + buf + td_mean + "," + td_std + "," +
           std::to_string(r.n_runs) + "\n";
  }
  return out;
}

}  // namespace spoofbench::metrics
