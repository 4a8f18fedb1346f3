#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spoofbench/harness/store.hpp"
#include "spoofbench/metrics/aggregate.hpp"

namespace spoofbench::harness {

struct ReportRow {
  std::string eval_manifest;
  metrics::AggregateRow row;  // percent EER
  bool best = false;          // lowest mean EER of its model on this manifest
  bool best_tdcf = false;     // lowest mean t-DCF of its model on this manifest
};

// Mean of the per-cell means for one input length.
struct RollupRow {
  std::string eval_manifest;
  std::string length;
  double eer_mean = 0.0;  // percent
  std::optional<double> tdcf_mean;
  std::size_t n_cells = 0;
};

struct Report {
  std::vector<ReportRow> rows;  // by manifest, then model, feature, length
  std::vector<RollupRow> rollup;
};

// Throws EmptyStore when there is nothing to report. The result depends
// only on the set of records, not on their order.
Report build_report(std::vector<ResultRecord> records);

// Aggregate rows of one eval manifest, for the aggregate CSV.
std::vector<metrics::AggregateRow> aggregate_manifest(const Report& report,
                                                      const std::string& eval_manifest);
std::vector<std::string> manifests(const Report& report);

enum class ReportFormat { markdown, csv };
ReportFormat parse_report_format(const std::string& name);

// EER as "%.2f±%.2f" percent, t-DCF as "%.3f±%.2f"; both renderings carry
// the same strings.
std::string render(const Report& report, ReportFormat format);
std::string format_eer(double mean, double std);
std::string format_tdcf(double mean, double std);

// Loads published per-cell means (model, feature, length, then EER and
// t-DCF mean/std per eval set) as two pseudo-runs m-s and m+s, which
// reproduce both the mean and the population std. Returns rows inserted.
std::size_t import_published(ResultsStore& store, const std::filesystem::path& csv);

}  // namespace spoofbench::harness
