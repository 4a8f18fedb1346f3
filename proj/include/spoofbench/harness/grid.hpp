#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spoofbench/harness/config.hpp"
#include "spoofbench/harness/store.hpp"
#include "spoofbench/metrics/tdcf.hpp"

namespace spoofbench::harness {

struct GridOptions {
  std::filesystem::path data_root;
  std::filesystem::path out_dir;  // checkpoints/, scores/, logs/, features/
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;  // restricts the grid to this seed
  std::function<void(const std::string&)> log;
};

struct GridSummary {
  std::size_t completed = 0;  // keys evaluated in this call
  std::size_t skipped = 0;    // keys already in the store
  std::size_t failed = 0;
  std::vector<std::string> excluded;  // incompatible model/feature pairs
};

// Every dataset the config names, keyed by its config name. Throws
// DataMissing before any training starts.
struct Datasets {
  dataio::DatasetManifest train;  // train + whichever splits train_splits adds
  dataio::DatasetManifest dev;
  std::map<std::string, dataio::DatasetManifest> eval;
  std::map<std::string, metrics::AsvScores> asv;  // only for sources with asv_scores
};
Datasets load_datasets(const HarnessConfig& config, const std::filesystem::path& data_root);

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir,
                                      const ExperimentConfig& cfg, std::uint64_t seed);
std::filesystem::path score_path(const std::filesystem::path& out_dir,
                                 const std::string& eval_manifest, const ExperimentConfig& cfg,
                                 std::uint64_t seed);

// Trains and evaluates every (config, seed) whose results are not yet all in
// the store. A failing job is recorded with its reason and the rest of the
// grid carries on. Finished checkpoints are reused, so an interrupted run
// resumes where it stopped.
GridSummary run_grid(const HarnessConfig& config, ResultsStore& store, const GridOptions& options);

// EER (and t-DCF when ASV scores are given) of a score file as stored.
metrics::EvalResult rescore(const std::filesystem::path& scores,
                            const dataio::DatasetManifest& manifest,
                            const metrics::AsvScores* asv = nullptr);

}  // namespace spoofbench::harness
