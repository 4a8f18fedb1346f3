#include "spoofbench/harness/grid.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <tuple>

#include <torch/torch.h>

#include "spoofbench/metrics/eer.hpp"
#include "spoofbench/training/train.hpp"

namespace spoofbench::harness {
namespace {

struct Job {
  ExperimentConfig cfg;
  std::uint64_t seed;
};

// One FeatureSource per (feature, length, seed); shared by every model that
// trains on it so features are computed once.
class SourcePool {
 public:
  SourcePool(std::optional<std::filesystem::path> cache_dir) : cache_dir_(std::move(cache_dir)) {}

  const training::FeatureSource& get(features::FeatureKind kind, features::LengthMode mode,
                                     std::uint64_t seed) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& slot = pool_[{kind, mode, seed}];
    if (!slot) {
      features::LengthPolicy policy;
      policy.mode = mode;
      policy.rng_seed = seed;
      // With a disk cache the memo would only duplicate it in RAM.
      slot = std::make_unique<training::FeatureSource>(features::FeatureConfig::defaults(kind),
                                                       policy, cache_dir_, !cache_dir_);
    }
    return *slot;
  }

 private:
  std::optional<std::filesystem::path> cache_dir_;
  std::mutex mutex_;
  std::map<std::tuple<features::FeatureKind, features::LengthMode, std::uint64_t>,
           std::unique_ptr<training::FeatureSource>>
      pool_;
};

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

}  // namespace

Datasets load_datasets(const HarnessConfig& config, const std::filesystem::path& data_root) {
  Datasets d;
  auto train = load_dataset(config.train, "train", data_root);
  d.dev = load_dataset(config.dev, "dev", data_root);
  for (const auto& name : config.experiment.eval_manifests) {
    const auto& src = config.eval.at(name);
    d.eval[name] = load_dataset(src, name, data_root);
    if (src.asv_scores) {
      const auto p = data_root / *src.asv_scores;
      if (!std::filesystem::is_regular_file(p)) {
        throw DataMissing(name + ": ASV score file not found: " + p.string());
      }
      d.asv[name] = metrics::read_asv_scores(p);
    }
  }
  // Extra splits (the all-splits variant) come from whichever dataset holds
  // them; train() keeps only the selected splits.
  std::vector<dataio::DatasetManifest> parts{train};
  const auto& splits = config.training.train_splits;
  if (splits.count(config.dev.split)) parts.push_back(d.dev);
  for (const auto& [name, m] : d.eval) {
    if (splits.count(config.eval.at(name).split)) parts.push_back(m);
  }
  d.train = parts.size() == 1 ? std::move(train) : dataio::merge(parts, "train");
  return d;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir,
                                      const ExperimentConfig& cfg, std::uint64_t seed) {
  return out_dir / "checkpoints" / (cfg.label() + "_" + seed_tag(seed) + ".sbck");
}

std::filesystem::path score_path(const std::filesystem::path& out_dir,
                                 const std::string& eval_manifest, const ExperimentConfig& cfg,
                                 std::uint64_t seed) {
  return out_dir / "scores" / eval_manifest / (cfg.label() + "_" + seed_tag(seed) + ".txt");
}

metrics::EvalResult rescore(const std::filesystem::path& scores,
                            const dataio::DatasetManifest& manifest,
                            const metrics::AsvScores* asv) {
  const auto records = metrics::join_labels(metrics::read_score_file(scores), manifest);
  const auto eer = metrics::compute_eer(records);
  metrics::EvalResult r{eer.eer, eer.threshold, std::nullopt};
  if (asv) r.min_tdcf = metrics::compute_tdcf(records, *asv);
  return r;
}

GridSummary run_grid(const HarnessConfig& config, ResultsStore& store,
                     const GridOptions& options) {
  GridSummary summary;
  const auto configs = expand_grid(config.experiment, &summary.excluded);
  const auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  for (const auto& e : summary.excluded) log("excluded: " + e);

  std::vector<std::uint64_t> seeds = config.experiment.seeds;
  if (options.seed) seeds = {*options.seed};

  const auto data = load_datasets(config, options.data_root);
  const auto& evals = config.experiment.eval_manifests;

  std::vector<Job> jobs;
  for (const auto& cfg : configs) {
    for (auto seed : seeds) {
      std::size_t done = 0;
      for (const auto& name : evals) {
        ResultKey key{std::string(models::to_string(cfg.model)),
                      std::string(features::to_string(cfg.feature)),
                      std::string(features::to_string(cfg.length)), seed, name};
        if (store.completed(key)) ++done;
      }
      summary.skipped += done;
      if (done < evals.size()) jobs.push_back({cfg, seed});
    }
  }

  SourcePool sources(config.cache_features
                         ? std::optional<std::filesystem::path>(options.out_dir / "features")
                         : std::nullopt);
  const std::string hash = config.hash();
  const std::string revision = build_revision();
  std::mutex summary_mutex;

  const auto run_job = [&](const Job& job) {
    const std::string label = job.cfg.label() + " " + seed_tag(job.seed);
    const std::string started = utc_now();
    auto key_for = [&](const std::string& name) {
      return ResultKey{std::string(models::to_string(job.cfg.model)),
                       std::string(features::to_string(job.cfg.feature)),
                       std::string(features::to_string(job.cfg.length)), job.seed, name};
    };
    auto fail = [&](const std::string& name, const std::string& reason) {
      store.record_failure({key_for(name), reason, {hash, revision, started, utc_now()}});
      std::lock_guard<std::mutex> lock(summary_mutex);
      ++summary.failed;
      log("failed: " + label + " on " + name + ": " + reason);
    };

    const auto& source = sources.get(job.cfg.feature, job.cfg.length, job.seed);
    training::Checkpoint checkpoint;
    try {
      const auto ckpt = checkpoint_path(options.out_dir, job.cfg, job.seed);
      if (std::filesystem::exists(ckpt)) {
        checkpoint = training::load_checkpoint(ckpt);
        log("reusing checkpoint: " + label);
      } else {
        log("training: " + label);
        auto tcfg = config.training;
        tcfg.seed = job.seed;
        training::TrainOptions topt;
        topt.log_path = options.out_dir / "logs" / (job.cfg.label() + "_" + seed_tag(job.seed) +
                                                    ".jsonl");
        topt.train_source = &source;
        topt.dev_source = &source;
        auto result = training::train(model_config(config, job.cfg.model, job.seed),
                                      source.feature(), source.policy(), data.train, data.dev,
                                      tcfg, topt);
        checkpoint = std::move(result.checkpoint);
        training::save_checkpoint(ckpt, checkpoint);
      }
    } catch (const std::exception& e) {
      for (const auto& name : evals) {
        if (!store.completed(key_for(name))) fail(name, std::string("training: ") + e.what());
      }
      return;
    }

    for (const auto& name : evals) {
      const auto key = key_for(name);
      if (store.completed(key)) continue;
      try {
        const auto& manifest = data.eval.at(name);
        const auto scores = training::evaluate(checkpoint, manifest, std::nullopt,
                                               config.eval_batch_size, &source);
        const auto path = score_path(options.out_dir, name, job.cfg, job.seed);
        metrics::write_score_file(path, scores);
        // Metrics come from the file as written so the store always agrees
        // with a later rescore.
        auto it = data.asv.find(name);
        const auto result = rescore(path, manifest, it == data.asv.end() ? nullptr : &it->second);
        store.insert({key, result, path.string(), {hash, revision, started, utc_now()}});
        std::lock_guard<std::mutex> lock(summary_mutex);
        ++summary.completed;
        log("done: " + label + " on " + name + " EER " + std::to_string(result.eer * 100.0) + "%");
      } catch (const std::exception& e) {
        fail(name, std::string("evaluation: ") + e.what());
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.jobs, jobs.size()));
  if (workers <= 1) {
    for (const auto& job : jobs) run_job(job);
    return summary;
  }
  // Parallel jobs would otherwise oversubscribe the intra-op pool.
  const int saved_threads = torch::get_num_threads();
  torch::set_num_threads(1);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(jobs[i]);
    });
  }
  for (auto& t : pool) t.join();
  torch::set_num_threads(saved_threads);
  return summary;
}

}  // namespace spoofbench::harness
