// Command-line front end: corpus generation, feature caching, training,
// evaluation, grid runs and reporting.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spoofbench/dataio/stats.hpp"
#include "spoofbench/dataio/synthetic.hpp"
#include "spoofbench/harness/config.hpp"
#include "spoofbench/harness/grid.hpp"
#include "spoofbench/harness/report.hpp"
#include "spoofbench/harness/store.hpp"
#include "spoofbench/training/train.hpp"

namespace fs = std::filesystem;
using namespace spoofbench;

namespace {

enum Exit { kOk = 0, kUsage = 1, kPartial = 2, kDataMissing = 3 };

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

void log_line(const std::string& msg) { std::fprintf(stderr, "[spoofbench] %s\n", msg.c_str()); }

fs::path store_path(const fs::path& out) { return out / "results.sqlite"; }

// Generated corpus layout: audio/ plus one protocol per split, and a config
// that runs the small two-model grid on it.
int synth_data(const fs::path& out, std::size_t clips, double balance, std::uint64_t seed) {
  const auto all = dataio::generate_synthetic_corpus(clips, balance, seed, out / "audio");
  const auto parts = dataio::split_stratified(all, {0.5, 0.25, 0.25},
                                              {dataio::Split::train, dataio::Split::dev,
                                               dataio::Split::eval},
                                              seed);
  const char* names[] = {"train", "dev", "eval"};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    write_text(out / "protocols" / (std::string(names[i]) + ".txt"),
               dataio::serialize_asvspoof_protocol(parts[i]));
  }
  auto source = [](const std::string& split) {
    return nlohmann::json{{"protocol", "protocols/" + split + ".txt"},
                          {"audio", "audio"},
                          {"split", split},
                          {"extension", ".wav"}};
  };
  nlohmann::json config = {
      {"experiment",
       {{"models", {"LCNN", "LSTM"}},
        {"features", {"logspec", "cqtspec"}},
        {"lengths", {"fixed4s"}},
        {"seeds", {0}},
        {"train_splits", {"train"}},
        {"eval_manifests", {"synth_eval"}}}},
      {"training", {{"learning_rate", 1e-3}, {"max_epochs", 3}, {"patience", 2}, {"batch_size", 16}}},
      {"data", {{"train", source("train")}, {"dev", source("dev")},
                {"eval", {{"synth_eval", source("eval")}}}}}};
  write_text(out / "config.json", config.dump(2) + "\n");
  std::printf("wrote %zu clips (%zu/%zu/%zu train/dev/eval) to %s\n", all.size(),
              parts[0].size(), parts[1].size(), parts[2].size(), out.c_str());
  return kOk;
}

int extract(const harness::HarnessConfig& config, const fs::path& data_root, const fs::path& out,
            std::optional<std::uint64_t> seed) {
  const auto data = harness::load_datasets(config, data_root);
  std::vector<const dataio::DatasetManifest*> sets{&data.train, &data.dev};
  for (const auto& [name, m] : data.eval) sets.push_back(&m);
  std::vector<std::uint64_t> seeds = config.experiment.seeds;
  if (seed) seeds = {*seed};
  std::size_t n = 0;
  for (auto kind : config.experiment.features) {
    for (auto mode : config.experiment.lengths) {
      for (auto s : seeds) {
        features::LengthPolicy policy;
        policy.mode = mode;
        policy.rng_seed = s;
        training::FeatureSource source(features::FeatureConfig::defaults(kind), policy,
                                       out / "features", false);
        for (const auto* m : sets) {
          for (const auto& e : m->entries) {
            source.get(e);
            ++n;
          }
        }
      }
    }
  }
  std::printf("cached %zu feature matrices under %s\n", n, (out / "features").c_str());
  return kOk;
}

nlohmann::json result_json(const metrics::EvalResult& r) {
  nlohmann::json j{{"eer", r.eer}, {"eer_threshold", r.eer_threshold}};
  if (r.min_tdcf) j["min_tdcf"] = *r.min_tdcf;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio deepfake detection benchmark"};
  app.require_subcommand(1);

  std::string config_path, data_root_flag;
  fs::path out = "runs";
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  const auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "Experiment config (JSON)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--data-root", data_root_flag,
                    "Dataset root (overrides SPOOFBENCH_DATA_ROOT)");
    sub->add_option("--out", out, "Run directory")->capture_default_str();
    sub->add_option("--seed", seed, "Seed (restricts the grid to one seed)");
  };

  auto* synth = app.add_subcommand("synth-data", "Generate a synthetic corpus and its config");
  std::size_t clips = 200;
  double balance = 0.5;
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--clips", clips, "Number of clips")->capture_default_str();
  synth->add_option("--balance", balance, "Bonafide fraction")->capture_default_str();
  synth->add_option("--seed", seed, "Corpus seed");

  auto* ext = app.add_subcommand("extract", "Pre-compute and cache features");
  common(ext, true);

  auto* train = app.add_subcommand("train", "Train one configuration");
  common(train, true);
  std::string model_name, feature_name, length_name = "fixed4s";
  train->add_option("--model", model_name, "Model id")->required();
  train->add_option("--feature", feature_name, "Feature kind")->required();
  train->add_option("--length", length_name, "fixed4s or full")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Score an eval manifest with a checkpoint");
  common(eval, true);
  std::string checkpoint_file, eval_name, scores_file;
  eval->add_option("--checkpoint", checkpoint_file, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--manifest", eval_name, "Eval manifest name from the config")->required();
  eval->add_option("--scores", scores_file, "Score file to write");

  auto* grid = app.add_subcommand("grid", "Run the experiment grid (resumable)");
  common(grid, true);
  grid->add_option("--jobs", jobs, "Parallel jobs")->capture_default_str()->check(
      CLI::PositiveNumber);

  auto* agg = app.add_subcommand("aggregate", "Write per-manifest aggregate CSVs");
  agg->add_option("--out", out, "Run directory")->capture_default_str();

  auto* rep = app.add_subcommand("report", "Render the results table");
  std::string format = "markdown", published, report_file;
  rep->add_option("--out", out, "Run directory")->capture_default_str();
  rep->add_option("--format", format, "markdown or csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"markdown", "md", "csv"}));
  rep->add_option("--import-published", published,
                  "Seed the store with published per-cell means first")
      ->check(CLI::ExistingFile);
  rep->add_option("--output", report_file, "Write to a file instead of stdout");

  auto* stats = app.add_subcommand("stats", "Corpus statistics of the configured datasets");
  common(stats, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    const auto data_root = harness::resolve_data_root(
        data_root_flag.empty() ? std::nullopt : std::optional<std::string>(data_root_flag));

    if (synth->parsed()) return synth_data(out, clips, balance, seed.value_or(0));

    if (agg->parsed() || rep->parsed()) {
      if (!published.empty()) fs::create_directories(out);
      if (published.empty() && !fs::exists(store_path(out))) {
        throw harness::EmptyStore();
      }
      harness::ResultsStore store(store_path(out));
      if (!published.empty()) {
        const auto n = harness::import_published(store, published);
        log_line("imported " + std::to_string(n) + " published rows");
      }
      const auto report = harness::build_report(store.results());
      if (agg->parsed()) {
        for (const auto& m : harness::manifests(report)) {
          const auto path = out / "aggregate" / (m + ".csv");
          write_text(path, metrics::format_aggregate_csv(harness::aggregate_manifest(report, m)));
          std::printf("%s\n", path.c_str());
        }
        return kOk;
      }
      const auto text = harness::render(report, harness::parse_report_format(format));
      if (report_file.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
      } else {
        write_text(report_file, text);
      }
      return kOk;
    }

    const auto config = harness::load_config(config_path);

    if (ext->parsed()) return extract(config, data_root, out, seed);

    if (stats->parsed()) {
      const auto data = harness::load_datasets(config, data_root);
      nlohmann::json j;
      auto add = [&](const std::string& name, const dataio::DatasetManifest& m) {
        const auto s = dataio::corpus_stats(m, dataio::probe_durations(m));
        j[name] = {{"clips", m.size()},
                   {"speakers", s.n_speakers},
                   {"bonafide", s.n_bonafide},
                   {"spoof", s.n_spoof},
                   {"hours_bonafide", s.hours_bonafide},
                   {"hours_spoof", s.hours_spoof},
                   {"mean_clip_seconds", s.mean_clip_seconds},
                   {"attacks", dataio::attack_counts(m)}};
      };
      add("train", data.train);
      add("dev", data.dev);
      for (const auto& [name, m] : data.eval) add(name, m);
      std::printf("%s\n", j.dump(2).c_str());
      return kOk;
    }

    if (train->parsed()) {
      const harness::ExperimentConfig cell{models::parse_model_id(model_name),
                                           features::parse_feature_kind(feature_name),
                                           features::parse_length_mode(length_name)};
      if (!harness::compatible(cell.model, cell.feature)) {
        std::fprintf(stderr, "%s cannot consume %s features\n", model_name.c_str(),
                     feature_name.c_str());
        return kUsage;
      }
      const std::uint64_t s = seed.value_or(0);
      const auto data = harness::load_datasets(config, data_root);
      features::LengthPolicy policy;
      policy.mode = cell.length;
      policy.rng_seed = s;
      auto tcfg = config.training;
      tcfg.seed = s;
      training::TrainOptions opt;
      opt.log_path = out / "logs" / (cell.label() + "_seed" + std::to_string(s) + ".jsonl");
      opt.on_epoch = [](const training::EpochRecord& r) {
        log_line(training::to_json_line(r).dump());
      };
      const auto result = training::train(harness::model_config(config, cell.model, s),
                                          features::FeatureConfig::defaults(cell.feature), policy,
                                          data.train, data.dev, tcfg, opt);
      const auto path = harness::checkpoint_path(out, cell, s);
      training::save_checkpoint(path, result.checkpoint);
      std::printf("%s\n", path.c_str());
      return kOk;
    }

    if (eval->parsed()) {
      if (!config.eval.count(eval_name)) {
        std::fprintf(stderr, "unknown eval manifest: %s\n", eval_name.c_str());
        return kUsage;
      }
      const auto& src = config.eval.at(eval_name);
      const auto manifest = harness::load_dataset(src, eval_name, data_root);
      std::optional<metrics::AsvScores> asv;
      if (src.asv_scores) asv = metrics::read_asv_scores(data_root / *src.asv_scores);
      const auto ckpt = training::load_checkpoint(checkpoint_file);
      const auto scores =
          training::evaluate(ckpt, manifest, seed, config.eval_batch_size);
      const fs::path path = scores_file.empty()
                                ? out / "scores" / eval_name /
                                      (fs::path(checkpoint_file).stem().string() + ".txt")
                                : fs::path(scores_file);
      metrics::write_score_file(path, scores);
      auto j = result_json(harness::rescore(path, manifest, asv ? &*asv : nullptr));
      j["scores"] = path.string();
      std::printf("%s\n", j.dump(2).c_str());
      return kOk;
    }

    if (grid->parsed()) {
      harness::ResultsStore store(store_path(out));
      harness::GridOptions opt;
      opt.data_root = data_root;
      opt.out_dir = out;
      opt.jobs = jobs;
      opt.seed = seed;
      opt.log = log_line;
      const auto s = harness::run_grid(config, store, opt);
      std::printf("completed %zu, skipped %zu, failed %zu\n", s.completed, s.skipped, s.failed);
      return s.failed ? kPartial : kOk;
    }
  } catch (const harness::DataMissing& e) {
    std::fprintf(stderr, "data missing: %s\n", e.what());
    return kDataMissing;
  } catch (const harness::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
