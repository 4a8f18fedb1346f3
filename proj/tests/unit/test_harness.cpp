#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "spoofbench/dataio/synthetic.hpp"
#include "spoofbench/harness/config.hpp"
#include "spoofbench/harness/experiment.hpp"
#include "spoofbench/harness/grid.hpp"
#include "spoofbench/harness/report.hpp"
#include "spoofbench/harness/store.hpp"
#include "test_util.hpp"

namespace sh = spoofbench::harness;
namespace sd = spoofbench::dataio;
namespace sf = spoofbench::features;
using spoofbench::models::ModelId;
using spoofbench::testing::fixture;
using spoofbench::testing::read_text;
using spoofbench::testing::TempDir;

// ---------------------------------------------------------------- grid

TEST(ExpandGrid, FullGridHas56Cells) {
  std::vector<std::string> excluded;
  const auto cells = sh::expand_grid(sh::full_grid_spec(), &excluded);
  EXPECT_EQ(cells.size(), 56u);
  const auto raw = std::count_if(cells.begin(), cells.end(),
                                 [](const auto& c) { return c.feature == sf::FeatureKind::raw; });
  EXPECT_EQ(raw, 8);
  // 8 spectral models x raw + 4 raw models x 3 spectral kinds.
  EXPECT_EQ(excluded.size(), 20u);
  EXPECT_EQ(sh::expand_grid(sh::full_grid_spec()), cells);
}

TEST(ExpandGrid, SingleCellAndExclusion) {
  sh::ExperimentSpec s;
  s.models = {ModelId::LCNN};
  s.features = {sf::FeatureKind::logspec};
  s.lengths = {sf::LengthMode::fixed4s};
  const auto one = sh::expand_grid(s);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].label(), "LCNN_logspec_fixed4s");

  s.models = {ModelId::RAWNET2};
  s.features = {sf::FeatureKind::melspec, sf::FeatureKind::raw};
  std::vector<std::string> excluded;
  const auto cells = sh::expand_grid(s, &excluded);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].feature, sf::FeatureKind::raw);
  EXPECT_EQ(excluded, std::vector<std::string>{"RAWNET2 x melspec"});
}

TEST(ExpandGrid, EmptyGridThrows) {
  sh::ExperimentSpec s;
  s.models = {ModelId::RAWNET2};
  s.features = {sf::FeatureKind::melspec};
  s.lengths = {sf::LengthMode::full};
  EXPECT_THROW(sh::expand_grid(s), sh::EmptyGrid);
  s.features = {sf::FeatureKind::raw};
  s.seeds.clear();
  EXPECT_THROW(sh::expand_grid(s), sh::EmptyGrid);
}

TEST(ExpandGrid, SpecJsonRoundTrip) {
  auto s = sh::full_grid_spec();
  s.train_splits = {sd::Split::train, sd::Split::dev, sd::Split::eval};
  nlohmann::json j = s;
  EXPECT_EQ(j.get<sh::ExperimentSpec>(), s);
}

// ---------------------------------------------------------------- store

namespace {

sh::ResultRecord record(const std::string& model, std::uint64_t seed, double eer,
                        std::optional<double> tdcf = std::nullopt,
                        const std::string& manifest = "asvspoof_eval",
                        const std::string& feature = "logspec",
                        const std::string& length = "fixed4s") {
  sh::ResultRecord r;
  r.key = {model, feature, length, seed, manifest};
  r.result.eer = eer;
  r.result.eer_threshold = 0.5;
  r.result.min_tdcf = tdcf;
  r.provenance = {"abc", "rev", "2026-01-01T00:00:00Z", "2026-01-01T00:01:00Z"};
  return r;
}

}  // namespace

TEST(ResultsStore, InsertFindAndPersist) {
  TempDir dir;
  {
    sh::ResultsStore store(dir / "r.sqlite");
    store.insert(record("LCNN", 0, 0.1, 0.2));
    const auto got = store.find({"LCNN", "logspec", "fixed4s", 0, "asvspoof_eval"});
    ASSERT_TRUE(got);
    EXPECT_EQ(got->result.eer, 0.1);
    EXPECT_EQ(got->result.min_tdcf, 0.2);
    EXPECT_EQ(got->provenance.config_hash, "abc");
  }
  sh::ResultsStore reopened(dir / "r.sqlite");
  EXPECT_TRUE(reopened.completed({"LCNN", "logspec", "fixed4s", 0, "asvspoof_eval"}));
  EXPECT_FALSE(reopened.completed({"LCNN", "logspec", "fixed4s", 1, "asvspoof_eval"}));
}

TEST(ResultsStore, CompletedRecordsAreImmutable) {
  TempDir dir;
  sh::ResultsStore store(dir / "r.sqlite");
  store.insert(record("LCNN", 0, 0.1));
  EXPECT_THROW(store.insert(record("LCNN", 0, 0.3)), sh::StoreError);
  store.record_failure({record("LCNN", 0, 0).key, "boom", {}});
  EXPECT_EQ(store.find(record("LCNN", 0, 0).key)->result.eer, 0.1);
  EXPECT_TRUE(store.failures().empty());
}

TEST(ResultsStore, FailureIsReplacedBySuccess) {
  TempDir dir;
  sh::ResultsStore store(dir / "r.sqlite");
  const auto r = record("LSTM", 2, 0.25);
  store.record_failure({r.key, "first", {}});
  store.record_failure({r.key, "second", {}});
  ASSERT_EQ(store.failures().size(), 1u);
  EXPECT_EQ(store.failures()[0].reason, "second");
  EXPECT_FALSE(store.completed(r.key));
  store.insert(r);
  EXPECT_TRUE(store.completed(r.key));
  EXPECT_TRUE(store.failures().empty());
}

TEST(ResultsStore, ConcurrentWritersAllLand) {
  TempDir dir;
  sh::ResultsStore store(dir / "r.sqlite");
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t) {
    ts.emplace_back([&, t] {
      for (int i = 0; i < 25; ++i) store.insert(record("M" + std::to_string(t), i, 0.01 * i));
    });
  }
  for (auto& t : ts) t.join();
  const auto all = store.results();
  EXPECT_EQ(all.size(), 100u);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end(),
                             [](const auto& a, const auto& b) { return a.key < b.key; }));
}

// ---------------------------------------------------------------- report

TEST(Report, EmptyStoreThrows) { EXPECT_THROW(sh::build_report({}), sh::EmptyStore); }

TEST(Report, SingleRunRendersZeroStd) {
  const auto rep = sh::build_report({record("LCNN", 0, 0.0512, 0.1234)});
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(sh::format_eer(rep.rows[0].row.eer_mean, rep.rows[0].row.eer_std), "5.12±0.00");
  EXPECT_EQ(sh::format_tdcf(*rep.rows[0].row.tdcf_mean, *rep.rows[0].row.tdcf_std),
            "0.123±0.00");
  EXPECT_NE(sh::render(rep, sh::ReportFormat::markdown).find("5.12±0.00"), std::string::npos);
}

TEST(Report, MarkdownAndCsvCarryTheSameNumbers) {
  std::vector<sh::ResultRecord> rs{record("LCNN", 0, 0.05, 0.1), record("LCNN", 1, 0.07, 0.2),
                                   record("LSTM", 0, 0.2, 0.4),
                                   record("LSTM", 0, 0.6, std::nullopt, "itw")};
  const auto rep = sh::build_report(rs);
  const auto md = sh::render(rep, sh::ReportFormat::markdown);
  const auto csv = sh::render(rep, sh::ReportFormat::csv);
  for (const auto& r : rep.rows) {
    const auto eer = sh::format_eer(r.row.eer_mean, r.row.eer_std);
    EXPECT_NE(md.find(eer), std::string::npos) << eer;
    EXPECT_NE(csv.find(eer), std::string::npos) << eer;
    if (r.row.tdcf_mean) {
      const auto t = sh::format_tdcf(*r.row.tdcf_mean, *r.row.tdcf_std);
      EXPECT_NE(md.find(t), std::string::npos);
      EXPECT_NE(csv.find(t), std::string::npos);
    }
  }
  EXPECT_NE(md.find("6.00±1.00"), std::string::npos);
  EXPECT_NE(csv.find("cell,asvspoof_eval,LCNN,logspec,fixed4s,2,6.00±1.00,0.150±0.05,1,1"),
            std::string::npos);
  // In-the-wild cells never carry a t-DCF.
  EXPECT_NE(csv.find("cell,itw,LSTM,logspec,fixed4s,1,60.00±0.00,-,1,0"), std::string::npos);
}

TEST(Report, InvariantToInsertionOrder) {
  std::vector<sh::ResultRecord> rs;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (const char* m : {"LCNN", "LSTM", "RESNET18"}) {
    for (const char* f : {"logspec", "cqtspec"}) {
      for (const char* l : {"full", "fixed4s"}) {
        for (std::uint64_t s = 0; s < 3; ++s) rs.push_back(record(m, s, u(rng), u(rng), "asvspoof_eval", f, l));
      }
    }
  }
  TempDir dir;
  sh::ResultsStore a(dir / "a.sqlite"), b(dir / "b.sqlite");
  for (const auto& r : rs) a.insert(r);
  std::shuffle(rs.begin(), rs.end(), rng);
  for (const auto& r : rs) b.insert(r);
  std::shuffle(rs.begin(), rs.end(), rng);
  const auto ref = sh::render(sh::build_report(a.results()), sh::ReportFormat::csv);
  EXPECT_EQ(sh::render(sh::build_report(b.results()), sh::ReportFormat::csv), ref);
  EXPECT_EQ(sh::render(sh::build_report(rs), sh::ReportFormat::csv), ref);
}

TEST(Report, BestConfigurationPerModel) {
  const auto rep = sh::build_report({record("LCNN", 0, 0.3, std::nullopt, "e", "logspec"),
                                     record("LCNN", 0, 0.1, std::nullopt, "e", "cqtspec"),
                                     record("LSTM", 0, 0.5, std::nullopt, "e", "logspec")});
  for (const auto& r : rep.rows) {
    const bool want = (r.row.model == "LCNN" && r.row.feature == "cqtspec") || r.row.model == "LSTM";
    EXPECT_EQ(r.best, want) << r.row.model << " " << r.row.feature;
    EXPECT_FALSE(r.best_tdcf);
  }
}

TEST(Report, PublishedImportReproducesCellsAndRollup) {
  TempDir dir;
  sh::ResultsStore store(dir / "r.sqlite");
  EXPECT_EQ(sh::import_published(store, fixture("published_table1.csv")), 56u);
  const auto rep = sh::build_report(store.results());
  const auto md = sh::render(rep, sh::ReportFormat::markdown);
  // Best EER and best t-DCF are flagged independently.
  EXPECT_NE(md.find("| LCNN | cqtspec | full | 2 | **6.35±0.39** | 0.174±0.03 |"), std::string::npos);
  EXPECT_NE(md.find("|  | logspec | full | 2 | 7.54±0.42 | **0.141±0.02** |"), std::string::npos);
  ASSERT_EQ(rep.rollup.size(), 4u);
  EXPECT_EQ(rep.rollup[0].eval_manifest, "asv");
  EXPECT_EQ(rep.rollup[0].length, "full");
  EXPECT_NEAR(rep.rollup[0].eer_mean, 9.85, 0.01);
  EXPECT_NEAR(rep.rollup[1].eer_mean, 18.89, 0.01);
  EXPECT_NEAR(*rep.rollup[0].tdcf_mean, 0.22, 0.005);
  EXPECT_NEAR(*rep.rollup[1].tdcf_mean, 0.39, 0.005);
  EXPECT_NEAR(rep.rollup[2].eer_mean, 60.10, 0.01);
  EXPECT_NEAR(rep.rollup[3].eer_mean, 67.25, 0.01);
  EXPECT_FALSE(rep.rollup[2].tdcf_mean);
}

// ---------------------------------------------------------------- config

namespace {

nlohmann::json config_doc() {
  auto src = [](const std::string& split) {
    return nlohmann::json{{"protocol", "protocols/" + split + ".txt"},
                          {"audio", "audio"},
                          {"split", split},
                          {"extension", ".wav"}};
  };
  return {{"experiment",
           {{"models", {"LSTM"}},
            {"features", {"logspec"}},
            {"lengths", {"fixed4s"}},
            {"seeds", {0}},
            {"eval_manifests", {"synth_eval"}}}},
          {"training", {{"max_epochs", 1}, {"batch_size", 8}, {"learning_rate", 1e-3}}},
          {"data", {{"train", src("train")}, {"dev", src("dev")}, {"eval", {{"synth_eval", src("eval")}}}}}};
}

// Small synthetic corpus split three ways, with protocols under root.
void write_corpus(const std::filesystem::path& root, std::size_t clips) {
  const auto all = sd::generate_synthetic_corpus(clips, 0.5, 5, root / "audio");
  const auto parts = sd::split_stratified(all, {0.5, 0.25, 0.25},
                                          {sd::Split::train, sd::Split::dev, sd::Split::eval}, 5);
  std::filesystem::create_directories(root / "protocols");
  const char* names[] = {"train", "dev", "eval"};
  for (int i = 0; i < 3; ++i) {
    std::ofstream(root / "protocols" / (std::string(names[i]) + ".txt"))
        << sd::serialize_asvspoof_protocol(parts[i]);
  }
}

}  // namespace

TEST(Config, ParsesAndHashesCanonically) {
  const auto c = sh::parse_config(config_doc());
  EXPECT_EQ(c.training.max_epochs, 1u);
  EXPECT_EQ(c.eval.at("synth_eval").split, sd::Split::eval);
  EXPECT_EQ(c.hash().size(), 16u);
  // Key order in the source text does not matter.
  const auto reordered = nlohmann::json::parse(
      R"({"data": )" + config_doc()["data"].dump() + R"(, "training": )" +
      config_doc()["training"].dump() + R"(, "experiment": )" + config_doc()["experiment"].dump() + "}");
  EXPECT_EQ(sh::config_hash(reordered), c.hash());
  auto changed = config_doc();
  changed["training"]["max_epochs"] = 2;
  EXPECT_NE(sh::config_hash(changed), c.hash());
}

TEST(Config, RejectsBadDocuments) {
  auto doc = config_doc();
  doc["extra"] = 1;
  EXPECT_THROW(sh::parse_config(doc), sh::ConfigError);
  doc = config_doc();
  doc["experiment"]["eval_manifests"] = {"nowhere"};
  EXPECT_THROW(sh::parse_config(doc), sh::ConfigError);
  doc = config_doc();
  doc["data"]["train"].erase("protocol");
  EXPECT_THROW(sh::parse_config(doc), sh::ConfigError);
}

TEST(Config, DataRootPrecedence) {
  ::setenv("SPOOFBENCH_DATA_ROOT", "/from/env", 1);
  EXPECT_EQ(sh::resolve_data_root(std::string("/from/flag")), "/from/flag");
  EXPECT_EQ(sh::resolve_data_root(std::nullopt), "/from/env");
  ::unsetenv("SPOOFBENCH_DATA_ROOT");
  EXPECT_EQ(sh::resolve_data_root(std::nullopt), std::filesystem::current_path());
}

TEST(Config, MissingDataIsReported) {
  TempDir dir;
  const auto c = sh::parse_config(config_doc());
  EXPECT_THROW(sh::load_datasets(c, dir.path()), sh::DataMissing);
}

// ---------------------------------------------------------------- run_grid

TEST(RunGrid, ResumesAndRescoresBitExactly) {
  TempDir dir;
  write_corpus(dir / "data", 16);
  auto doc = config_doc();
  doc["experiment"]["seeds"] = {0, 1, 2};
  const auto config = sh::parse_config(doc);
  sh::ResultsStore store(dir / "run" / "results.sqlite");
  sh::GridOptions opt{dir / "data", dir / "run", 1, std::nullopt, nullptr};

  // An interrupted run: only seed 1 finished.
  opt.seed = 1;
  auto first = sh::run_grid(config, store, opt);
  EXPECT_EQ(first.completed, 1u);
  EXPECT_EQ(first.failed, 0u);

  opt.seed.reset();
  auto second = sh::run_grid(config, store, opt);
  EXPECT_EQ(second.completed, 2u);
  EXPECT_EQ(second.skipped, 1u);

  const auto data = sh::load_datasets(config, dir / "data");
  const auto records = store.results();
  ASSERT_EQ(records.size(), 3u);
  for (const auto& r : records) {
    ASSERT_TRUE(std::filesystem::exists(r.score_path)) << r.score_path;
    const auto again = sh::rescore(r.score_path, data.eval.at("synth_eval"));
    EXPECT_EQ(again.eer, r.result.eer);
    EXPECT_EQ(again.eer_threshold, r.result.eer_threshold);
    EXPECT_FALSE(r.result.min_tdcf);
    EXPECT_EQ(r.provenance.config_hash, config.hash());
  }
  const auto rep = sh::build_report(records);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].row.n_runs, 3u);

  const auto third = sh::run_grid(config, store, opt);
  EXPECT_EQ(third.completed, 0u);
  EXPECT_EQ(third.skipped, 3u);
}

TEST(RunGrid, FailuresAreRecordedWithoutAbortingTheGrid) {
  TempDir dir;
  write_corpus(dir / "data", 16);
  auto doc = config_doc();
  doc["experiment"]["models"] = {"MESONET", "LSTM"};
  doc["hyperparams"] = {{"MESONET", {{"no_such_knob", 1}}}};
  const auto config = sh::parse_config(doc);
  sh::ResultsStore store(dir / "run" / "results.sqlite");
  const auto s = sh::run_grid(config, store, {dir / "data", dir / "run", 2, std::nullopt, nullptr});
  EXPECT_EQ(s.failed, 1u);
  EXPECT_EQ(s.completed, 1u);
  ASSERT_EQ(store.failures().size(), 1u);
  EXPECT_EQ(store.failures()[0].key.model, "MESONET");
  EXPECT_NE(store.failures()[0].reason.find("no_such_knob"), std::string::npos);
  EXPECT_EQ(store.results().at(0).key.model, "LSTM");
}
