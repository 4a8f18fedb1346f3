// Acceptance checks. Prints one PASS/FAIL line per criterion; with
// --criterion N runs only that one. Exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "eer_oracle.hpp"
#include "model_helpers.hpp"
#include "overfit.hpp"
#include "spoofbench/features/length_policy.hpp"
#include "spoofbench/harness/report.hpp"
#include "spoofbench/harness/store.hpp"
#include "spoofbench/metrics/aggregate.hpp"
#include "spoofbench/metrics/eer.hpp"
#include "spoofbench/metrics/tdcf.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace spoofbench;
using testing::fixture;
using testing::read_text;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// Random score set of 2-50 records with both classes; coarse sets are
// quantized so ties are common.
void random_scores(std::mt19937_64& rng, bool coarse, std::vector<double>& bona,
                   std::vector<double>& spoof) {
  const int n = std::uniform_int_distribution<int>(2, 50)(rng);
  const int nb = std::uniform_int_distribution<int>(1, n - 1)(rng);
  const double mu = std::uniform_real_distribution<double>(-1.0, 3.0)(rng);
  std::normal_distribution<double> d;
  bona.clear();
  spoof.clear();
  for (int i = 0; i < n; ++i) {
    double v = d(rng) + (i < nb ? mu : 0.0);
    if (coarse) v = std::round(v * 4.0) / 4.0;
    (i < nb ? bona : spoof).push_back(v);
  }
}

// 1. EER against the brute-force midpoint oracle.
Outcome eer_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::vector<double> b, s;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    random_scores(rng, i % 2 == 1, b, s);
    const double got = metrics::compute_eer(b, s).eer;
    const double want = testing::brute_force_eer(b, s);
    worst = std::max(worst, std::abs(got - want));
    o.require(std::abs(got - want) <= 1e-9, "set " + std::to_string(i) + " differs by " +
                                                fmt("%.3g", std::abs(got - want)));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "runtime " + fmt("%.1f s", secs));
  if (o.pass) o.detail = "1000 sets, max |diff| " + fmt("%.2g", worst) + ", " + fmt("%.2f s", secs);
  return o;
}

// 2. EER edge cases and monotone-transform invariance.
Outcome eer_edges() {
  Outcome o;
  const std::vector<double> hi{3, 4, 5}, lo{0, 1, 2};
  o.require(metrics::compute_eer(hi, lo).eer == 0.0, "separated set is not 0");
  o.require(metrics::compute_eer(lo, hi).eer == 1.0, "inverted set is not 1");
  std::mt19937_64 rng(99);
  std::vector<double> b, s;
  for (int i = 0; i < 100; ++i) {
    random_scores(rng, i % 2 == 1, b, s);
    const double base = metrics::compute_eer(b, s).eer;
    auto warp = [](std::vector<double> v) {
      for (auto& x : v) x = std::exp(0.5 * x) + 3.0 * x;
      return v;
    };
    const double warped = metrics::compute_eer(warp(b), warp(s)).eer;
    o.require(base == warped, "set " + std::to_string(i) + " changed under a monotone map");
  }
  if (o.pass) o.detail = "0.0 / 1.0 / 100 warped sets identical";
  return o;
}

metrics::ScoreRecord rec(const std::string& id, double v, dataio::Label l) { return {id, v, l}; }

// 3. t-DCF against values from the challenge reference code.
Outcome tdcf_reference() {
  Outcome o;
  const auto expected = nlohmann::json::parse(read_text(fixture("tdcf/expected.json")));
  o.require(expected.size() == 20, "expected 20 golden cases");
  double worst = 0.0;
  for (const auto& [name, value] : expected.items()) {
    const auto protocol = dataio::parse_asvspoof_protocol(
        read_text(fixture("tdcf/" + name + "_protocol.txt")), "", dataio::Split::eval);
    const auto cm =
        metrics::join_labels(metrics::read_score_file(fixture("tdcf/" + name + "_cm.txt")), protocol);
    const auto asv = metrics::read_asv_scores(fixture("tdcf/" + name + "_asv.txt"));
    const double diff = std::abs(metrics::compute_tdcf(cm, asv) - value.get<double>());
    worst = std::max(worst, diff);
    o.require(diff <= 1e-9, name + " differs by " + fmt("%.3g", diff));
  }
  metrics::AsvScores asv;
  for (int i = 0; i < 20; ++i) {
    asv.target.push_back(5.0 + 0.1 * i);
    asv.nontarget.push_back(-5.0 - 0.1 * i);
    asv.spoof.push_back(5.5 + 0.05 * i);
  }
  using dataio::Label;
  const std::vector<metrics::ScoreRecord> perfect{rec("b0", 2, Label::bonafide),
                                                  rec("b1", 3, Label::bonafide),
                                                  rec("s0", -1, Label::spoof),
                                                  rec("s1", 0, Label::spoof)};
  const std::vector<metrics::ScoreRecord> flat{rec("b0", 0.3, Label::bonafide),
                                               rec("b1", 0.3, Label::bonafide),
                                               rec("s0", 0.3, Label::spoof),
                                               rec("s1", 0.3, Label::spoof)};
  o.require(metrics::compute_tdcf(perfect, asv) == 0.0, "perfect system is not 0");
  o.require(metrics::compute_tdcf(flat, asv) == 1.0, "uninformative CM is not 1");
  if (o.pass) o.detail = "20 cases, max |diff| " + fmt("%.2g", worst) + "; perfect 0, flat 1";
  return o;
}

std::vector<harness::ResultRecord> published_records() {
  testing::TempDir dir;
  harness::ResultsStore store(dir / "results.sqlite");
  harness::import_published(store, fixture("published_table1.csv"));
  return store.results();
}

// 4. Input-length roll-up from the published per-cell means.
Outcome table2_rollup() {
  Outcome o;
  const auto t0 = Clock::now();
  testing::TempDir dir;
  harness::ResultsStore store(dir / "results.sqlite");
  const auto rows = harness::import_published(store, fixture("published_table1.csv"));
  const auto report = harness::build_report(store.results());
  const auto text = harness::render(report, harness::ReportFormat::markdown);
  const double secs = seconds_since(t0);
  o.require(rows == 56, "imported " + std::to_string(rows) + " rows, want 56");
  const struct {
    const char* length;
    double eer, tdcf;
  } want[] = {{"full", 9.85, 0.22}, {"fixed4s", 18.89, 0.39}};
  std::string got;
  for (const auto& w : want) {
    bool found = false;
    for (const auto& r : report.rollup) {
      if (r.eval_manifest != "asv" || r.length != w.length) continue;
      found = true;
      o.require(r.n_cells == 28, std::string(w.length) + " has " + std::to_string(r.n_cells) +
                                     " cells");
      o.require(std::abs(r.eer_mean - w.eer) <= 0.01,
                std::string(w.length) + " EER " + fmt("%.4f", r.eer_mean));
      o.require(r.tdcf_mean && std::abs(*r.tdcf_mean - w.tdcf) <= 0.005,
                std::string(w.length) + " t-DCF " + fmt("%.4f", r.tdcf_mean.value_or(NAN)));
      got += std::string(w.length) + " " + fmt("%.2f", r.eer_mean) + "/" +
             fmt("%.4f", r.tdcf_mean.value_or(NAN)) + " ";
    }
    o.require(found, std::string("no roll-up row for ") + w.length);
  }
  o.require(text.find("| asv | full | 28 | 9.85 |") != std::string::npos,
            "rendered summary lacks the full-length row");
  o.require(secs < 1.0, "runtime " + fmt("%.2f s", secs));
  if (o.pass) o.detail = got + fmt("(%.3f s)", secs);
  return o;
}

// 5. melspec -> cqtspec reduction over the published cells.
Outcome feature_effect() {
  Outcome o;
  const auto report = harness::build_report(published_records());
  const auto rows = harness::aggregate_manifest(report, "asv");
  const auto fx = metrics::feature_effect(rows, "melspec", "cqtspec");
  o.require(fx.n_pairs == 16, std::to_string(fx.n_pairs) + " pairs, want 16");
  o.require(fx.mean_pairwise_reduction >= 0.30 && fx.mean_pairwise_reduction <= 0.42,
            "mean reduction " + fmt("%.4f", fx.mean_pairwise_reduction));
  if (o.pass) {
    o.detail = "mean pairwise " + fmt("%.2f%%", 100 * fx.mean_pairwise_reduction) +
               ", pooled " + fmt("%.2f%%", 100 * fx.pooled_reduction);
  }
  return o;
}

bool same_parameters(models::DetectorImpl& a, models::DetectorImpl& b) {
  const auto pa = a.named_parameters(), pb = b.named_parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].key() != pb[i].key() || !torch::equal(pa[i].value(), pb[i].value())) return false;
  }
  return true;
}

// 6. Determinism, shapes on 4 s and 16 s inputs and gradient reach.
Outcome model_contracts() {
  Outcome o;
  const auto t0 = Clock::now();
  for (auto id : models::kAllModels) {
    const std::string name(models::to_string(id));
    auto a = models::build(models::ModelConfig::defaults(id, 11));
    auto b = models::build(models::ModelConfig::defaults(id, 11));
    o.require(same_parameters(*a, *b), name + " is not deterministic");
    const auto kind = a->input_kind();
    for (std::int64_t seconds : {4, 16}) {
      const std::int64_t len = kind == models::InputKind::raw ? seconds * 16000
                                                              : 1 + seconds * 16000 / 256;
      a->eval();
      torch::NoGradGuard no_grad;
      auto y = models::forward(*a, testing::synthetic_input(kind, 2, len));
      o.require(y.sizes() == torch::IntArrayRef({2, 2}),
                name + " " + std::to_string(seconds) + " s logits have the wrong shape");
      o.require(torch::isfinite(y).all().item<bool>(),
                name + " " + std::to_string(seconds) + " s logits are not finite");
    }
    const std::int64_t len = kind == models::InputKind::raw ? 64000 : 251;
    const double frac = testing::nonzero_gradient_fraction(*a, testing::synthetic_input(kind, 2, len));
    o.require(frac >= 0.99, name + " gradient reaches " + fmt("%.3f", frac));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 300.0, "runtime " + fmt("%.0f s", secs));
  if (o.pass) o.detail = "12 models, " + fmt("%.0f s", secs);
  return o;
}

// 7. Overfitting one repeated batch.
Outcome overfit_one_batch() {
  Outcome o;
  const auto t0 = Clock::now();
  std::string summary;
  for (auto id : models::kAllModels) {
    const std::string name(models::to_string(id));
    const auto t = acceptance::overfit(id, 200, 1e-4, 1);
    const auto r = acceptance::rises_after(t.losses, 20);
    const double best = *std::min_element(t.losses.begin(), t.losses.end());
    o.require(r.count == 0, name + ": loss rose on " + std::to_string(r.count) +
                                " steps after step 20 (largest rise " + fmt("%.3g", r.largest) +
                                " of the previous loss)");
    o.require(best < 0.1, name + ": best loss " + fmt("%.4f", best));
    std::fprintf(stderr, "  %-15s final %.3g, largest relative rise %.3g, %.0f s elapsed\n",
                 name.c_str(), t.losses.back(), r.largest, seconds_since(t0));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 900.0, "runtime " + fmt("%.0f s", secs));
  if (o.pass) o.detail = "12 models, " + fmt("%.0f s", secs);
  return o;
}

std::string cli_path() { return SPOOFBENCH_CLI_PATH; }

int run(const std::string& cmd) {
  std::fprintf(stderr, "  $ %s\n", cmd.c_str());
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// 8. synth-data -> grid -> report through the CLI.
Outcome end_to_end() {
  Outcome o;
  const auto t0 = Clock::now();
  testing::TempDir dir;
  const auto data = dir / "data", out = dir / "run", csv = dir / "report.csv";
  o.require(run(cli_path() + " synth-data --clips 200 --seed 0 --out " + data.string()) == 0,
            "synth-data failed");
  o.require(run(cli_path() + " grid --config " + (data / "config.json").string() +
                " --data-root " + data.string() + " --out " + out.string()) == 0,
            "grid failed");
  o.require(run(cli_path() + " report --format csv --out " + out.string() + " --output " +
                csv.string()) == 0,
            "report failed");
  std::size_t cells = 0;
  std::string got;
  if (o.pass) {
    std::istringstream is(read_text(csv));
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      if (line.rfind("cell,", 0) != 0) continue;
      std::vector<std::string> f;
      std::stringstream ls(line);
      for (std::string c; std::getline(ls, c, ',');) f.push_back(c);
      const double eer = std::stod(f.at(6));  // "mean±std", percent
      ++cells;
      got += f[2] + "/" + f[3] + " " + fmt("%.2f%% ", eer);
      o.require(eer < 10.0, f[2] + "/" + f[3] + " EER " + fmt("%.2f%%", eer));
    }
  }
  o.require(cells == 4, std::to_string(cells) + " report cells, want 4");
  const double secs = seconds_since(t0);
  o.require(secs < 600.0, "runtime " + fmt("%.0f s", secs));
  if (o.pass) o.detail = got + fmt("(%.0f s)", secs);
  return o;
}

// 9. Length policy over random lengths and modes.
Outcome length_policy() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> len(1, 200000);
  for (int i = 0; i < 10000 && o.pass; ++i) {
    const std::size_t n = len(rng);
    features::LengthPolicy policy;
    policy.mode = rng() % 2 ? features::LengthMode::full : features::LengthMode::fixed4s;
    policy.rng_seed = rng();
    dataio::AudioClip clip{"utt" + std::to_string(i), std::vector<float>(n), 16000};
    for (std::size_t k = 0; k < n; ++k) clip.samples[k] = static_cast<float>((k * 2654435761u) % 1000);
    auto s1 = features::utterance_stream(policy, clip.utt_id);
    auto s2 = features::utterance_stream(policy, clip.utt_id);
    const auto a = features::apply_length_policy(clip, policy, s1);
    const auto b = features::apply_length_policy(clip, policy, s2);
    const std::size_t got = a.samples.size();
    if (policy.mode == features::LengthMode::fixed4s) {
      o.require(got == 64000, "fixed4s gave " + std::to_string(got) + " for " + std::to_string(n));
    } else {
      o.require(got >= 64000, "full gave " + std::to_string(got) + " for " + std::to_string(n));
      if (n >= 64000) o.require(a.samples == clip.samples, "full mode altered a long clip");
    }
    o.require(a.samples == b.samples, "same seed gave different output");
  }
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "runtime " + fmt("%.1f s", secs));
  if (o.pass) o.detail = "10000 cases, " + fmt("%.2f s", secs);
  return o;
}

dataio::DatasetManifest random_manifest(std::mt19937_64& rng, bool itw) {
  dataio::DatasetManifest m;
  const std::size_t n = 1 + rng() % 40;
  const std::string alphabet = itw ? "abcXYZ ,\"'-09" : "abcXYZ_09";
  for (std::size_t i = 0; i < n; ++i) {
    dataio::ManifestEntry e;
    e.utt_id = itw ? std::to_string(i) + ".wav" : "LA_G_" + std::to_string(100000 + i);
    if (itw) {
      e.speaker_id = "S";
      for (std::size_t k = 0, k_end = 1 + rng() % 8; k < k_end; ++k) {
        e.speaker_id += alphabet[rng() % alphabet.size()];
      }
    } else {
      e.speaker_id = "LA_" + std::to_string(rng() % 100);
    }
    e.label = rng() % 2 ? dataio::Label::spoof : dataio::Label::bonafide;
    if (!itw && e.label == dataio::Label::spoof && rng() % 4) {
      e.attack_id = fmt("A%02.0f", static_cast<double>(1 + rng() % 19));
    }
    e.split = itw ? dataio::Split::itw : dataio::Split::dev;
    e.path = fs::path("root") / (itw ? e.utt_id : e.utt_id + ".flac");
    m.entries.push_back(e);
  }
  return m;
}

bool matches_golden(const dataio::DatasetManifest& m, const nlohmann::json& golden) {
  if (m.entries.size() != golden.size()) return false;
  for (std::size_t i = 0; i < golden.size(); ++i) {
    const auto& e = m.entries[i];
    const auto& g = golden[i];
    if (e.utt_id != g[0] || e.speaker_id != g[1]) return false;
    if (g[2].is_null() ? e.attack_id.has_value() : e.attack_id != g[2].get<std::string>()) {
      return false;
    }
    if (dataio::to_string(e.label) != g[3].get<std::string>()) return false;
  }
  return true;
}

// 10. Manifest round trips and golden parses.
Outcome manifests() {
  Outcome o;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500 && o.pass; ++i) {
    auto a = random_manifest(rng, false);
    auto a2 = dataio::parse_asvspoof_protocol(dataio::serialize_asvspoof_protocol(a), "root",
                                              dataio::Split::dev);
    a2.name = a.name;  // names are not part of either file format
    o.require(a2 == a, "ASVspoof round trip failed on trial " + std::to_string(i));
    auto b = random_manifest(rng, true);
    auto b2 = dataio::parse_itw_manifest(dataio::serialize_itw_manifest(b), "root");
    b2.name = b.name;
    o.require(b2 == b, "in-the-wild round trip failed on trial " + std::to_string(i));
  }
  const auto golden = nlohmann::json::parse(read_text(fixture("manifest_golden.json")));
  o.require(matches_golden(dataio::parse_asvspoof_protocol(
                               read_text(fixture("asvspoof_protocol_excerpt.txt")), "/data",
                               dataio::Split::train),
                           golden["asvspoof"]),
            "ASVspoof excerpt differs from golden");
  o.require(matches_golden(dataio::parse_itw_manifest(read_text(fixture("itw_meta_excerpt.csv")),
                                                      "/data"),
                           golden["itw"]),
            "in-the-wild excerpt differs from golden");
  if (o.pass) o.detail = "500 + 500 round trips, 2 golden excerpts";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("--criterion", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"eer-oracle", eer_oracle},
      {"eer-edge-cases", eer_edges},
      {"tdcf-reference", tdcf_reference},
      {"length-rollup", table2_rollup},
      {"feature-effect", feature_effect},
      {"model-contracts", model_contracts},
      {"overfit-one-batch", overfit_one_batch},
      {"end-to-end", end_to_end},
      {"length-policy", length_policy},
      {"manifests", manifests},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
