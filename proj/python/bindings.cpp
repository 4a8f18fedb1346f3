#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <torch/torch.h>

#include "spoofbench/dataio/audio.hpp"
#include "spoofbench/dataio/synthetic.hpp"
#include "spoofbench/features/feature.hpp"
#include "spoofbench/features/length_policy.hpp"
#include "spoofbench/harness/experiment.hpp"
#include "spoofbench/harness/report.hpp"
#include "spoofbench/harness/store.hpp"
#include "spoofbench/metrics/eer.hpp"
#include "spoofbench/metrics/tdcf.hpp"
#include "spoofbench/models/model.hpp"

namespace py = pybind11;
using namespace spoofbench;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

FloatArray to_numpy(const std::vector<float>& v) {
  FloatArray a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

std::vector<float> from_numpy(const FloatArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array of samples");
  return {a.data(), a.data() + a.size()};
}

std::vector<metrics::ScoreRecord> cm_records(const std::vector<double>& bona,
                                             const std::vector<double>& spoof) {
  std::vector<metrics::ScoreRecord> r;
  for (std::size_t i = 0; i < bona.size(); ++i) {
    r.push_back({"b" + std::to_string(i), bona[i], dataio::Label::bonafide});
  }
  for (std::size_t i = 0; i < spoof.size(); ++i) {
    r.push_back({"s" + std::to_string(i), spoof[i], dataio::Label::spoof});
  }
  return r;
}

py::dict row_dict(const metrics::AggregateRow& r) {
  py::dict d;
  d["model"] = r.model;
  d["feature"] = r.feature;
  d["length"] = r.length;
  d["eer_mean"] = r.eer_mean;
  d["eer_std"] = r.eer_std;
  d["tdcf_mean"] = r.tdcf_mean ? py::cast(*r.tdcf_mean) : py::none();
  d["tdcf_std"] = r.tdcf_std ? py::cast(*r.tdcf_std) : py::none();
  d["n_runs"] = r.n_runs;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of the spoofbench package";

  py::register_exception<Error>(m, "SpoofbenchError", PyExc_RuntimeError);

  py::list names;
  for (auto id : models::kAllModels) names.append(std::string(models::to_string(id)));
  m.attr("MODELS") = names;

  m.def(
      "compute_eer",
      [](const std::vector<double>& bona, const std::vector<double>& spoof) {
        const auto r = metrics::compute_eer(bona, spoof);
        return py::make_tuple(r.eer, r.threshold);
      },
      py::arg("bonafide"), py::arg("spoof"),
      "Equal error rate (fraction) and its threshold; higher scores mean bonafide.");

  m.def(
      "compute_tdcf",
      [](const std::vector<double>& bona, const std::vector<double>& spoof,
         const std::vector<double>& target, const std::vector<double>& nontarget,
         const std::vector<double>& asv_spoof) {
        return metrics::compute_tdcf(cm_records(bona, spoof), {target, nontarget, asv_spoof});
      },
      py::arg("bonafide"), py::arg("spoof"), py::arg("asv_target"), py::arg("asv_nontarget"),
      py::arg("asv_spoof"), "Minimum normalized t-DCF with the 2019 cost model.");

  m.def(
      "load_audio",
      [](const std::filesystem::path& path) {
        return to_numpy(dataio::load_audio(path).samples);
      },
      py::arg("path"), "Decode WAV or FLAC to 16 kHz mono float samples.");

  m.def(
      "apply_length_policy",
      [](const FloatArray& samples, const std::string& mode, std::uint64_t seed,
         const std::string& utt_id) {
        features::LengthPolicy policy;
        policy.mode = features::parse_length_mode(mode);
        policy.rng_seed = seed;
        dataio::AudioClip clip{utt_id, from_numpy(samples), dataio::kCanonicalSampleRate};
        auto rng = features::utterance_stream(policy, utt_id);
        return to_numpy(features::apply_length_policy(clip, policy, rng).samples);
      },
      py::arg("samples"), py::arg("mode") = "fixed4s", py::arg("seed") = 0,
      py::arg("utt_id") = "utt");

  m.def(
      "extract_features",
      [](const FloatArray& samples, const std::string& kind) {
        dataio::AudioClip clip{"utt", from_numpy(samples), dataio::kCanonicalSampleRate};
        const auto f = features::extract(
            clip, features::FeatureConfig::defaults(features::parse_feature_kind(kind)));
        FloatArray out({static_cast<py::ssize_t>(f.bins), static_cast<py::ssize_t>(f.frames)});
        std::copy(f.values.begin(), f.values.end(), out.mutable_data());
        return out;
      },
      py::arg("samples"), py::arg("kind"),
      "Feature matrix (bins, frames) of 16 kHz samples; kind is logspec, melspec, cqtspec or raw.");

  m.def(
      "parameter_count",
      [](const std::string& model) {
        return models::parameter_count(
            *models::build(models::ModelConfig::defaults(models::parse_model_id(model))));
      },
      py::arg("model"));

  m.def(
      "score_model",
      [](const std::string& model, const FloatArray& input, std::uint64_t seed) {
        auto net = models::build(models::ModelConfig::defaults(models::parse_model_id(model), seed));
        net->eval();
        std::vector<std::int64_t> shape(input.shape(), input.shape() + input.ndim());
        auto x = torch::from_blob(const_cast<float*>(input.data()), shape, torch::kFloat32).clone();
        std::vector<double> scores;
        {
          py::gil_scoped_release release;
          torch::NoGradGuard no_grad;
          scores = models::score(models::forward(*net, x));
        }
        return scores;
      },
      py::arg("model"), py::arg("input"), py::arg("seed") = 0,
      "Bonafide log-probabilities of a freshly initialized model; input is (batch, 513, frames) "
      "for spectral models and (batch, samples) for raw ones.");

  m.def(
      "expand_grid",
      [](const std::vector<std::string>& model_names, const std::vector<std::string>& feats,
         const std::vector<std::string>& lengths) {
        harness::ExperimentSpec spec;
        for (const auto& s : model_names) spec.models.push_back(models::parse_model_id(s));
        for (const auto& s : feats) spec.features.push_back(features::parse_feature_kind(s));
        for (const auto& s : lengths) spec.lengths.push_back(features::parse_length_mode(s));
        std::vector<std::string> labels;
        for (const auto& c : harness::expand_grid(spec)) labels.push_back(c.label());
        return labels;
      },
      py::arg("models"), py::arg("features"), py::arg("lengths"));

  m.def(
      "generate_synthetic_corpus",
      [](std::size_t n, double balance, std::uint64_t seed, const std::filesystem::path& out) {
        std::vector<py::dict> rows;
        for (const auto& e : dataio::generate_synthetic_corpus(n, balance, seed, out).entries) {
          py::dict d;
          d["utt_id"] = e.utt_id;
          d["speaker_id"] = e.speaker_id;
          d["label"] = std::string(dataio::to_string(e.label));
          d["path"] = e.path.string();
          rows.push_back(d);
        }
        return rows;
      },
      py::arg("n_clips"), py::arg("balance"), py::arg("seed"), py::arg("out_dir"));

  m.def(
      "import_published",
      [](const std::filesystem::path& store, const std::filesystem::path& csv) {
        harness::ResultsStore s(store);
        return harness::import_published(s, csv);
      },
      py::arg("store"), py::arg("csv"));

  m.def(
      "build_report",
      [](const std::filesystem::path& store, const std::string& format) {
        harness::ResultsStore s(store);
        const auto report = harness::build_report(s.results());
        py::dict out;
        out["text"] = harness::render(report, harness::parse_report_format(format));
        py::list rows, rollup;
        for (const auto& r : report.rows) {
          auto d = row_dict(r.row);
          d["eval_manifest"] = r.eval_manifest;
          d["best"] = r.best;
          rows.append(d);
        }
        for (const auto& r : report.rollup) {
          py::dict d;
          d["eval_manifest"] = r.eval_manifest;
          d["length"] = r.length;
          d["eer_mean"] = r.eer_mean;
          d["tdcf_mean"] = r.tdcf_mean ? py::cast(*r.tdcf_mean) : py::none();
          d["n_cells"] = r.n_cells;
          rollup.append(d);
        }
        out["rows"] = rows;
        out["rollup"] = rollup;
        return out;
      },
      py::arg("store"), py::arg("format") = "markdown");

  m.def(
      "feature_effect",
      [](const std::filesystem::path& store, const std::string& eval_manifest,
         const std::string& from, const std::string& to) {
        harness::ResultsStore s(store);
        const auto rows =
            harness::aggregate_manifest(harness::build_report(s.results()), eval_manifest);
        const auto fx = metrics::feature_effect(rows, from, to);
        py::dict d;
        d["mean_pairwise_reduction"] = fx.mean_pairwise_reduction;
        d["pooled_reduction"] = fx.pooled_reduction;
        d["n_pairs"] = fx.n_pairs;
        return d;
      },
      py::arg("store"), py::arg("eval_manifest"), py::arg("from_kind"), py::arg("to_kind"));
}
