#include "spoofbench/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "spoofbench/models/model_id.hpp"

namespace spoofbench::harness {
namespace {

std::size_t model_rank(const std::string& name) {
  for (std::size_t i = 0; i < models::kAllModels.size(); ++i) {
    if (models::to_string(models::kAllModels[i]) == name) return i;
  }
  return models::kAllModels.size();
}

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

}  // namespace

std::string format_eer(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", mean, std);
  return buf;
}

std::string format_tdcf(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f±%.2f", mean, std);
  return buf;
}

Report build_report(std::vector<ResultRecord> records) {
  if (records.empty()) throw EmptyStore();
  std::sort(records.begin(), records.end(),
            [](const ResultRecord& a, const ResultRecord& b) { return a.key < b.key; });

  // (manifest, model rank, model, feature, length rank, length) -> runs in
  // seed order. Full length sorts before fixed4s, as in the published table.
  using CellKey =
      std::tuple<std::string, std::size_t, std::string, std::string, int, std::string>;
  std::map<CellKey, std::vector<metrics::EvalResult>> cells;
  for (const auto& r : records) {
    const auto& k = r.key;
    cells[{k.eval_manifest, model_rank(k.model), k.model, k.feature, k.length == "full" ? 0 : 1,
           k.length}]
        .push_back(r.result);
  }

  Report report;
  for (const auto& [key, runs] : cells) {
    const auto& [manifest, rank, model, feature, length_rank, length] = key;
    report.rows.push_back({manifest, metrics::aggregate(runs, {model, feature, length}), false});
  }

  // Each column is highlighted on its own; ties keep the first row.
  std::map<std::pair<std::string, std::string>, std::size_t> best, best_tdcf;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    const std::pair<std::string, std::string> k{r.eval_manifest, r.row.model};
    auto [it, fresh] = best.try_emplace(k, i);
    if (!fresh && r.row.eer_mean < report.rows[it->second].row.eer_mean) it->second = i;
    if (!r.row.tdcf_mean) continue;
    auto [jt, tfresh] = best_tdcf.try_emplace(k, i);
    if (!tfresh && *r.row.tdcf_mean < *report.rows[jt->second].row.tdcf_mean) jt->second = i;
  }
  for (const auto& [k, i] : best) report.rows[i].best = true;
  for (const auto& [k, i] : best_tdcf) report.rows[i].best_tdcf = true;

  // Roll-up in fixed length order, full first.
  for (const auto& manifest : manifests(report)) {
    for (const std::string length : {"full", "fixed4s"}) {
      RollupRow roll{manifest, length, 0.0, 0.0, 0};
      bool all_tdcf = true;
      for (const auto& r : report.rows) {
        if (r.eval_manifest != manifest || r.row.length != length) continue;
        roll.eer_mean += r.row.eer_mean;
        if (r.row.tdcf_mean) {
          *roll.tdcf_mean += *r.row.tdcf_mean;
        } else {
          all_tdcf = false;
        }
        ++roll.n_cells;
      }
      if (roll.n_cells == 0) continue;
      roll.eer_mean /= static_cast<double>(roll.n_cells);
      if (all_tdcf) {
        *roll.tdcf_mean /= static_cast<double>(roll.n_cells);
      } else {
        roll.tdcf_mean.reset();
      }
      report.rollup.push_back(roll);
    }
  }
  return report;
}

std::vector<std::string> manifests(const Report& report) {
  std::vector<std::string> out;
  for (const auto& r : report.rows) {
    if (out.empty() || out.back() != r.eval_manifest) out.push_back(r.eval_manifest);
  }
  return out;
}

std::vector<metrics::AggregateRow> aggregate_manifest(const Report& report,
                                                      const std::string& eval_manifest) {
  std::vector<metrics::AggregateRow> out;
  for (const auto& r : report.rows) {
    if (r.eval_manifest == eval_manifest) out.push_back(r.row);
  }
  return out;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "markdown" || name == "md") return ReportFormat::markdown;
  if (name == "csv") return ReportFormat::csv;
  throw Error("unknown report format: " + name);
}

std::string render(const Report& report, ReportFormat format) {
  std::ostringstream os;
  const auto tdcf_cell = [](const metrics::AggregateRow& r) {
    return r.tdcf_mean ? format_tdcf(*r.tdcf_mean, *r.tdcf_std) : std::string("-");
  };
  if (format == ReportFormat::csv) {
    os << "section,eval_manifest,model,feature,length,n_runs,eer,tdcf,best_eer,best_tdcf\n";
    for (const auto& r : report.rows) {
      os << "cell," << r.eval_manifest << ',' << r.row.model << ',' << r.row.feature << ','
         << r.row.length << ',' << r.row.n_runs << ',' << format_eer(r.row.eer_mean, r.row.eer_std)
         << ',' << tdcf_cell(r.row) << ',' << (r.best ? 1 : 0) << ',' << (r.best_tdcf ? 1 : 0)
         << '\n';
    }
    for (const auto& r : report.rollup) {
      os << "rollup," << r.eval_manifest << ",ALL,ALL," << r.length << ',' << r.n_cells << ','
         << fmt("%.2f", r.eer_mean) << ',' << (r.tdcf_mean ? fmt("%.3f", *r.tdcf_mean) : "-")
         << ",0,0\n";
    }
    return os.str();
  }

  for (const auto& manifest : manifests(report)) {
    os << "## " << manifest << "\n\n"
       << "| Model | Feature | Length | Runs | EER (%) | min t-DCF |\n"
       << "|---|---|---|---|---|---|\n";
    std::string last_model;
    for (const auto& r : report.rows) {
      if (r.eval_manifest != manifest) continue;
      const bool first = r.row.model != last_model;
      last_model = r.row.model;
      auto eer = format_eer(r.row.eer_mean, r.row.eer_std);
      auto tdcf = tdcf_cell(r.row);
      if (r.best) eer = "**" + eer + "**";
      if (r.best_tdcf) tdcf = "**" + tdcf + "**";
      os << "| " << (first ? r.row.model : "") << " | " << r.row.feature << " | "
         << r.row.length << " | " << r.row.n_runs << " | " << eer << " | " << tdcf << " |\n";
    }
    os << '\n';
  }
  os << "## Average by input length\n\n"
     << "| Eval set | Length | Cells | EER (%) | min t-DCF |\n"
     << "|---|---|---|---|---|\n";
  for (const auto& r : report.rollup) {
    os << "| " << r.eval_manifest << " | " << r.length << " | " << r.n_cells << " | "
       << fmt("%.2f", r.eer_mean) << " | " << (r.tdcf_mean ? fmt("%.3f", *r.tdcf_mean) : "-")
       << " |\n";
  }
  return os.str();
}

std::size_t import_published(ResultsStore& store, const std::filesystem::path& csv) {
  std::ifstream is(csv);
  if (!is) throw Error("cannot read " + csv.string());
  std::string line;
  std::getline(is, line);
  const auto header = split_csv(line);
  const auto col = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  for (const char* need : {"model", "feature", "length"}) {
    if (!col(need)) throw Error(csv.string() + ": missing column " + need);
  }
  // Eval sets are the prefixes of "<set>_eer_mean" columns.
  std::vector<std::string> sets;
  for (const auto& h : header) {
    const std::string suffix = "_eer_mean";
    if (h.size() > suffix.size() && h.ends_with(suffix)) {
      sets.push_back(h.substr(0, h.size() - suffix.size()));
    }
  }
  if (sets.empty()) throw Error(csv.string() + ": no <set>_eer_mean columns");

  const Provenance prov{"published", "published", utc_now(), utc_now()};
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw Error(csv.string() + ": ragged row: " + line);
    for (const auto& set : sets) {
      const double m = std::stod(f[*col(set + "_eer_mean")]);
      const double s = col(set + "_eer_std") ? std::stod(f[*col(set + "_eer_std")]) : 0.0;
      std::optional<double> tm, ts;
      if (auto c = col(set + "_tdcf_mean"); c && !f[*c].empty()) {
        tm = std::stod(f[*c]);
        ts = col(set + "_tdcf_std") ? std::stod(f[*col(set + "_tdcf_std")]) : 0.0;
      }
      for (int sign : {-1, 1}) {
        metrics::EvalResult r;
        r.eer = (m + sign * s) / 100.0;
        r.eer_threshold = 0.0;
        if (tm) r.min_tdcf = *tm + sign * *ts;
        ResultKey key{f[*col("model")], f[*col("feature")], f[*col("length")],
                      static_cast<std::uint64_t>(sign < 0 ? 0 : 1), set};
        store.insert({key, r, "", prov});
      }
    }
    ++rows;
  }
  return rows;
}

}  // namespace spoofbench::harness
