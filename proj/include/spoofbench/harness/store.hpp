#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "spoofbench/metrics/aggregate.hpp"

struct sqlite3;

namespace spoofbench::harness {

class StoreError : public Error {
 public:
  using Error::Error;
};

class EmptyStore : public Error {
 public:
  EmptyStore() : Error("results store holds no completed records") {}
};

struct ResultKey {
  std::string model;
  std::string feature;
  std::string length;
  std::uint64_t seed = 0;
  std::string eval_manifest;

  bool operator==(const ResultKey&) const = default;
  auto operator<=>(const ResultKey&) const = default;
};

struct Provenance {
  std::string config_hash;
  std::string revision;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;
};

struct ResultRecord {
  ResultKey key;
  metrics::EvalResult result;
  std::string score_path;  // empty when no score file exists
  Provenance provenance;
};

struct FailureRecord {
  ResultKey key;
  std::string reason;
  Provenance provenance;
};

// Append-only results table in an SQLite file. Completed records are
// immutable; failures may be retried and are replaced by a later success.
// Safe for concurrent use from multiple threads of one process.
class ResultsStore {
 public:
  explicit ResultsStore(const std::filesystem::path& path);
  ~ResultsStore();
  ResultsStore(const ResultsStore&) = delete;
  ResultsStore& operator=(const ResultsStore&) = delete;

  // Throws StoreError if the key already holds a completed record.
  void insert(const ResultRecord& record);
  void record_failure(const FailureRecord& failure);

  bool completed(const ResultKey& key) const;
  std::optional<ResultRecord> find(const ResultKey& key) const;
  // Sorted by key.
  std::vector<ResultRecord> results() const;
  std::vector<FailureRecord> failures() const;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  sqlite3* db_ = nullptr;
  mutable std::mutex mutex_;
};

std::string utc_now();

// Source revision the binary was built from ("unknown" outside git).
std::string build_revision();

}  // namespace spoofbench::harness
