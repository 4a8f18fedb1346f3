#include "spoofbench/harness/store.hpp"

#include <sqlite3.h>

#include <chrono>
#include <cmath>
#include <ctime>

#ifndef SPOOFBENCH_REVISION
#define SPOOFBENCH_REVISION "unknown"
#endif

namespace spoofbench::harness {
namespace {

// RAII prepared statement.
class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw StoreError(std::string("sqlite prepare: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }

  Statement& text(int i, const std::string& s) {
    sqlite3_bind_text(stmt_, i, s.c_str(), -1, SQLITE_TRANSIENT);
    return *this;
  }
  Statement& integer(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  Statement& real(int i, std::optional<double> v) {
    if (v) {
      sqlite3_bind_double(stmt_, i, *v);
    } else {
      sqlite3_bind_null(stmt_, i);
    }
    return *this;
  }
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw StoreError(std::string("sqlite step: ") + sqlite3_errmsg(db_));
  }
  std::string col_text(int i) const {
    auto p = sqlite3_column_text(stmt_, i);
    return p ? reinterpret_cast<const char*>(p) : "";
  }
  std::int64_t col_int(int i) const { return sqlite3_column_int64(stmt_, i); }
  std::optional<double> col_real(int i) const {
    if (sqlite3_column_type(stmt_, i) == SQLITE_NULL) return std::nullopt;
    return sqlite3_column_double(stmt_, i);
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    throw StoreError("sqlite: " + msg);
  }
}

void bind_key(Statement& s, const ResultKey& k) {
  s.text(1, k.model).text(2, k.feature).text(3, k.length);
  s.integer(4, static_cast<std::int64_t>(k.seed)).text(5, k.eval_manifest);
}

ResultKey read_key(const Statement& s) {
  return {s.col_text(0), s.col_text(1), s.col_text(2), static_cast<std::uint64_t>(s.col_int(3)),
          s.col_text(4)};
}

constexpr const char* kColumns =
    "model, feature, length, seed, eval_manifest, status, eer, eer_threshold, min_tdcf, "
    "score_path, failure_reason, config_hash, revision, started_at, finished_at";

}  // namespace

ResultsStore::ResultsStore(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (sqlite3_open_v2(path.c_str(), &db_,
                      SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw StoreError("cannot open results store " + path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 10000);
  exec(db_,
       "CREATE TABLE IF NOT EXISTS results ("
       " model TEXT NOT NULL, feature TEXT NOT NULL, length TEXT NOT NULL,"
       " seed INTEGER NOT NULL, eval_manifest TEXT NOT NULL,"
       " status TEXT NOT NULL CHECK (status IN ('done', 'failed')),"
       " eer REAL, eer_threshold REAL, min_tdcf REAL, score_path TEXT,"
       " failure_reason TEXT, config_hash TEXT, revision TEXT,"
       " started_at TEXT, finished_at TEXT,"
       " PRIMARY KEY (model, feature, length, seed, eval_manifest));");
}

ResultsStore::~ResultsStore() { sqlite3_close(db_); }

void ResultsStore::insert(const ResultRecord& r) {
  std::lock_guard<std::mutex> lock(mutex_);
  exec(db_, "BEGIN IMMEDIATE;");
  try {
    {
      Statement q(db_,
                  "SELECT status FROM results WHERE model=?1 AND feature=?2 AND length=?3 AND "
                  "seed=?4 AND eval_manifest=?5;");
      bind_key(q, r.key);
      if (q.step() && q.col_text(0) == "done") {
        throw StoreError("completed record already exists for " + r.key.model + "/" +
                         r.key.feature + "/" + r.key.length + "/seed " +
                         std::to_string(r.key.seed) + "/" + r.key.eval_manifest);
      }
    }
    Statement s(db_,
                "INSERT OR REPLACE INTO results VALUES (?1, ?2, ?3, ?4, ?5, 'done', ?6, ?7, ?8, "
                "?9, NULL, ?10, ?11, ?12, ?13);");
    bind_key(s, r.key);
    s.real(6, r.result.eer).real(7, r.result.eer_threshold).real(8, r.result.min_tdcf);
    s.text(9, r.score_path).text(10, r.provenance.config_hash).text(11, r.provenance.revision);
    s.text(12, r.provenance.started_at).text(13, r.provenance.finished_at);
    s.step();
    exec(db_, "COMMIT;");
  } catch (...) {
    exec(db_, "ROLLBACK;");
    throw;
  }
}

void ResultsStore::record_failure(const FailureRecord& f) {
  std::lock_guard<std::mutex> lock(mutex_);
  // A completed record is never overwritten by a later failure.
  Statement s(db_,
              "INSERT INTO results VALUES (?1, ?2, ?3, ?4, ?5, 'failed', NULL, NULL, NULL, NULL, "
              "?6, ?7, ?8, ?9, ?10) "
              "ON CONFLICT (model, feature, length, seed, eval_manifest) DO UPDATE SET "
              "failure_reason=excluded.failure_reason, config_hash=excluded.config_hash, "
              "revision=excluded.revision, started_at=excluded.started_at, "
              "finished_at=excluded.finished_at WHERE status='failed';");
  bind_key(s, f.key);
  s.text(6, f.reason).text(7, f.provenance.config_hash).text(8, f.provenance.revision);
  s.text(9, f.provenance.started_at).text(10, f.provenance.finished_at);
  s.step();
}

bool ResultsStore::completed(const ResultKey& key) const { return find(key).has_value(); }

std::optional<ResultRecord> ResultsStore::find(const ResultKey& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  Statement q(db_, (std::string("SELECT ") + kColumns +
                    " FROM results WHERE model=?1 AND feature=?2 AND length=?3 AND seed=?4 AND "
                    "eval_manifest=?5 AND status='done';")
                       .c_str());
  bind_key(q, key);
  if (!q.step()) return std::nullopt;
  ResultRecord r;
  r.key = read_key(q);
  r.result.eer = q.col_real(6).value_or(std::nan(""));
  r.result.eer_threshold = q.col_real(7).value_or(std::nan(""));
  r.result.min_tdcf = q.col_real(8);
  r.score_path = q.col_text(9);
  r.provenance = {q.col_text(11), q.col_text(12), q.col_text(13), q.col_text(14)};
  return r;
}

std::vector<ResultRecord> ResultsStore::results() const {
  std::lock_guard<std::mutex> lock(mutex_);
  Statement q(db_, (std::string("SELECT ") + kColumns +
                    " FROM results WHERE status='done' ORDER BY model, feature, length, seed, "
                    "eval_manifest;")
                       .c_str());
  std::vector<ResultRecord> out;
  while (q.step()) {
    ResultRecord r;
    r.key = read_key(q);
    r.result.eer = q.col_real(6).value_or(std::nan(""));
    r.result.eer_threshold = q.col_real(7).value_or(std::nan(""));
    r.result.min_tdcf = q.col_real(8);
    r.score_path = q.col_text(9);
    r.provenance = {q.col_text(11), q.col_text(12), q.col_text(13), q.col_text(14)};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<FailureRecord> ResultsStore::failures() const {
  std::lock_guard<std::mutex> lock(mutex_);
  Statement q(db_, (std::string("SELECT ") + kColumns +
                    " FROM results WHERE status='failed' ORDER BY model, feature, length, seed, "
                    "eval_manifest;")
                       .c_str());
  std::vector<FailureRecord> out;
  while (q.step()) {
    out.push_back({read_key(q), q.col_text(10),
                   {q.col_text(11), q.col_text(12), q.col_text(13), q.col_text(14)}});
  }
  return out;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string build_revision() { return SPOOFBENCH_REVISION; }

}  // namespace spoofbench::harness
