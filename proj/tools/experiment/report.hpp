#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace projbal::cli {

/// Bumped by hand whenever a numerical path changes; part of every cache key.
inline constexpr const char* kCodeTag = "projbal-0.1.0-r3";

struct Assertion {
  std::string name;
  std::string anchor;  // which stated result this checks
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct ReportRecord {
  std::string experiment;
  std::string config_hash;
  std::string code_version = kCodeTag;
  std::vector<Assertion> assertions;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> warnings;
  nlohmann::json timings = nlohmann::json::object();  // wall-clock, kept out of the report

  void check(std::string name, std::string anchor, double measured, double tol, std::string note = "");
  /// Passes when measured >= bound (tolerance holds the bound).
  void at_least(std::string name, std::string anchor, double measured, double bound, std::string note = "");
  void require(std::string name, std::string anchor, bool ok, std::string note = "");
  bool all_pass() const;

  nlohmann::json to_json() const;  // deterministic: no timings
  static ReportRecord from_json(const nlohmann::json& j);
};

/// Every anchor string any suite can emit, for --list-anchors.
const std::vector<std::pair<std::string, std::string>>& known_anchors();

/// Appends records to <out>/report.ndjson and timings to <out>/timings.ndjson;
/// CSV side-files go next to them.  Safe to share between threads.
class ReportWriter {
 public:
  explicit ReportWriter(std::filesystem::path out);

  void append(const ReportRecord& rec);
  void write_csv(const std::string& file, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);
  const std::filesystem::path& dir() const { return out_; }
  std::vector<std::string> csv_files() const;

 private:
  std::filesystem::path out_;
  std::vector<std::string> csv_;
  mutable std::mutex mu_;
};

/// Reads a report.ndjson back.
std::vector<ReportRecord> read_report(const std::filesystem::path& file);

/// %.17g, the form used in every CSV cell.
std::string format_double(double v);

// Cache: <dir>/<experiment>-<hash>.json plus a sibling .files/ directory holding
// the CSV side-files.  A hit needs both hash and code tag to match; on a hit the
// side-files are copied into restore_to.
std::optional<std::filesystem::path> cache_dir_from_env();
std::optional<ReportRecord> cache_lookup(const std::filesystem::path& dir, const std::string& experiment,
                                         const std::string& hash, const std::filesystem::path& restore_to);
void cache_store(const std::filesystem::path& dir, const ReportRecord& rec, const std::filesystem::path& csv_dir,
                 const std::vector<std::string>& csv_files);

}  // namespace projbal::cli
