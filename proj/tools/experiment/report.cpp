#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace projbal::cli {

using nlohmann::json;

namespace {

// json has no NaN/inf; store them as strings so the report still parses
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double unnum(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return NAN;
}

}  // namespace

void ReportRecord::check(std::string name, std::string anchor, double measured, double tol, std::string note) {
  assertions.push_back({std::move(name), std::move(anchor), std::isfinite(measured) && measured <= tol, measured, tol,
                        std::move(note)});
}

void ReportRecord::at_least(std::string name, std::string anchor, double measured, double bound, std::string note) {
  assertions.push_back({std::move(name), std::move(anchor), measured >= bound, measured, bound, std::move(note)});
}

void ReportRecord::require(std::string name, std::string anchor, bool ok, std::string note) {
  assertions.push_back({std::move(name), std::move(anchor), ok, ok ? 1.0 : 0.0, 1.0, std::move(note)});
}

bool ReportRecord::all_pass() const {
  for (const auto& a : assertions)
    if (!a.pass) return false;
  return true;
}

json ReportRecord::to_json() const {
  json as = json::array();
  for (const auto& a : assertions)
    as.push_back({{"name", a.name},
                  {"anchor", a.anchor},
                  {"pass", a.pass},
                  {"measured", num(a.measured)},
                  {"tolerance", num(a.tolerance)},
                  {"note", a.note}});
  return {{"experiment", experiment}, {"config_hash", config_hash}, {"code_version", code_version},
          {"pass", all_pass()},       {"assertions", as},           {"results", results},
          {"warnings", warnings}};
}

ReportRecord ReportRecord::from_json(const json& j) {
  ReportRecord r;
  r.experiment = j.at("experiment").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.code_version = j.at("code_version").get<std::string>();
  for (const auto& a : j.at("assertions"))
    r.assertions.push_back({a.at("name").get<std::string>(), a.at("anchor").get<std::string>(), a.at("pass").get<bool>(),
                            unnum(a.at("measured")), unnum(a.at("tolerance")), a.at("note").get<std::string>()});
  r.results = j.at("results");
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

const std::vector<std::pair<std::string, std::string>>& known_anchors() {
  static const std::vector<std::pair<std::string, std::string>> a{
      {"sym-metric-diagonal", "Sym^d of the identity metric is diag(I!/d!) in monomials"},
      {"hat-pairing-constant", "∫<ŝ,t̂> ω^{r-1}/(r-1)! over P(V*) equals a constant times Sym^d h"},
      {"sym-hermitian", "S^d maps h-hermitian endomorphisms to Sym^d h-hermitian ones"},
      {"sym-einstein", "Sym^d of a Hermitian–Einstein metric is Hermitian–Einstein; curvature is S^d of curvature"},
      {"psi0-closed-form", "Ψ_0 equals the fiber push-forward of the first correction term"},
      {"trace-preservation", "tr T(Φ) = tr Φ"},
      {"fixed-space", "T fixes S^d(End V), and its fixed space is exactly that image"},
      {"expansion-a1", "β̃_k = k I + A_1 + O(1/k) with A_1 given in closed form"},
      {"line-bundle-anchor", "for O(k) with Fubini–Study data β̃_k = k + 1 exactly"},
      {"phi-shift", "perturbing by Φ shifts A_1 by Φ - T(Φ)"},
      {"fiber-balanced", "every Sym^d h is balanced for the hatted pairing, and the iteration finds one"},
      {"almost-balanced", "the rescaled Gram is D·I + M with tr M = 0 and |M| = O(k^{-q-2})"},
  };
  return a;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ReportWriter::ReportWriter(std::filesystem::path out) : out_(std::move(out)) { std::filesystem::create_directories(out_); }

void ReportWriter::append(const ReportRecord& rec) {
  std::lock_guard lock(mu_);
  {
    std::ofstream f(out_ / "report.ndjson", std::ios::app);
    f << rec.to_json().dump() << '\n';
  }
  std::ofstream t(out_ / "timings.ndjson", std::ios::app);
  t << json{{"experiment", rec.experiment}, {"config_hash", rec.config_hash}, {"timings", rec.timings}}.dump() << '\n';
}

void ReportWriter::write_csv(const std::string& file, const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
  std::lock_guard lock(mu_);
  csv_.push_back(file);
  std::ofstream f(out_ / file);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_double(row[i]);
    f << '\n';
  }
}

std::vector<std::string> ReportWriter::csv_files() const {
  std::lock_guard lock(mu_);
  return csv_;
}

std::vector<ReportRecord> read_report(const std::filesystem::path& file) {
  std::ifstream f(file);
  if (!f) throw std::runtime_error("cannot open " + file.string());
  std::vector<ReportRecord> out;
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) out.push_back(ReportRecord::from_json(json::parse(line)));
  return out;
}

std::optional<std::filesystem::path> cache_dir_from_env() {
  const char* v = std::getenv("PROJBAL_CACHE_DIR");
  if (!v || !*v) return std::nullopt;
  return std::filesystem::path(v);
}

namespace {

std::filesystem::path cache_file(const std::filesystem::path& dir, const std::string& experiment, const std::string& hash) {
  return dir / (experiment + "-" + hash + ".json");
}

std::filesystem::path cache_files_dir(const std::filesystem::path& dir, const std::string& experiment, const std::string& hash) {
  return dir / (experiment + "-" + hash + ".files");
}

}  // namespace

std::optional<ReportRecord> cache_lookup(const std::filesystem::path& dir, const std::string& experiment,
                                         const std::string& hash, const std::filesystem::path& restore_to) {
  namespace fs = std::filesystem;
  std::ifstream f(cache_file(dir, experiment, hash));
  if (!f) return std::nullopt;
  ReportRecord rec;
  try {
    json j = json::parse(f);
    if (j.at("code_version") != kCodeTag || j.at("config_hash") != hash) return std::nullopt;
    rec = ReportRecord::from_json(j);
  } catch (const json::exception&) {
    return std::nullopt;  // unreadable entries are recomputed
  }
  const auto files = cache_files_dir(dir, experiment, hash);
  if (fs::exists(files)) {
    fs::create_directories(restore_to);
    for (const auto& e : fs::directory_iterator(files))
      fs::copy_file(e.path(), restore_to / e.path().filename(), fs::copy_options::overwrite_existing);
  }
  return rec;
}

void cache_store(const std::filesystem::path& dir, const ReportRecord& rec, const std::filesystem::path& csv_dir,
                 const std::vector<std::string>& csv_files) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto files = cache_files_dir(dir, rec.experiment, rec.config_hash);
  fs::remove_all(files);
  if (!csv_files.empty()) fs::create_directories(files);
  for (const auto& name : csv_files) fs::copy_file(csv_dir / name, files / name, fs::copy_options::overwrite_existing);
  const auto path = cache_file(dir, rec.experiment, rec.config_hash);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp);
    f << rec.to_json().dump();
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace projbal::cli
