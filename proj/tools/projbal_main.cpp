#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "experiment/config.hpp"
#include "experiment/report.hpp"
#include "experiment/suites.hpp"
#include "projbal/errors.hpp"

using namespace projbal;
using namespace projbal::cli;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> cap;
  bool exact = false;
};

ExperimentConfig load(const Flags& f) {
  json j = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw SchemaError("cannot read config file " + f.config);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("config: top level must be an object");
  }
  // flags are folded in before validation so they are checked like any other field
  if (!f.out.empty()) j["out"] = f.out;
  if (f.seed) j["seed"] = *f.seed;
  if (f.cap) j["quadrature_cap"] = *f.cap;
  if (f.exact) j["exact"] = true;
  return parse_config(j);
}

void print_record(const ReportRecord& rec, bool cached) {
  std::printf("%s [%s]%s: %s\n", rec.experiment.c_str(), rec.config_hash.c_str(), cached ? " (cached)" : "",
              rec.all_pass() ? "PASS" : "FAIL");
  for (const auto& a : rec.assertions)
    std::printf("  %s  %-20s %s  (%s vs %s)%s%s\n", a.pass ? "ok  " : "FAIL", a.anchor.c_str(), a.name.c_str(),
                format_double(a.measured).c_str(), format_double(a.tolerance).c_str(), a.note.empty() ? "" : "  ",
                a.note.c_str());
  for (const auto& w : rec.warnings) std::printf("  warning: %s\n", w.c_str());
}

int run_suite(const std::string& name, const Flags& flags) {
  static const std::map<std::string, ReportRecord (*)(const SuiteContext&)> suites{
      {"verify", run_verify}, {"expansion", run_expansion}, {"balance", run_balance}, {"almost-balanced", run_almost_balanced}};
  SuiteContext ctx;
  ctx.cfg = load(flags);
  ctx.hash = config_hash(ctx.cfg);
  ReportWriter writer(ctx.cfg.out);
  ctx.writer = &writer;
  const auto cache = cache_dir_from_env();
  if (cache) {
    if (auto hit = cache_lookup(*cache, name, ctx.hash, writer.dir())) {
      hit->timings = {{"cached", true}};
      writer.append(*hit);
      print_record(*hit, true);
      return hit->all_pass() ? 0 : 1;
    }
  }
  ReportRecord rec = suites.at(name)(ctx);
  writer.append(rec);
  if (cache) cache_store(*cache, rec, writer.dir(), writer.csv_files());
  print_record(rec, false);
  return rec.all_pass() ? 0 : 1;
}

int run_report(const Flags& flags) {
  const std::string out = flags.out.empty() ? ExperimentConfig{}.out : flags.out;
  const auto recs = read_report(std::filesystem::path(out) / "report.ndjson");
  bool ok = true;
  for (const auto& r : recs) {
    print_record(r, false);
    ok = ok && r.all_pass();
  }
  std::printf("%zu records, %s\n", recs.size(), ok ? "all assertions pass" : "some assertions fail");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"projbal: symmetric-power Bergman kernels, fiber balancing and the verification suites"};
  Flags flags;
  bool list_anchors = false;
  app.add_option("--config", flags.config, "JSON experiment config");
  app.add_option("--out", flags.out, "output directory for report.ndjson, timings.ndjson and CSV files");
  app.add_option("--seed", flags.seed, "random seed");
  app.add_option("--quadrature-cap", flags.cap, "Gauss–Legendre node-doubling cap for Gram integrals");
  app.add_flag("--exact", flags.exact, "use rational arithmetic where available");
  app.add_flag("--list-anchors", list_anchors, "print every result anchor the suites check");
  app.fallthrough();  // inherited by the subcommands, so global flags may follow them
  std::vector<std::string> names{"verify", "expansion", "balance", "almost-balanced", "report"};
  for (const auto& n : names) app.add_subcommand(n, n == "report" ? "summarise an existing report" : "run the " + n + " suite");
  app.require_subcommand(0, 1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list_anchors) {
    for (const auto& [key, text] : known_anchors()) std::printf("%-22s %s\n", key.c_str(), text.c_str());
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return cmd == "report" ? run_report(flags) : run_suite(cmd, flags);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
  } catch (const ThresholdError& e) {
    std::cerr << "threshold error: " << e.what() << " (minimal k " << e.minimal_k() << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 2;
}
