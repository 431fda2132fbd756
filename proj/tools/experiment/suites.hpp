#pragma once

#include <functional>

#include "config.hpp"
#include "report.hpp"
#include "projbal/sphere.hpp"

namespace projbal::cli {

struct SuiteContext {
  ExperimentConfig cfg;
  std::string hash;
  ReportWriter* writer = nullptr;  // CSV side-files; may be null
};

SplitBundleModel bundle_of(const ExperimentConfig& c);
BaseKahler base_of(const ExperimentConfig& c);

/// Runs fn(0..n-1) from a shared work queue on up to hardware_concurrency threads.
/// The first exception thrown by any job is rethrown after all workers stop.
void parallel_for(int n, const std::function<void(int)>& fn);

ReportRecord run_verify(const SuiteContext& ctx);
ReportRecord run_expansion(const SuiteContext& ctx);
ReportRecord run_balance(const SuiteContext& ctx);
ReportRecord run_almost_balanced(const SuiteContext& ctx);

}  // namespace projbal::cli
