#include "suites.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace projbal::cli {

SplitBundleModel bundle_of(const ExperimentConfig& c) {
  SplitBundleModel E;
  for (int i = 0; i < c.r; ++i) {
    LineBundleMetricModel m;
    m.degree = c.degrees[static_cast<std::size_t>(i)];
    if (!c.summand_weights.empty()) m.weight = Poly{c.summand_weights[static_cast<std::size_t>(i)]};
    E.summands.push_back(m);
  }
  E.validate();
  return E;
}

BaseKahler base_of(const ExperimentConfig& c) {
  BaseKahler b{Poly{c.base_weight}};
  b.validate();
  return b;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min<int>(n, static_cast<int>(std::thread::hardware_concurrency())));
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto loop = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
        next = n;  // drain the queue
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace projbal::cli
