#include "llb/parallel.hpp"

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace llb::par {
namespace {

int clamp_threads(int n) {
  if (n < 1) return 1;
  if (n > 64) return 64;
  return n;
}

int initial_threads() {
  if (const char* env = std::getenv("LLB_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return clamp_threads(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return clamp_threads(hw == 0 ? 1 : static_cast<int>(hw > 8 ? 8 : hw));
}

struct Limiter {
  int n;
  std::unique_ptr<tbb::global_control> control;
  Limiter() : n(initial_threads()) { apply(); }
  void apply() {
    control = std::make_unique<tbb::global_control>(
        tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(n));
  }
};

Limiter& limiter() {
  static Limiter l;
  return l;
}

std::mutex limiter_mu;

}  // namespace

int threads() {
  std::lock_guard<std::mutex> lock(limiter_mu);
  return limiter().n;
}

void set_threads(int n) {
  std::lock_guard<std::mutex> lock(limiter_mu);
  n = clamp_threads(n);
  if (n == limiter().n) return;
  limiter().control.reset();
  limiter().n = n;
  limiter().apply();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 2048),
                    [&](const tbb::blocked_range<std::size_t>& r) { body(r.begin(), r.end()); });
}

namespace {

// Pairwise tree over the block partials.  Shape depends only on the partial
// count, never on scheduling, so sums are bitwise reproducible.
double tree_combine(std::vector<double>& v, bool take_max) {
  std::size_t n = v.size();
  while (n > 1) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i + half < n; ++i)
      v[i] = take_max ? std::max(v[i], v[i + half]) : v[i] + v[i + half];
    n = half;
  }
  return v.empty() ? 0.0 : v[0];
}

double blocked_reduce(std::size_t n,
                      const std::function<double(std::size_t, std::size_t)>& block_fn,
                      bool take_max) {
  if (n == 0) return 0.0;
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partials(nblocks);
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, nblocks, 1),
                    [&](const tbb::blocked_range<std::size_t>& r) {
                      for (std::size_t b = r.begin(); b != r.end(); ++b) {
                        const std::size_t begin = b * kReduceBlock;
                        partials[b] = block_fn(begin, std::min(n, begin + kReduceBlock));
                      }
                    });
  return tree_combine(partials, take_max);
}

}  // namespace

double reduce_add(std::size_t n, const std::function<double(std::size_t, std::size_t)>& block_sum) {
  return blocked_reduce(n, block_sum, false);
}

double reduce_max(std::size_t n, const std::function<double(std::size_t, std::size_t)>& block_max) {
  return blocked_reduce(n, block_max, true);
}

}  // namespace llb::par
