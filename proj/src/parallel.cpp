#include "bundle_spectra/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace bundle_spectra {

namespace {

std::size_t read_worker_env() {
  const char* env = std::getenv("BUNDLE_SPECTRA_THREADS");
  long requested = 0;
  if (env != nullptr && *env != '\0') {
    char* end = nullptr;
    requested = std::strtol(env, &end, 10);
    if (end == env || requested < 0) requested = 0;
  }
  if (requested == 0) {
    std::size_t hw = std::thread::hardware_concurrency();
    return std::clamp<std::size_t>(hw, 1, 16);
  }
  return static_cast<std::size_t>(requested);
}

}  // namespace

std::size_t worker_count() {
  static const std::size_t count = read_worker_env();
  return count;
}

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t total = end > begin ? end - begin : 0;
  if (total == 0) return;

  // Small ranges are not worth the thread launch overhead.
  const std::size_t workers = std::min(worker_count(), (total + 4095) / 4096);
  if (workers <= 1) {
    body(begin, end);
    return;
  }

  const std::size_t chunk = (total + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    if (lo >= end) break;
    const std::size_t hi = std::min(end, lo + chunk);
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  body(begin, std::min(end, begin + chunk));
  for (auto& t : pool) t.join();
}

}  // namespace bundle_spectra
