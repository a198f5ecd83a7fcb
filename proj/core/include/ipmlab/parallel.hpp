#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ipmlab {

/// Number of workers to use when the caller asks for 0 ("all cores").
inline unsigned resolve_jobs(unsigned jobs) noexcept {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Calls body(i) for i in [0, count) on up to `jobs` threads, in contiguous
/// chunks. Callers write results into slot i, so the outcome does not depend
/// on scheduling. The first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(resolve_jobs(jobs), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ipmlab
