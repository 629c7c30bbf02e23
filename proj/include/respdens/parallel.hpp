#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace respdens {

//! Runs task(rep) for rep in [0, reps) on `workers` threads. Results are
//! stored by replication index, so the output does not depend on the
//! worker count. The first exception thrown by any task is rethrown after
//! all threads have joined.
template<class R, class F>
std::vector<R> run_replications(std::size_t reps, std::size_t workers, F&& task)
{
  std::vector<R> out(reps);
  workers = std::max<std::size_t>(1, std::min(workers, reps));
  if (workers == 1) {
    for (std::size_t r = 0; r < reps; ++r)
      out[r] = task(r);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t r = next.fetch_add(1);
        if (r >= reps || failed.load())
          return;
        try {
          out[r] = task(r);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error)
            error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (auto& t : pool)
    t.join();
  if (error)
    std::rethrow_exception(error);
  return out;
}

//! RESPDENS_WORKERS if set and positive, else `fallback`.
inline std::size_t default_workers(std::size_t fallback = 1)
{
  if (const char* env = std::getenv("RESPDENS_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0)
        return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return fallback;
}

} // namespace respdens
