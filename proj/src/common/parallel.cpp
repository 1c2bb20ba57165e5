#include "synthattr/common/parallel.hpp"

#include <atomic>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace synthattr {

namespace {
std::atomic<int> g_threads{0};

#ifdef __GLIBC__
// Large activation tensors are allocated and freed once per layer call.
// Keeping them on the heap instead of per-call mmap avoids re-faulting
// (and kernel-zeroing) hundreds of MB every training step.
struct MallocTuning {
  MallocTuning() {
    mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
  }
};
const MallocTuning g_malloc_tuning;
#endif
}

int parallel_threads() {
  int n = g_threads.load();
  if (n <= 0) {
    n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
  }
  return n;
}

void set_parallel_threads(int n) { g_threads.store(n); }

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& body) {
  const std::int64_t count = end - begin;
  if (count <= 0) return;
  const int workers = std::min<std::int64_t>(parallel_threads(), count);
  if (workers <= 1) {
    body(begin, end);
    return;
  }
  const std::int64_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = begin + w * chunk;
    const std::int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace synthattr
