#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace synthattr {

// Process-wide worker count. 0 means hardware concurrency.
int parallel_threads();
void set_parallel_threads(int n);

// Static contiguous partition of [begin, end) over the workers. Each index
// is owned by exactly one worker, so writes to disjoint outputs need no
// synchronization and results do not depend on scheduling order.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace synthattr
