#pragma once

#include <cstddef>
#include <functional>

namespace zeno {

// Worker count: ZENO_WORKERS if set to a positive integer, otherwise the
// hardware concurrency.
int default_workers();

// Calls body(i) for i in [0, count) on up to `workers` threads. Work is
// handed out by an atomic counter; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  int workers = 0);

}  // namespace zeno
