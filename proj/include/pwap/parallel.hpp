#pragma once

#include <cstddef>
#include <functional>

namespace pwap {

// Worker count used by parallel_for. Defaults to PWAP_THREADS or 1.
int thread_count();
void set_thread_count(int n);

// Runs body(i) for i in [0, n) over contiguous chunks. Each index must be
// independent of the others; results are then identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pwap
