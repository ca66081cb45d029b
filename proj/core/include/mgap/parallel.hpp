#pragma once

#include <functional>

namespace mgap {

// Index-parallel map: fn(i) for i in [0, n). Results must be written to
// index-addressed slots so the reduction stays order-independent.
// threads == 0 picks hardware concurrency; 1 runs inline.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace mgap
