#pragma once

#include <functional>

namespace dpg {

/// Worker count: hardware concurrency capped by the DPG_THREADS environment variable.
int worker_count();

/// Runs body(i) for i in [0, n) on worker threads. Each index is visited once;
/// callers write results into preallocated slots so the reduction order stays fixed.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace dpg
