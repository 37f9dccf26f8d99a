#pragma once

#include <functional>

namespace cmf {

/// Cap on worker threads for data-parallel loops. 1 gives bit-reproducible runs;
/// per-node results never depend on the thread count.
void set_threads(int n);
int threads();

/// Calls fn(i) for i in [0, n), distributing indices over the worker pool.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace cmf
