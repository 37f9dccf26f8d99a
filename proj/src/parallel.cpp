#include "cmf/parallel.hpp"

#include <algorithm>

#include <omp.h>

namespace cmf {

namespace {
int g_threads = 1;
}

void set_threads(int n) {
    g_threads = std::max(1, n);
    omp_set_num_threads(g_threads);
}

int threads() { return g_threads; }

void parallel_for(int n, const std::function<void(int)>& fn) {
    if (g_threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
#pragma omp parallel for schedule(dynamic, 4) num_threads(g_threads)
    for (int i = 0; i < n; ++i) fn(i);
}

} // namespace cmf
