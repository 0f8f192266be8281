#pragma once

#include <functional>

namespace metascreen {

// Worker count for parallel loops. 0 selects METASCREEN_THREADS, else the hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Runs f(0..n-1) over static contiguous chunks; results depend only on the index, never on scheduling.
// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace metascreen
