#pragma once

#include <cstddef>
#include <functional>

namespace viab {

/// Worker count used by parallel_for. Defaults to VIAB_THREADS when set,
/// otherwise 1. Results never depend on this value.
int thread_count();
void set_thread_count(int threads);

/// Runs body(i) for i in [0, count) on contiguous static chunks. Bodies must
/// write only to index-owned storage; reductions happen afterwards, in index
/// order, on the caller's side.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace viab
