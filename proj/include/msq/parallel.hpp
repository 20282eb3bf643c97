#pragma once

#include <cstddef>
#include <functional>

namespace msq {

// Worker count used by every parallel loop in the library. Results never depend
// on it: loops write to disjoint slots and all reductions run serially in index
// order afterwards.
void set_thread_count(unsigned count);
unsigned thread_count();

// Runs body(i) for i in [0, count) over contiguous static chunks. The first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace msq
