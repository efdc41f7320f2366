#pragma once

#include <cstddef>
#include <functional>

namespace neutral {

/// Worker count: NI_THREADS if set and positive, otherwise hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads.
/// Each index must write only to its own output slots.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace neutral
