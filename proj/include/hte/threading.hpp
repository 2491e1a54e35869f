#pragma once

#include <cstddef>
#include <functional>

namespace hte {

// Worker cap from HTE_THREADS (0 or unset = hardware concurrency).
std::size_t thread_budget();

// Runs body(0..count-1) on up to thread_budget() workers. Each index must
// write only to its own output slot; results are then schedule-independent.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hte
