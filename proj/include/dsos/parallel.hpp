#pragma once

#include <cstddef>
#include <functional>

namespace dsos {

// Worker threads to use: DSOS_THREADS if set, else hardware concurrency.
std::size_t thread_count();

// Runs f(i) for i in [0, n). Work items must be independent; each item should
// write only to its own output slot so results are scheduling-invariant.
// Nested calls degrade to serial execution.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

} // namespace dsos
