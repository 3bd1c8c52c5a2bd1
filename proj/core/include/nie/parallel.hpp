#pragma once

#include <cstddef>
#include <functional>

namespace nie {

/// Caps worker parallelism for every module. 0 means hardware concurrency.
/// Results never depend on this value.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Splits [0, count) into contiguous chunks and runs body(begin, end) on up
/// to thread_count() threads. The first exception thrown by any chunk is
/// rethrown after all workers join.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace nie
