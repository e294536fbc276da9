#pragma once

#include <cstddef>
#include <functional>

namespace sngca {

/*
 * Worker cap: NGCA_THREADS when set (minimum 1), otherwise the hardware
 * concurrency.  Read once per process.
 */
int max_threads();

/*
 * Run fn(i) for i in [0, n) on up to max_threads() workers with a static
 * block split.  Nested calls from inside a worker run serially, and any
 * exception is rethrown in the caller.  fn must write only to its own slots.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace sngca
