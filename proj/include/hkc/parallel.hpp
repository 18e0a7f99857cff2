#pragma once

#include <cstddef>
#include <functional>

namespace hkc {

// Worker cap for library loops. 0 means hardware concurrency.
void set_num_threads(std::size_t n);
std::size_t num_threads();

// Runs body(i) for i in [begin, end) across worker threads. Each index must
// only write state owned by that index, so results do not depend on scheduling.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace hkc
