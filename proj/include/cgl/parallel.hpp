#pragma once

#include <cstddef>
#include <functional>

namespace cgl {

/// Worker cap from CONCRETE_GRAPH_THREADS (0 or unset = hardware auto).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) across up to `workers` threads in contiguous
/// chunks. Callers own any output slots; results must not depend on
/// scheduling. workers == 0 means auto.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace cgl
