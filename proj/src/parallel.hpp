#pragma once

// Index-parallel loops whose results land in caller-owned slots, so the output never
// depends on thread scheduling. SCALE_EVOLVE_THREADS caps the worker count.

#include <cstddef>
#include <functional>

namespace scaleevo {

std::size_t worker_count();

// Calls body(i) for every i in [0, n). The first exception thrown by any body is rethrown
// after all workers have stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace scaleevo
