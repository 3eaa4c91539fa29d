#pragma once

#include <cstddef>

namespace turnscan {

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// path used by tests; both policies must produce bit-identical results.
enum class Exec { serial, parallel };

/// Runs body(i) for i in [0, n). Iterations must only write to slots owned by
/// i so that results do not depend on the schedule. Loops shorter than
/// MinCount run on the calling thread; Chunk is the dynamic schedule grain.
template <long MinCount = 64, int Chunk = 32, typename Body>
void parallel_for(Exec exec, std::size_t n, Body&& body) {
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, Chunk) if (exec == Exec::parallel && count >= MinCount)
  for (long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace turnscan
