#pragma once

#include <vector>

namespace hdrfusion {

/// Runs `body(i)` for i in [begin, end) across OpenMP workers when available.
/// Iterations must not write shared state.
template <typename Body>
void parallel_for(int begin, int end, Body&& body) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (int i = begin; i < end; ++i) body(i);
}

/// Computes one partial result per index in parallel, then folds the partials
/// sequentially in index order. The fold order does not depend on the worker
/// count, so results are reproducible across runs and machines.
template <typename Partial, typename Body, typename Fold>
Partial parallel_reduce(int begin, int end, Partial init, Body&& body, Fold&& fold) {
  std::vector<Partial> partials(static_cast<std::size_t>(end > begin ? end - begin : 0), init);
  parallel_for(begin, end, [&](int i) { partials[static_cast<std::size_t>(i - begin)] = body(i); });
  Partial acc = init;
  for (const Partial& p : partials) acc = fold(acc, p);
  return acc;
}

}  // namespace hdrfusion
