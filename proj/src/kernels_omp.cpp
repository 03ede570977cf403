#include "pmm/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pmm::kernels {

namespace omp {

void render_intensity(const FieldChannels& channels, const BeamGrid& grid,
                      std::span<double> out) {
  const int side = grid.side;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < side; ++row)
    for (int col = 0; col < side; ++col)
      out[static_cast<std::size_t>(row) * side + col] = pixel_intensity(channels, grid, row, col);
}

void monte_carlo(const MonteCarloProblem& p, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = mc_sample_fidelity(p, static_cast<std::size_t>(i));
}

void multistart(const CompensationProblem& p, std::uint64_t seed, std::span<RestartResult> out) {
  const auto n = static_cast<std::int64_t>(out.size());
  // Restarts differ a lot in iteration count.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i)
    out[i] = compensation_restart(p, seed, static_cast<std::size_t>(i));
}

}  // namespace omp

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace pmm::kernels
