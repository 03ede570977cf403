#include "pmm/kernels.hpp"

namespace pmm::kernels::serial {

void render_intensity(const FieldChannels& channels, const BeamGrid& grid,
                      std::span<double> out) {
  for (int row = 0; row < grid.side; ++row)
    for (int col = 0; col < grid.side; ++col)
      out[static_cast<std::size_t>(row) * grid.side + col] =
          pixel_intensity(channels, grid, row, col);
}

void monte_carlo(const MonteCarloProblem& p, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mc_sample_fidelity(p, i);
}

void multistart(const CompensationProblem& p, std::uint64_t seed, std::span<RestartResult> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = compensation_restart(p, seed, i);
}

}  // namespace pmm::kernels::serial
