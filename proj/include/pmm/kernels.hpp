#pragma once

// Data-parallel loops behind rendering, Monte-Carlo and multistart search.
// Each kernel comes as a serial reference and an OpenMP version; both evaluate
// the same pure per-item function and write results by index, so outputs are
// bit-identical regardless of thread count.

#include <cstdint>
#include <span>

#include "pmm/analysis.hpp"
#include "pmm/render.hpp"

namespace pmm::kernels {

namespace serial {

void render_intensity(const FieldChannels& channels, const BeamGrid& grid,
                      std::span<double> out);
void monte_carlo(const MonteCarloProblem& p, std::span<double> out);
void multistart(const CompensationProblem& p, std::uint64_t seed, std::span<RestartResult> out);

}  // namespace serial

namespace omp {

void render_intensity(const FieldChannels& channels, const BeamGrid& grid,
                      std::span<double> out);
void monte_carlo(const MonteCarloProblem& p, std::span<double> out);
void multistart(const CompensationProblem& p, std::uint64_t seed, std::span<RestartResult> out);

}  // namespace omp

/// Worker threads the OpenMP kernels will use (1 when built without OpenMP).
int max_threads();

}  // namespace pmm::kernels
