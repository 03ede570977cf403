#include <cstring>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "pmm/kernels.hpp"

using namespace pmm;
using std::numbers::pi;

TEST_CASE("render kernels agree bit for bit") {
  BeamGrid grid;
  grid.side = 96;
  const FieldChannels ch{{{2, 1.0}, {-2, cplx(0.3, 0.4)}}, {{1, cplx(0.0, 0.5)}, {-3, 0.2}}};
  std::vector<double> a(grid.side * grid.side), b(a.size());
  kernels::serial::render_intensity(ch, grid, a);
  kernels::omp::render_intensity(ch, grid, b);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  for (int r : {0, 17, 95})
    for (int c : {0, 50, 95}) CHECK(a[r * grid.side + c] == pixel_intensity(ch, grid, r, c));
}

TEST_CASE("monte carlo kernels agree bit for bit") {
  MonteCarloProblem p;
  p.l = 4;
  p.seed = 3;
  p.model.distribution = ErrorDistribution::uniform;
  p.model.delta = 1.5 * pi / 180;
  p.model.per_element[ElementId::dp2] = 0.3 * pi / 180;
  p.model.per_element[ElementId::hwp4] = 0.2 * pi / 180;
  std::vector<double> a(2000), b(a.size());
  kernels::serial::monte_carlo(p, a);
  kernels::omp::monte_carlo(p, b);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  CHECK(a[123] == mc_sample_fidelity(p, 123));
}

TEST_CASE("multistart kernels agree bit for bit") {
  const double alpha = pi / 6;
  const auto prob = make_compensation_problem(
      bare_dp_sagnac(alpha, DPParams(1.0, 0.9, pi / 4, alpha), 4), {0, 1, 2}, alpha);
  std::vector<RestartResult> a(8), b(8);
  kernels::serial::multistart(prob, 11, a);
  kernels::omp::multistart(prob, 11, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].residual == b[i].residual);
    CHECK(a[i].angles == b[i].angles);
  }
}

TEST_CASE("thread count is positive") { CHECK(kernels::max_threads() >= 1); }
