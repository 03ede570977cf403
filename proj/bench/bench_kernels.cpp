// Wall-clock comparison of the serial and OpenMP kernels on representative sizes.
// Also confirms both produce identical results.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <vector>

#include "pmm/kernels.hpp"

using namespace pmm;
using std::numbers::pi;

namespace {

template <typename F>
double seconds(F&& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-14s serial %9.4f s   omp %9.4f s   speedup %5.2fx   %s\n", name, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("OpenMP threads: %d\n", kernels::max_threads());

  {
    BeamGrid grid;
    grid.side = 512;
    const FieldChannels ch{{{3, 1.0}, {-3, 1.0}}, {{1, cplx(0.0, 1.0)}}};
    std::vector<double> a(grid.side * grid.side), b(a.size());
    const double ts = seconds([&] { kernels::serial::render_intensity(ch, grid, a); }, 3);
    const double tp = seconds([&] { kernels::omp::render_intensity(ch, grid, b); }, 3);
    report("render 512^2", ts, tp, std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }
  {
    MonteCarloProblem p;
    p.l = 5;
    p.model.distribution = ErrorDistribution::uniform;
    p.model.delta = 2.0 * pi / 180.0;
    p.model.per_element[ElementId::hwp1] = 0.5 * pi / 180.0;
    std::vector<double> a(20000), b(a.size());
    const double ts = seconds([&] { kernels::serial::monte_carlo(p, a); }, 1);
    const double tp = seconds([&] { kernels::omp::monte_carlo(p, b); }, 1);
    report("montecarlo 2e4", ts, tp, std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }
  {
    const double alpha = pi / 6.0;
    const auto prob = make_compensation_problem(
        bare_dp_sagnac(alpha, DPParams(1.0, 0.9, pi / 4.0, alpha)), {0, 1, 2}, alpha);
    std::vector<RestartResult> a(50), b(50);
    const double ts = seconds([&] { kernels::serial::multistart(prob, 0, a); }, 1);
    const double tp = seconds([&] { kernels::omp::multistart(prob, 0, b); }, 1);
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) same = same && a[i].residual == b[i].residual;
    report("multistart 50", ts, tp, same);
  }
  return 0;
}
