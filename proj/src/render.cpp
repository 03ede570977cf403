#include "pmm/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "pmm/kernels.hpp"

namespace pmm {

using std::numbers::pi;

namespace {

constexpr int kRingSamples = 1440;
constexpr int kMaxHarmonic = 64;
constexpr double kMinHarmonicContrast = 1e-3;

// Radial peak of (r sqrt2 / w)^|l| e^{-r^2/w^2} is at r^2 = |l| w^2 / 2.
double lg_peak(int l) {
  const int m = std::abs(l);
  if (m == 0) return 1.0;
  return std::pow(static_cast<double>(m), m / 2.0) * std::exp(-m / 2.0);
}

// Multiplies every amplitude by the conjugate phase of the first nonzero one,
// making the rendered intensity independent of a global phase.
FieldChannels canonical_phase(FieldChannels channels) {
  for (const auto& ch : channels) {
    for (const auto& t : ch) {
      if (t.amplitude != cplx(0.0)) {
        const cplx u = std::conj(t.amplitude) / std::abs(t.amplitude);
        for (auto& c : channels)
          for (auto& term : c) term.amplitude *= u;
        return channels;
      }
    }
  }
  throw std::invalid_argument("intensity_image: all amplitudes are zero");
}

double bilinear(const IntensityImage& img, double u, double v) {
  const int c0 = static_cast<int>(std::floor(u));
  const int r0 = static_cast<int>(std::floor(v));
  if (c0 < 0 || r0 < 0 || c0 + 1 >= img.side || r0 + 1 >= img.side) return 0.0;
  const double fu = u - c0;
  const double fv = v - r0;
  return (1 - fu) * (1 - fv) * img.at(r0, c0) + fu * (1 - fv) * img.at(r0, c0 + 1) +
         (1 - fu) * fv * img.at(r0 + 1, c0) + fu * fv * img.at(r0 + 1, c0 + 1);
}

}  // namespace

void BeamGrid::validate() const {
  if (side < 16) throw std::invalid_argument("beam grid side must be >= 16");
  if (!(extent > 0.0)) throw std::invalid_argument("beam grid extent must be > 0");
  if (!(waist > 0.0)) throw std::invalid_argument("beam waist must be > 0");
}

cplx lg_amplitude(int l, double x, double y, double waist) {
  const double r2 = (x * x + y * y) / (waist * waist);
  const int m = std::abs(l);
  const double radial = std::pow(2.0 * r2, m / 2.0) * std::exp(-r2) / lg_peak(l);
  if (l == 0) return radial;
  return std::polar(radial, l * std::atan2(y, x));
}

double pixel_intensity(const FieldChannels& channels, const BeamGrid& grid, int row, int col) {
  const double x = grid.x(col);
  const double y = grid.y(row);
  double total = 0.0;
  for (const auto& ch : channels) {
    cplx field = 0.0;
    for (const auto& t : ch) field += t.amplitude * lg_amplitude(t.l, x, y, grid.waist);
    total += std::norm(field);
  }
  return total;
}

std::vector<cplx> lg_field(int l, const BeamGrid& grid) {
  grid.validate();
  std::vector<cplx> f(static_cast<std::size_t>(grid.side) * grid.side);
  for (int row = 0; row < grid.side; ++row)
    for (int col = 0; col < grid.side; ++col)
      f[static_cast<std::size_t>(row) * grid.side + col] =
          lg_amplitude(l, grid.x(col), grid.y(row), grid.waist);
  return f;
}

IntensityImage intensity_image(const FieldChannels& channels, const BeamGrid& grid) {
  grid.validate();
  const FieldChannels canon = canonical_phase(channels);
  IntensityImage img;
  img.side = grid.side;
  img.pixels.assign(static_cast<std::size_t>(grid.side) * grid.side, 0.0);
  kernels::omp::render_intensity(canon, grid, img.pixels);
  const double peak = *std::max_element(img.pixels.begin(), img.pixels.end());
  if (peak <= 0.0) throw std::invalid_argument("intensity_image: field vanishes on the grid");
  for (double& p : img.pixels) p /= peak;
  img.max_value = 1.0;
  return img;
}

IntensityImage intensity_image(const std::map<int, cplx>& oam_amplitudes, const BeamGrid& grid) {
  std::vector<ModeTerm> ch;
  for (const auto& [l, c] : oam_amplitudes) ch.push_back({l, c});
  return intensity_image(FieldChannels{ch}, grid);
}

IntensityImage intensity_image(const HybridState& state, const BeamGrid& grid) {
  FieldChannels chs;
  for (auto p : {Polarization::H, Polarization::V}) {
    std::vector<ModeTerm> ch;
    for (int l = -state.l_max(); l <= state.l_max(); ++l) {
      const cplx c = state.amplitude(p, l);
      if (c != cplx(0.0)) ch.push_back({l, c});
    }
    chs.push_back(std::move(ch));
  }
  return intensity_image(chs, grid);
}

PetalAnalysis petal_analysis(const IntensityImage& img, int l_hint) {
  if (img.side < 16) throw std::invalid_argument("petal_analysis: image too small");
  const double center = img.side / 2.0 - 0.5;

  // Radial profile in half-pixel bins; the ring is the brightest bin.
  const int nbins = img.side;
  std::vector<double> sum(nbins, 0.0);
  std::vector<int> count(nbins, 0);
  for (int r = 0; r < img.side; ++r) {
    for (int c = 0; c < img.side; ++c) {
      const double rad = std::hypot(c - center, r - center);
      const int b = static_cast<int>(rad * 2.0);
      if (b < nbins) {
        sum[b] += img.at(r, c);
        ++count[b];
      }
    }
  }
  int best = 0;
  double best_mean = -1.0;
  for (int b = 0; b < nbins; ++b) {
    if (count[b] == 0) continue;
    const double m = sum[b] / count[b];
    if (m > best_mean) {
      best_mean = m;
      best = b;
    }
  }
  const double ring = (best + 0.5) / 2.0;

  std::vector<double> profile(kRingSamples);
  for (int k = 0; k < kRingSamples; ++k) {
    const double phi = 2.0 * pi * k / kRingSamples;
    profile[k] = bilinear(img, center + ring * std::cos(phi), center - ring * std::sin(phi));
  }

  double dc = 0.0;
  for (double v : profile) dc += v;
  dc /= kRingSamples;

  std::vector<cplx> harmonics(kMaxHarmonic + 1);
  for (int h = 1; h <= kMaxHarmonic; ++h) {
    cplx acc = 0.0;
    for (int k = 0; k < kRingSamples; ++k)
      acc += profile[k] * std::polar(1.0, -2.0 * pi * h * k / kRingSamples);
    harmonics[h] = acc / static_cast<double>(kRingSamples);
  }
  int dominant = 1;
  for (int h = 2; h <= kMaxHarmonic; ++h)
    if (std::abs(harmonics[h]) > std::abs(harmonics[dominant])) dominant = h;
  if (!(dc > 0.0) || std::abs(harmonics[dominant]) < kMinHarmonicContrast * dc) {
    throw std::domain_error("petal_analysis: no dominant angular harmonic");
  }

  const int h = l_hint != 0 ? 2 * std::abs(l_hint) : dominant;
  if (h > kMaxHarmonic) throw std::invalid_argument("petal_analysis: hint beyond harmonic range");
  // I(phi) ~ cos(h phi - theta) puts the harmonic at e^{-i theta}; a lobe sits at theta / h.
  const double period = 2.0 * pi / h;
  double orientation = std::fmod(-std::arg(harmonics[h]) / h, period);
  if (orientation < 0.0) orientation += period;
  if (period - orientation < 1e-12) orientation = 0.0;

  PetalAnalysis out;
  out.petal_count = dominant;
  out.orientation = orientation;
  out.ring_radius = ring;
  out.angular_pixel = 1.0 / ring;
  return out;
}

double angular_uniformity(const IntensityImage& img) {
  // With a centered grid the doubled pixel offsets are odd integers, so the
  // squared distance key is exact.
  struct Group {
    double sum = 0.0;
    int n = 0;
  };
  std::unordered_map<long long, Group> groups;
  const int s = img.side;
  for (int r = 0; r < s; ++r) {
    for (int c = 0; c < s; ++c) {
      const long long dx = 2LL * c + 1 - s;
      const long long dy = 2LL * r + 1 - s;
      auto& g = groups[dx * dx + dy * dy];
      const double v = img.at(r, c);
      g.sum += v;
      ++g.n;
    }
  }
  const Group* best = nullptr;
  long long key = 0;
  for (const auto& [k, g] : groups) {
    if (g.n < 8) continue;
    if (!best || g.sum / g.n > best->sum / best->n) {
      best = &g;
      key = k;
    }
  }
  if (!best) throw std::domain_error("angular_uniformity: no ring found");
  const double mean = best->sum / best->n;
  double var = 0.0;
  for (int r = 0; r < s; ++r) {
    for (int c = 0; c < s; ++c) {
      const long long dx = 2LL * c + 1 - s;
      const long long dy = 2LL * r + 1 - s;
      if (dx * dx + dy * dy != key) continue;
      const double d = img.at(r, c) - mean;
      var += d * d;
    }
  }
  var /= best->n;
  return var / (mean * mean);
}

}  // namespace pmm
