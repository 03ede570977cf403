#pragma once

#include <map>
#include <vector>

#include "pmm/state.hpp"

namespace pmm {

/// Square sampling grid. Pixel (row, col) has its center at
/// x = (col + 1/2 - side/2) * step, y = (side/2 - row - 1/2) * step, with
/// step = 2 * extent * waist / side. Row 0 is the top (+y) edge.
struct BeamGrid {
  int side = 256;
  double extent = 3.0;  // half-width in units of the waist
  double waist = 1.0;

  void validate() const;
  double step() const { return 2.0 * extent * waist / side; }
  double x(int col) const { return (col + 0.5 - side / 2.0) * step(); }
  double y(int row) const { return (side / 2.0 - row - 0.5) * step(); }
};

struct ModeTerm {
  int l = 0;
  cplx amplitude;
};

/// Coherent sum of LG terms; channels add incoherently (one per polarization).
using FieldChannels = std::vector<std::vector<ModeTerm>>;

/// LG(p=0, l) with per-mode peak amplitude normalized to 1.
cplx lg_amplitude(int l, double x, double y, double waist);

/// Intensity of one pixel: sum over channels of |sum_l c_l LG_l|^2.
double pixel_intensity(const FieldChannels& channels, const BeamGrid& grid, int row, int col);

/// Row-major samples of lg_amplitude at pixel centers.
std::vector<cplx> lg_field(int l, const BeamGrid& grid);

struct IntensityImage {
  int side = 0;
  std::vector<double> pixels;  // row-major, >= 0
  double max_value = 1.0;

  double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * side + col]; }
};

IntensityImage intensity_image(const std::map<int, cplx>& oam_amplitudes, const BeamGrid& grid);
/// Polarizations are orthogonal, so their intensities add.
IntensityImage intensity_image(const HybridState& state, const BeamGrid& grid);
IntensityImage intensity_image(const FieldChannels& channels, const BeamGrid& grid);

struct PetalAnalysis {
  int petal_count = 0;
  double orientation = 0.0;   // radians, counterclockwise from +x
  double ring_radius = 0.0;   // pixels
  double angular_pixel = 0.0; // radians subtended by one pixel on the ring
};

/// Dominant angular harmonic on the ring of maximal radial intensity. With a
/// nonzero hint the orientation is read from harmonic 2|hint| and wrapped into
/// [0, pi/|hint|).
PetalAnalysis petal_analysis(const IntensityImage& image, int l_hint = 0);

/// Relative variance (variance / mean^2) of intensity over the brightest set of
/// pixels sharing one exact center distance.
double angular_uniformity(const IntensityImage& image);

}  // namespace pmm
