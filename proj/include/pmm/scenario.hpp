#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pmm/analysis.hpp"
#include "pmm/circuits.hpp"
#include "pmm/graymap.hpp"
#include "pmm/render.hpp"

namespace pmm {

/// Scenario text error with 1-based position.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

enum class Output { ports_csv, image, fidelity, gate_check, sweep, montecarlo, compensation };

std::string to_string(Output o);

enum class ImageSource { input, output, baseline, port1, port2 };

struct ImageRequest {
  std::string name;
  ImageSource source = ImageSource::output;
};

struct ImageSettings {
  std::vector<ImageRequest> requests;
  BeamGrid grid;
  GraymapFormat format = GraymapFormat::p5;
};

struct SweepSettings {
  std::vector<int> modes;
  std::vector<double> deltas;  // radians
};

struct GateSettings {
  std::vector<int> moduli;      // N
  std::vector<int> dimensions;  // D
};

struct MonteCarloSettings {
  ErrorModel model;
  std::size_t samples = 1000;
  std::vector<int> modes;
};

struct CompensationSettings {
  std::vector<int> dimensions;
  std::optional<double> alpha;  // circuit alpha when absent
  int restarts = 50;
};

struct Scenario {
  std::string name;
  CircuitSpec circuit;
  std::vector<StateEntry> input;          // coherent input state
  std::vector<int> mode_scan;             // independent runs, one per mode
  Eigen::Vector2cd scan_polarization{1.0, 1.0};
  double detection_theta = 0.0;
  bool cascade_pmm2 = false;
  std::set<Output> outputs;
  std::uint64_t seed = 0;
  int l_max = kDefaultLmax;

  ImageSettings images;
  std::optional<SweepSettings> sweep;
  std::optional<GateSettings> gate;
  std::optional<MonteCarloSettings> montecarlo;
  std::optional<CompensationSettings> compensation;
};

/// Angle literal: `pi/4`, `-3pi/8`, `3*pi/16`, `0.6deg`, or plain radians.
double parse_angle(std::string_view text);

/// Integer list with ranges: `1..5, 8`.
std::vector<int> parse_int_list(std::string_view text);
/// Angle list: `pi/8, 0.3` or `0deg..2deg step 0.2deg`.
std::vector<double> parse_angle_list(std::string_view text);

/// Ket expression such as `(H+V)(|1>+|-1>)` or `H|2> - i V|-2>`.
std::vector<StateEntry> parse_state_expression(std::string_view text);

/// Parses scenario text. Every diagnostic carries line and column.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace pmm
