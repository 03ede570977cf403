#pragma once

#include <filesystem>
#include <string>

#include "pmm/render.hpp"

namespace pmm {

enum class GraymapFormat { p2, p5 };

inline constexpr int kGraymapMax = 65535;

/// Portable graymap with maxval 65535. P5 samples are 16-bit big-endian.
std::string encode_graymap(const IntensityImage& image, GraymapFormat format);
void write_graymap(const IntensityImage& image, const std::filesystem::path& path,
                   GraymapFormat format);

/// Reads P2/P5 back into an image scaled to [0, 1].
IntensityImage decode_graymap(const std::string& bytes);
IntensityImage read_graymap(const std::filesystem::path& path);

}  // namespace pmm
