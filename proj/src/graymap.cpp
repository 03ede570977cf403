#include "pmm/graymap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pmm {

namespace {

int quantize(double v, double max_value) {
  const double x = max_value > 0.0 ? v / max_value : 0.0;
  const long q = std::lround(std::clamp(x, 0.0, 1.0) * kGraymapMax);
  return static_cast<int>(q);
}

// Header tokens are whitespace separated; '#' starts a comment to end of line.
std::string next_token(const std::string& s, std::size_t& pos) {
  while (pos < s.size()) {
    if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (start == pos) throw std::runtime_error("graymap: truncated header");
  return s.substr(start, pos - start);
}

}  // namespace

std::string encode_graymap(const IntensityImage& img, GraymapFormat format) {
  const std::size_t n = static_cast<std::size_t>(img.side) * img.side;
  if (img.pixels.size() != n) throw std::invalid_argument("graymap: pixel count mismatch");
  std::string out = (format == GraymapFormat::p2 ? "P2\n" : "P5\n") +
                    std::to_string(img.side) + " " + std::to_string(img.side) + "\n" +
                    std::to_string(kGraymapMax) + "\n";
  if (format == GraymapFormat::p5) {
    out.reserve(out.size() + 2 * n);
    for (double v : img.pixels) {
      const int q = quantize(v, img.max_value);
      out.push_back(static_cast<char>((q >> 8) & 0xff));
      out.push_back(static_cast<char>(q & 0xff));
    }
  } else {
    for (int r = 0; r < img.side; ++r) {
      for (int c = 0; c < img.side; ++c) {
        if (c) out.push_back(' ');
        out += std::to_string(quantize(img.at(r, c), img.max_value));
      }
      out.push_back('\n');
    }
  }
  return out;
}

void write_graymap(const IntensityImage& img, const std::filesystem::path& path,
                   GraymapFormat format) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::string bytes = encode_graymap(img, format);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

IntensityImage decode_graymap(const std::string& s) {
  std::size_t pos = 0;
  const std::string magic = next_token(s, pos);
  if (magic != "P2" && magic != "P5") throw std::runtime_error("graymap: bad magic " + magic);
  const int w = std::stoi(next_token(s, pos));
  const int h = std::stoi(next_token(s, pos));
  const int maxval = std::stoi(next_token(s, pos));
  if (w != h || w <= 0) throw std::runtime_error("graymap: only square images are supported");
  if (maxval <= 0 || maxval > 65535) throw std::runtime_error("graymap: bad maxval");

  IntensityImage img;
  img.side = w;
  img.max_value = 1.0;
  img.pixels.resize(static_cast<std::size_t>(w) * h);
  if (magic == "P2") {
    for (auto& p : img.pixels) p = std::stoi(next_token(s, pos)) / static_cast<double>(maxval);
  } else {
    ++pos;  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    if (s.size() < pos + img.pixels.size() * bytes) throw std::runtime_error("graymap: truncated data");
    for (auto& p : img.pixels) {
      int v = static_cast<unsigned char>(s[pos++]);
      if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(s[pos++]);
      p = v / static_cast<double>(maxval);
    }
  }
  return img;
}

IntensityImage read_graymap(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_graymap(ss.str());
}

}  // namespace pmm
