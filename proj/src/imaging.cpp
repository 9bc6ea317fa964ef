#include "specorb/imaging.hpp"

#include <algorithm>
#include <cstdio>

namespace specorb {

namespace {

void check_size(std::size_t n, int width, int height) {
  if (width <= 0 || height <= 0 || n != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw ConfigError("image buffer does not match its dimensions");
}

}  // namespace

void write_ppm(std::ostream& out, int width, int height, const std::vector<double>& intensity,
               double full_well) {
  if (full_well <= 0.0) throw ConfigError("full-well intensity must be positive");
  check_size(intensity.size(), width, height);
  out << "P6\n" << width << " " << height << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * 3);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const double x = std::clamp(intensity[static_cast<std::size_t>(i * width + j)] / full_well, 0.0, 1.0);
      const auto v = static_cast<unsigned char>(std::lround(255.0 * std::pow(x, 1.0 / 2.2)));
      row[static_cast<std::size_t>(3 * j)] = row[static_cast<std::size_t>(3 * j + 1)] =
          row[static_cast<std::size_t>(3 * j + 2)] = v;
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

void write_mask_ppm(std::ostream& out, int width, int height, const std::vector<std::uint8_t>& mask) {
  check_size(mask.size(), width, height);
  out << "P6\n" << width << " " << height << "\n255\n";
  for (std::size_t p = 0; p < static_cast<std::size_t>(width) * static_cast<std::size_t>(height); ++p) {
    const char v = mask[p] ? static_cast<char>(255) : 0;
    const char px[3] = {v, v, v};
    out.write(px, 3);
  }
}

void write_intensity_csv(std::ostream& out, int width, int height, const std::vector<double>& intensity) {
  check_size(intensity.size(), width, height);
  char buf[32];
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      std::snprintf(buf, sizeof buf, "%.12g", intensity[static_cast<std::size_t>(i * width + j)]);
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace specorb
