#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvlm/types.hpp"

namespace mvlm {

/// Row-major 8-bit RGB raster.
struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // height * width * 3, RGB

  Image8() = default;
  Image8(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {
    if (w <= 0 || h <= 0) throw ConfigError("image dimensions must be positive");
  }

  std::uint8_t* at(int x, int y) {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

/// Binary PPM (P6), the lossless interchange raster for skeleton maps.
void write_ppm(const std::filesystem::path& path, const Image8& image);
Image8 read_ppm(const std::filesystem::path& path);

}  // namespace mvlm
