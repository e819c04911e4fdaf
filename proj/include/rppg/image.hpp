#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rppg {

// 8-bit interleaved RGB image.
struct Image {
  int width{0};
  int height{0};
  std::vector<std::uint8_t> pixels;  // size = width * height * 3

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

// Rec. 601 luma; the same formula serves grayscale conversion and the Y of YCrCb.
inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

// Reads a binary PPM (P6, maxval 255) or an 8-bit PNG, chosen by extension.
Image load_image(const std::string& path);

void save_ppm(const Image& img, const std::string& path);
void save_png(const Image& img, const std::string& path);

// frame_000000.png / .ppm files in one directory, sorted by frame number.
std::vector<std::string> list_frame_files(const std::string& dir);

}  // namespace rppg
