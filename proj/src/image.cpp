#include "rppg/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rppg/error.hpp"

namespace fs = std::filesystem;

namespace rppg {

namespace {

std::string lower_ext(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Skips PPM whitespace and '#' comments, then parses one unsigned integer.
int ppm_read_int(std::istream& in, const std::string& path) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = -1;
  in >> v;
  if (!in || v < 0) throw FormatError("load_image: malformed PPM header in '" + path + "'");
  return v;
}

Image load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("load_image: cannot open '" + path + "'");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6')
    throw FormatError("load_image: '" + path + "' is not a binary PPM (P6)");
  const int w = ppm_read_int(in, path);
  const int h = ppm_read_int(in, path);
  const int maxval = ppm_read_int(in, path);
  if (w <= 0 || h <= 0 || maxval != 255)
    throw FormatError("load_image: unsupported PPM dimensions/maxval in '" + path + "'");
  in.get();  // single whitespace after maxval
  Image img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw FormatError("load_image: truncated PPM data in '" + path + "'");
  return img;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw FormatError("load_image: cannot open '" + path + "'");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError("load_image: libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("load_image: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("load_image: failed to decode '" + path + "'");
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  // Normalize every supported layout to 8-bit RGB.
  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  if (w <= 0 || h <= 0 || png_get_channels(png, info) != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("load_image: unsupported PNG layout in '" + path + "'");
  }

  Image img(w, h);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = img.at(0, y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace

Image load_image(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".ppm") return load_ppm(path);
  if (ext == ".png") return load_png(path);
  throw FormatError("load_image: unsupported extension '" + ext + "' for '" + path + "'");
}

void save_ppm(const Image& img, const std::string& path) {
  if (img.empty()) throw FormatError("save_ppm: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("save_ppm: cannot write '" + path + "'");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw FormatError("save_ppm: write failed for '" + path + "'");
}

void save_png(const Image& img, const std::string& path) {
  if (img.empty()) throw FormatError("save_png: empty image");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw FormatError("save_png: cannot write '" + path + "'");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError("save_png: libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("save_png: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("save_png: failed to encode '" + path + "'");
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.at(0, y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<std::string> list_frame_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw FormatError("list_frame_files: '" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower_ext(entry.path().string());
    if (ext == ".png" || ext == ".ppm") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace rppg
