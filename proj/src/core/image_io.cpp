#include "core/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>

namespace mfusion {

namespace {

std::string lower_extension(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

// ---- PGM (P5) ----

int pgm_next_token(std::istream& in) {
  // Skips whitespace and '#' comments, then parses a decimal token.
  for (;;) {
    int c = in.get();
    require(c != EOF, Errc::format, "PGM: truncated header");
    if (std::isspace(c)) continue;
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
      continue;
    }
    require(std::isdigit(c), Errc::format, "PGM: malformed header");
    int value = c - '0';
    while (std::isdigit(in.peek())) value = value * 10 + (in.get() - '0');
    return value;
  }
}

Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::io, "cannot open " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  require(in.good() && magic[0] == 'P' && magic[1] == '5', Errc::format,
          "PGM: missing P5 magic in " + path);
  int width = pgm_next_token(in);
  int height = pgm_next_token(in);
  int maxval = pgm_next_token(in);
  require(width >= 1 && height >= 1, Errc::format, "PGM: bad dimensions in " + path);
  require(maxval > 0 && maxval <= 255, Errc::unsupported,
          "PGM: only 8-bit images are supported (" + path + ")");
  int sep = in.get();
  require(sep != EOF && std::isspace(sep), Errc::format, "PGM: missing header separator");

  std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  require(in.gcount() == static_cast<std::streamsize>(raw.size()), Errc::format,
          "PGM: truncated pixel data in " + path);

  Image img(height, width, 1);
  double* out = img.plane_data(0);
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / 255.0;
  return img;
}

std::vector<std::uint8_t> encode_pgm(const Image& img) {
  require(img.planes() == 1, Errc::unsupported, "PGM supports 1-plane images only");
  std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + img.pixel_count());
  const double* p = img.plane_data(0);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) bytes.push_back(quantize_u8(p[i]));
  return bytes;
}

// ---- PNG ----

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image load_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  require(file != nullptr, Errc::io, "cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, Errc::io, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(Errc::io, "libpng init failed");
  }

  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  int width = 0, height = 0, channels = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::format, "PNG: failed to decode " + path);
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const int out_type = png_get_color_type(png, info);
  channels = out_type == PNG_COLOR_TYPE_GRAY ? 1 : 3;
  if (out_type != PNG_COLOR_TYPE_GRAY && out_type != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::unsupported, "PNG: unsupported color type in " + path);
  }

  pixels.resize(static_cast<std::size_t>(width) * height * channels);
  rows.resize(height);
  for (int r = 0; r < height; ++r) {
    rows[r] = pixels.data() + static_cast<std::size_t>(r) * width * channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(height, width, channels);
  for (int p = 0; p < channels; ++p) {
    double* out = img.plane_data(p);
    for (std::size_t i = 0; i < static_cast<std::size_t>(width) * height; ++i) {
      out[i] = pixels[i * channels + p] / 255.0;
    }
  }
  return img;
}

void save_png(const Image& img, const std::string& path) {
  const int channels = img.planes();
  const std::size_t n = static_cast<std::size_t>(img.height()) * img.width();
  std::vector<std::uint8_t> interleaved(n * channels);
  for (int p = 0; p < channels; ++p) {
    const double* in = img.plane_data(p);
    for (std::size_t i = 0; i < n; ++i) interleaved[i * channels + p] = quantize_u8(in[i]);
  }

  const std::string tmp = path + ".tmp";
  {
    FilePtr file(std::fopen(tmp.c_str(), "wb"));
    require(file != nullptr, Errc::io, "cannot create " + tmp);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, Errc::io, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
      png_destroy_write_struct(&png, nullptr);
      fail(Errc::io, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      fail(Errc::io, "PNG: failed to encode " + path);
    }

    png_init_io(png, file.get());
    png_set_IHDR(png, info, img.width(), img.height(), 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(img.height());
    for (int r = 0; r < img.height(); ++r) {
      rows[r] = interleaved.data() + static_cast<std::size_t>(r) * img.width() * channels;
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }

  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(Errc::io, "cannot replace " + path);
  }
}

}  // namespace

std::uint8_t quantize_u8(double v) {
  double clipped = std::clamp(v, 0.0, 1.0);
  double scaled = std::floor(clipped * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), Errc::io, "cannot create " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    require(out.good(), Errc::io, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(Errc::io, "cannot replace " + path);
  }
}

Image load_image(const std::string& path) {
  const std::string ext = lower_extension(path);
  if (ext == "pgm") return load_pgm(path);
  if (ext == "png") return load_png(path);
  fail(Errc::unsupported, "unsupported image extension: " + path);
}

void save_image(const Image& img, const std::string& path) {
  require(!img.empty(), Errc::invalid_argument, "save_image: empty image");
  const std::string ext = lower_extension(path);
  if (ext == "pgm") {
    write_file_atomic(path, encode_pgm(img));
  } else if (ext == "png") {
    save_png(img, path);
  } else {
    fail(Errc::unsupported, "unsupported image extension: " + path);
  }
}

}  // namespace mfusion
