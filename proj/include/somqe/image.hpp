#pragma once

// 8-bit grayscale images and their on-disk forms: binary PGM (P5, maxval 255)
// and 8-bit grayscale PNG (decoded through libpng's simplified API).

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "somqe/errors.hpp"

namespace somqe {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;  // row-major

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), data(w * h, fill) {
    if (w == 0 || h == 0) throw InputError("image dimensions must be positive");
  }
  GrayImage(std::size_t w, std::size_t h, std::vector<std::uint8_t> pixels)
      : width(w), height(h), data(std::move(pixels)) {
    if (w == 0 || h == 0) throw InputError("image dimensions must be positive");
    if (data.size() != w * h) throw InputError("pixel buffer does not match width*height");
  }

  std::size_t pixel_count() const { return data.size(); }
  std::uint8_t at(std::size_t x, std::size_t y) const { return data[y * width + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return data[y * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

enum class ImageFormat { Pgm, Png };

/// Percentage of pixels equal to 255.
inline double measure_white_fraction(const GrayImage& image) {
  std::size_t white = 0;
  for (auto v : image.data) white += (v == 255);
  return 100.0 * static_cast<double>(white) / static_cast<double>(image.pixel_count());
}

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::uint8_t* bytes, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(n));
  if (!out) throw IoError("short write to " + path.string());
}

// Reads one whitespace-delimited header integer, skipping '#' comments.
inline std::size_t pgm_header_number(const std::vector<std::uint8_t>& buf, std::size_t& pos) {
  while (pos < buf.size()) {
    if (buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else if (std::isspace(buf[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= buf.size() || !std::isdigit(buf[pos])) throw FormatError("malformed PGM header");
  std::size_t value = 0;
  while (pos < buf.size() && std::isdigit(buf[pos])) {
    value = value * 10 + (buf[pos] - '0');
    if (value > (1u << 30)) throw FormatError("PGM header value out of range");
    ++pos;
  }
  return value;
}

inline GrayImage decode_pgm(const std::vector<std::uint8_t>& buf) {
  if (buf.size() < 2 || buf[0] != 'P') throw FormatError("not a PGM file");
  if (buf[1] != '5') throw FormatError("only binary PGM (P5) is supported");
  std::size_t pos = 2;
  const std::size_t w = pgm_header_number(buf, pos);
  const std::size_t h = pgm_header_number(buf, pos);
  const std::size_t maxval = pgm_header_number(buf, pos);
  if (w == 0 || h == 0) throw FormatError("PGM has zero width or height");
  if (maxval != 255) throw FormatError("unsupported PGM maxval " + std::to_string(maxval) + " (need 255)");
  if (pos >= buf.size() || !std::isspace(buf[pos])) throw FormatError("malformed PGM header");
  ++pos;
  if (buf.size() - pos < w * h) throw FormatError("truncated PGM raster");
  return GrayImage(w, h, std::vector<std::uint8_t>(buf.begin() + pos, buf.begin() + pos + w * h));
}

inline GrayImage decode_png(const std::vector<std::uint8_t>& buf) {
  // IHDR is always the first chunk: 8-byte signature, 8-byte chunk header,
  // then width(4) height(4) bit_depth(1) colour_type(1).
  if (buf.size() < 33) throw FormatError("truncated PNG");
  const int bit_depth = buf[24];
  const int colour_type = buf[25];
  if (colour_type != PNG_COLOR_TYPE_GRAY) throw FormatError("PNG is not single-channel grayscale");
  if (bit_depth != 8) throw FormatError("PNG bit depth " + std::to_string(bit_depth) + " unsupported (need 8)");

  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, buf.data(), buf.size()))
    throw FormatError(std::string("PNG decode failed: ") + img.message);
  img.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw FormatError(std::string("PNG decode failed: ") + img.message);
  }
  return GrayImage(img.width, img.height, std::move(pixels));
}

inline bool is_png(const std::vector<std::uint8_t>& buf) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return buf.size() >= 8 && std::equal(std::begin(kSig), std::end(kSig), buf.begin());
}

}  // namespace detail

/// Format from the file extension (.png, otherwise PGM).
inline ImageFormat format_for_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png" ? ImageFormat::Png : ImageFormat::Pgm;
}

/// Loads a P5 PGM or an 8-bit grayscale PNG; the format is sniffed from the content.
inline GrayImage load_image(const std::filesystem::path& path) {
  const auto buf = detail::read_file(path);
  if (detail::is_png(buf)) return detail::decode_png(buf);
  return detail::decode_pgm(buf);
}

inline void save_image(const GrayImage& image, const std::filesystem::path& path, ImageFormat format) {
  if (image.width == 0 || image.height == 0 || image.data.size() != image.width * image.height)
    throw InputError("cannot save an invalid image");
  if (format == ImageFormat::Pgm) {
    const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), image.data.begin(), image.data.end());
    detail::write_file(path, bytes.data(), bytes.size());
    return;
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.data.data(), 0, nullptr))
    throw IoError(std::string("PNG encode failed: ") + img.message);
  std::vector<std::uint8_t> bytes(size);
  if (!png_image_write_to_memory(&img, bytes.data(), &size, 0, image.data.data(), 0, nullptr))
    throw IoError(std::string("PNG encode failed: ") + img.message);
  detail::write_file(path, bytes.data(), size);
}

inline void save_image(const GrayImage& image, const std::filesystem::path& path) {
  save_image(image, path, format_for_path(path));
}

}  // namespace somqe
