#pragma once

// Binary PGM (P5) / PPM (P6), 8-bit only.

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "augsearch/error.hpp"
#include "augsearch/image.hpp"

namespace augsearch {

namespace detail {

class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::string magic() {
    if (bytes_.size() < 2) fail(ErrorKind::MalformedHeader, "pnm: file too short");
    pos_ = 2;
    return std::string(bytes_.begin(), bytes_.begin() + 2);
  }

  long number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      fail(ErrorKind::MalformedHeader, "pnm: expected a header number");
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) fail(ErrorKind::MalformedHeader, "pnm: header number out of range");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      fail(ErrorKind::MalformedHeader, "pnm: missing whitespace before raster");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) fail(ErrorKind::MissingFile, "no such file: " + path.string());
    fail(ErrorKind::Io, "cannot open: " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  detail::PnmHeaderReader header(bytes);
  const std::string magic = header.magic();
  int channels = 0;
  if (magic == "P5") channels = 1;
  else if (magic == "P6") channels = 3;
  else fail(ErrorKind::MalformedHeader, "pnm: unsupported magic '" + magic + "'");

  const long width = header.number();
  const long height = header.number();
  const long maxval = header.number();
  if (width <= 0 || height <= 0) fail(ErrorKind::MalformedHeader, "pnm: non-positive dimensions");
  if (maxval != 255) {
    if (maxval > 255) fail(ErrorKind::UnsupportedBitDepth, "pnm: only 8-bit (maxval 255) is supported");
    fail(ErrorKind::MalformedHeader, "pnm: maxval must be 255");
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() < offset + count) fail(ErrorKind::MalformedHeader, "pnm: truncated raster");

  std::vector<float> samples(count);
  for (std::size_t i = 0; i < count; ++i) samples[i] = static_cast<float>(bytes[offset + i] / 255.0);
  return Image(static_cast<int>(width), static_cast<int>(height), channels, std::move(samples));
}

inline unsigned char quantize8(float v) noexcept {
  return static_cast<unsigned char>(std::lround(static_cast<double>(clamp01(v)) * 255.0));
}

inline void save_image(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write: " + path.string());
  out << (image.channels() == 1 ? "P5" : "P6") << '\n'
      << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<unsigned char> raster(image.sample_count());
  auto s = image.samples();
  for (std::size_t i = 0; i < raster.size(); ++i) raster[i] = quantize8(s[i]);
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace augsearch
