#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "sgki/error.hpp"
#include "sgki/imaging.hpp"

namespace sgki {

namespace detail {

class PnmCursor {
 public:
  explicit PnmCursor(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ >= bytes_.size(); }

  // Skips whitespace and '#' comments running to end of line.
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  int read_uint(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000) throw ParseError(std::string("value too large for ") + what, start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("expected ") + what, start);
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates the header from a binary raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      throw ParseError("expected whitespace after header", pos_);
    ++pos_;
  }

  unsigned char byte() {
    if (pos_ >= bytes_.size()) throw ParseError("truncated raster", pos_);
    return static_cast<unsigned char>(bytes_[pos_++]);
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses P2/P3 (ASCII) and P5/P6 (binary) data with maxval <= 255.
inline Image parse_netpbm(std::string_view bytes) {
  detail::PnmCursor cur(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("missing NetPBM magic", 0);
  const char kind = bytes[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') throw ParseError("unsupported NetPBM variant", 1);
  for (int k = 0; k < 2; ++k) cur.byte();
  const bool ascii = kind == '2' || kind == '3';
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;
  const int width = cur.read_uint("width");
  const int height = cur.read_uint("height");
  const std::size_t maxval_at = cur.offset();
  const int maxval = cur.read_uint("maxval");
  if (width < 1 || height < 1) throw ParseError("image dimensions must be positive", maxval_at);
  if (maxval < 1 || maxval > 255) throw ParseError("unsupported maxval " + std::to_string(maxval), maxval_at);

  Image img = Image::zeros(height, width, channels, Encoding::Raw, maxval);
  if (ascii) {
    for (double& v : img.data) {
      cur.skip_space();
      if (cur.done()) throw ParseError("truncated raster", cur.offset());
      const std::size_t at = cur.offset();
      const int s = cur.read_uint("sample");
      if (s > maxval) throw ParseError("sample exceeds maxval", at);
      v = s;
    }
  } else {
    cur.single_space();
    for (double& v : img.data) {
      const std::size_t at = cur.offset();
      const int s = cur.byte();
      if (s > maxval) throw ParseError("sample exceeds maxval", at);
      v = s;
    }
  }
  return img;
}

inline Image read_netpbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_netpbm(bytes);
}

/// Serializes a raw image; normalized images are denormalized with clamping.
/// Binary (P5/P6) unless ascii is requested.
inline std::string format_netpbm(const Image& image, bool ascii = false) {
  const Image raw = image.encoding == Encoding::Raw ? image : denormalize(image, true);
  if (raw.maxval < 1 || raw.maxval > 255) throw InvalidArgument("maxval must lie in [1, 255]");
  const bool color = raw.channels == 3;
  std::string out = std::string("P") + (color ? (ascii ? '3' : '6') : (ascii ? '2' : '5')) + "\n" +
                    std::to_string(raw.width) + " " + std::to_string(raw.height) + "\n" + std::to_string(raw.maxval) +
                    "\n";
  out.reserve(out.size() + raw.data.size() * (ascii ? 4 : 1));
  std::size_t k = 0;
  for (double v : raw.data) {
    const long s = std::lround(v);
    if (s < 0 || s > raw.maxval) throw InvalidArgument("raw sample " + std::to_string(v) + " is out of range");
    if (ascii) {
      out += std::to_string(s);
      out += (++k % static_cast<std::size_t>(raw.width * raw.channels) == 0) ? '\n' : ' ';
    } else {
      out += static_cast<char>(static_cast<unsigned char>(s));
    }
  }
  return out;
}

inline void write_netpbm(const Image& image, const std::filesystem::path& path, bool ascii = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::string bytes = format_netpbm(image, ascii);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

// Masks are grayscale PGM: 0 = missing, anything else = observed.
inline Mask mask_from_image(const Image& image) {
  if (image.channels != 1) throw InvalidArgument("mask images must be grayscale");
  Mask m = Mask::filled(image.height, image.width, false);
  for (std::size_t p = 0; p < image.data.size(); ++p) m.observed[p] = image.data[p] != 0.0 ? 1 : 0;
  return m;
}

inline Image mask_to_image(const Mask& mask) {
  Image img = Image::zeros(mask.height, mask.width, 1, Encoding::Raw);
  for (std::size_t p = 0; p < mask.observed.size(); ++p) img.data[p] = mask.observed[p] ? 255.0 : 0.0;
  return img;
}

inline Mask read_mask(const std::filesystem::path& path) { return mask_from_image(read_netpbm(path)); }
inline void write_mask(const Mask& mask, const std::filesystem::path& path) { write_netpbm(mask_to_image(mask), path); }

}  // namespace sgki
