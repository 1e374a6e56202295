#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "sgki/error.hpp"
#include "sgki/imaging.hpp"

namespace sgki {

// Classical upsamplers. Output pixel p maps to source coordinate
// (p + 0.5) / scale - 0.5; samples beyond the border are clamped to the edge.

namespace detail {

struct Tap {
  int index;
  double weight;
};

// Keys cubic convolution kernel, a = -0.5.
inline double keys_cubic(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

enum class Resampler { Nearest, Linear, Cubic };

inline std::vector<std::vector<Tap>> taps(int src, int scale, Resampler kind) {
  std::vector<std::vector<Tap>> out(static_cast<std::size_t>(src) * scale);
  const auto clamp = [src](int i) { return std::clamp(i, 0, src - 1); };
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double x = (static_cast<double>(p) + 0.5) / scale - 0.5;
    const int i0 = static_cast<int>(std::floor(x));
    const double f = x - i0;
    switch (kind) {
      case Resampler::Nearest:
        out[p].push_back({clamp(static_cast<int>(std::floor(x + 0.5))), 1.0});
        break;
      case Resampler::Linear:
        out[p].push_back({clamp(i0), 1.0 - f});
        out[p].push_back({clamp(i0 + 1), f});
        break;
      case Resampler::Cubic:
        for (int k = -1; k <= 2; ++k) out[p].push_back({clamp(i0 + k), keys_cubic(f - k)});
        break;
    }
  }
  return out;
}

inline Image upsample(const Image& image, int scale, Resampler kind) {
  if (scale < 2) throw InvalidArgument("upsampling scale must be at least 2");
  const int h = image.height;
  const int w = image.width;
  const int c = image.channels;
  const auto row_taps = taps(h, scale, kind);
  const auto col_taps = taps(w, scale, kind);

  // Horizontal pass: h x (w * scale).
  std::vector<double> tmp(static_cast<std::size_t>(h) * w * scale * c, 0.0);
  const std::size_t tw = static_cast<std::size_t>(w) * scale;
  for (int i = 0; i < h; ++i)
    for (std::size_t q = 0; q < tw; ++q)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (const Tap& t : col_taps[q]) acc += t.weight * image.at(i, t.index, ch);
        tmp[(static_cast<std::size_t>(i) * tw + q) * c + ch] = acc;
      }

  Image out = Image::zeros(h * scale, w * scale, c, image.encoding, image.maxval);
  for (int p = 0; p < out.height; ++p)
    for (std::size_t q = 0; q < tw; ++q)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (const Tap& t : row_taps[static_cast<std::size_t>(p)])
          acc += t.weight * tmp[(static_cast<std::size_t>(t.index) * tw + q) * c + ch];
        if (image.encoding == Encoding::Raw) acc = std::clamp(std::round(acc), 0.0, static_cast<double>(image.maxval));
        out.at(p, static_cast<int>(q), ch) = acc;
      }
  return out;
}

}  // namespace detail

inline Image upsample_nearest(const Image& image, int scale) {
  return detail::upsample(image, scale, detail::Resampler::Nearest);
}

inline Image upsample_bilinear(const Image& image, int scale) {
  return detail::upsample(image, scale, detail::Resampler::Linear);
}

// Raw inputs are rounded and clipped to [0, maxval]; normalized ones are left unclipped.
inline Image upsample_bicubic(const Image& image, int scale) {
  return detail::upsample(image, scale, detail::Resampler::Cubic);
}

}  // namespace sgki
