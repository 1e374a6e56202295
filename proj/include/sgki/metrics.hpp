#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "sgki/error.hpp"
#include "sgki/imaging.hpp"

namespace sgki {

namespace detail {

inline void check_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b))
    throw ShapeMismatch("images differ in shape: " + std::to_string(a.height) + "x" + std::to_string(a.width) + "x" +
                        std::to_string(a.channels) + " vs " + std::to_string(b.height) + "x" + std::to_string(b.width) +
                        "x" + std::to_string(b.channels));
}

}  // namespace detail

// Mean over all h*w*c entries.
inline double mse(const Image& a, const Image& b) {
  detail::check_same_shape(a, b);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    const double d = a.data[k] - b.data[k];
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

/// 10 log10(peak^2 / MSE); +infinity for identical images.
inline double psnr(const Image& a, const Image& b, double peak = 255.0) {
  const double e = mse(a, b);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

/// Global single-window SSIM with population moments over the whole image,
/// c1 = (k1 L)^2 and c2 = (k2 L)^2.
inline double ssim(const Image& a, const Image& b, double range = 255.0, double k1 = 0.01, double k2 = 0.03) {
  detail::check_same_shape(a, b);
  const auto n = static_cast<double>(a.data.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    ma += a.data[k];
    mb += b.data[k];
  }
  ma /= n;
  mb /= n;
  double va = 0.0;
  double vb = 0.0;
  double cov = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    const double da = a.data[k] - ma;
    const double db = b.data[k] - mb;
    va += da * da;
    vb += db * db;
    cov += da * db;
  }
  va /= n;
  vb /= n;
  cov /= n;
  const double c1 = (k1 * range) * (k1 * range);
  const double c2 = (k2 * range) * (k2 * range);
  return ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

// |A - B|_F / |A|_F with A the reference.
inline double nrmse(const Image& reference, const Image& candidate) {
  detail::check_same_shape(reference, candidate);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < reference.data.size(); ++k) {
    const double d = reference.data[k] - candidate.data[k];
    num += d * d;
    den += reference.data[k] * reference.data[k];
  }
  if (!(den > 0.0)) throw InvalidArgument("reference image has zero norm");
  return std::sqrt(num / den);
}

enum class MetricScale {
  Raw,         // 8-bit levels, M = L = maxval
  Normalized,  // [-1, 1], M = 1 (largest pixel value), L = 2 (dynamic range)
};

inline std::string to_string(MetricScale s) { return s == MetricScale::Raw ? "raw" : "normalized"; }

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double nrmse = 0.0;
  double mse = 0.0;
  bool psnr_infinite = false;
  MetricScale scale = MetricScale::Raw;
};

/// All four metrics on the requested scale. Images are converted first:
/// normalized ones are denormalized with clamping for the raw scale.
inline MetricReport evaluate(const Image& reference, const Image& candidate, MetricScale scale = MetricScale::Raw) {
  const auto convert = [scale](const Image& img) {
    return scale == MetricScale::Raw ? denormalize(img, true) : normalize(img);
  };
  const Image a = convert(reference);
  const Image b = convert(candidate);
  const double peak = scale == MetricScale::Raw ? a.maxval : 1.0;
  const double range = scale == MetricScale::Raw ? a.maxval : 2.0;
  MetricReport r;
  r.scale = scale;
  r.mse = mse(a, b);
  r.psnr = psnr(a, b, peak);
  r.psnr_infinite = std::isinf(r.psnr);
  r.ssim = ssim(a, b, range);
  r.nrmse = nrmse(a, b);
  return r;
}

}  // namespace sgki
