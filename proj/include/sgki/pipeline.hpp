#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sgki/error.hpp"
#include "sgki/imaging.hpp"
#include "sgki/interp.hpp"
#include "sgki/kernel.hpp"
#include "sgki/netpbm.hpp"
#include "sgki/uq.hpp"

namespace sgki {

/// Where low-resolution pixels sit on the fine grid during super-resolution.
enum class Placement {
  Aligned,  // low-res (i, j) occupies fine pixel (i * scale, j * scale), 0-based
  OwnGrid,  // low-res pixels keep their own grid coordinates i / (h + 1)
};

struct RunConfig {
  KernelSpec kernel = KernelSpec::paley_wiener(50.0);
  double gamma = 0.1;
  KappaMode kappa_mode = KappaMode::EstimatePW;
  std::optional<double> kappa_manual;
  bool literal_alg1 = false;
  double delta0 = 0.0;
  double delta_r = 0.0;
  double jitter = 0.0;
  unsigned threads = 0;
  std::uint64_t seed = 1;
  int scale = 2;
  bool strict = false;
  Placement placement = Placement::Aligned;
  bool with_bands = true;

  void validate() const {
    kernel.validate();
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in (0, 1)");
    if (kappa_mode == KappaMode::Manual && !kappa_manual)
      throw InvalidArgument("manual kappa mode needs a kappa value");
    if (kappa_mode == KappaMode::EstimatePW && kernel.kind != KernelKind::PaleyWiener)
      throw InvalidArgument("estimate-pw kappa mode needs the Paley-Wiener kernel; use manual or norm-floor");
    if (!(jitter >= 0.0)) throw InvalidArgument("jitter must be nonnegative");
    if (!(delta0 >= 0.0) || !(delta_r >= 0.0)) throw InvalidArgument("delta0 and delta_r must be nonnegative");
    if (scale < 2) throw InvalidArgument("scale must be at least 2");
  }

  KappaPolicy kappa_policy() const {
    KappaPolicy p;
    p.mode = kappa_mode;
    p.gamma = gamma;
    p.delta0 = delta0;
    p.delta_r = delta_r;
    p.manual = kappa_manual.value_or(0.0);
    p.literal_alg1 = literal_alg1;
    return p;
  }
};

/// Output of one inpainting or super-resolution run. Images are normalized;
/// lower/upper are the raw (unclamped) band, equal to the value at observed pixels.
struct Reconstruction {
  Image estimate;
  Image lower;
  Image upper;
  std::vector<PixelIndex> query_pixels;
  Mask sample_mask;  // sample layout on the grid the samples live on (for weight maps)
  std::vector<ChannelFit> channels;
  std::vector<std::string> warnings;
  bool has_bands = false;
};

namespace detail {

// Fits every channel on shared inputs and fills the query pixels of `base`.
inline Reconstruction run_channels(const RunConfig& config, const std::vector<SampleSet>& samples,
                                   const PointSet& queries, std::vector<PixelIndex> query_pixels, Image base,
                                   Mask sample_mask) {
  config.validate();
  Reconstruction rec;
  rec.query_pixels = std::move(query_pixels);
  rec.sample_mask = std::move(sample_mask);
  rec.has_bands = config.with_bands;
  BandOptions opts;
  opts.threads = config.threads;
  opts.strict = config.strict;

  if (config.with_bands) {
    rec.channels = multichannel_band(config.kernel, samples, config.kappa_policy(), queries, config.jitter, opts);
  } else {
    // Point estimates only: bands stay empty.
    auto factor = std::make_shared<const GramFactor>(config.kernel, samples.at(0).points, config.jitter);
    for (std::size_t c = 0; c < samples.size(); ++c) {
      samples[c].validate();
      Interpolant interp(factor, samples[c].values);
      KappaBound bound = config.kappa_policy().resolve(config.kernel, interp, samples[c]);
      EffectiveKappa keff = effective_kappa(bound, interp, interp.size() + 1);
      ConfidenceBand band;
      band.channel = static_cast<int>(c);
      band.kappa_used = keff.value;
      rec.channels.push_back({std::move(interp), bound, std::move(keff), std::move(band)});
    }
  }

  rec.estimate = base;
  rec.lower = base;
  rec.upper = base;
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    const ChannelFit& ch = rec.channels[c];
    if (ch.kappa.floored) rec.warnings.push_back("channel " + std::to_string(c) + ": " + ch.kappa.warning);
    for (const QueryError& e : ch.band.errors)
      rec.warnings.push_back("channel " + std::to_string(c) + ", query " + std::to_string(e.index) + ": " + e.message);
    for (std::size_t q = 0; q < rec.query_pixels.size(); ++q) {
      const auto [i, j] = rec.query_pixels[q];
      const int cc = static_cast<int>(c);
      if (config.with_bands && std::isfinite(ch.band.intervals[q].estimate)) {
        const Interval& iv = ch.band.intervals[q];
        rec.estimate.at(i, j, cc) = iv.estimate;
        rec.lower.at(i, j, cc) = iv.lower;
        rec.upper.at(i, j, cc) = iv.upper;
      } else {
        const double v = ch.interp.predict(point_at(queries, static_cast<Eigen::Index>(q)));
        rec.estimate.at(i, j, cc) = v;
        rec.lower.at(i, j, cc) = v;
        rec.upper.at(i, j, cc) = v;
      }
    }
  }
  return rec;
}

}  // namespace detail

/// Inpainting: fit on the observed pixels of each channel and estimate the rest.
inline Reconstruction inpaint(const RunConfig& config, const Image& image, const Mask& mask) {
  const Image norm = normalize(image);
  check_mask(norm, mask);
  std::vector<SampleSet> samples;
  ObservedSplit split;
  for (int c = 0; c < norm.channels; ++c) {
    split = split_observed(norm, mask, c);
    samples.push_back(std::move(split.samples));
  }
  return detail::run_channels(config, samples, split.queries, std::move(split.query_pixels), norm, mask);
}

/// Super-resolution by `config.scale`. With Aligned placement the observed
/// pixels pass through; with OwnGrid every fine pixel is estimated.
inline Reconstruction superres(const RunConfig& config, const Image& low) {
  config.validate();
  const Image norm = normalize(low);
  const int s = config.scale;
  const int H = norm.height * s;
  const int W = norm.width * s;
  Image fine = Image::zeros(H, W, norm.channels, Encoding::Normalized, norm.maxval);

  Reconstruction rec;
  if (config.placement == Placement::Aligned) {
    Mask mask = Mask::filled(H, W, false);
    for (int i = 0; i < norm.height; ++i)
      for (int j = 0; j < norm.width; ++j) {
        mask.set(i * s, j * s, true);
        for (int c = 0; c < norm.channels; ++c) fine.at(i * s, j * s, c) = norm.at(i, j, c);
      }
    rec = inpaint(config, fine, mask);
  } else {
    std::vector<SampleSet> samples(static_cast<std::size_t>(norm.channels));
    const PointSet coarse = grid_coords(norm.height, norm.width);
    for (int c = 0; c < norm.channels; ++c) {
      samples[c].points = coarse;
      samples[c].values.resize(coarse.rows());
      for (int i = 0; i < norm.height; ++i)
        for (int j = 0; j < norm.width; ++j)
          samples[c].values[static_cast<Eigen::Index>(i) * norm.width + j] = norm.at(i, j, c);
    }
    std::vector<PixelIndex> pixels;
    pixels.reserve(static_cast<std::size_t>(H) * W);
    for (int i = 0; i < H; ++i)
      for (int j = 0; j < W; ++j) pixels.emplace_back(i, j);
    rec = detail::run_channels(config, samples, grid_coords(H, W), std::move(pixels), fine,
                               Mask::filled(norm.height, norm.width, true));
  }
  if (s != 2 && s != 4) rec.warnings.push_back("scale " + std::to_string(s) + " is untested; 2 and 4 are supported");
  return rec;
}

struct ArtifactOptions {
  bool weights = false;
  std::string prefix;
};

// Bands CSV, schema v1: 1-based pixel row/column, channel, then the interval.
inline void write_bands_csv(const Reconstruction& rec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(10);
  out << "# schema: sgki.bands.v1\n";
  out << "i,j,channel,estimate,lower,upper,width\n";
  for (std::size_t q = 0; q < rec.query_pixels.size(); ++q)
    for (std::size_t c = 0; c < rec.channels.size(); ++c) {
      const auto [i, j] = rec.query_pixels[q];
      double est = rec.estimate.at(i, j, static_cast<int>(c));
      double lo = std::numeric_limits<double>::quiet_NaN();
      double hi = lo;
      if (rec.has_bands) {
        const Interval& iv = rec.channels[c].band.intervals[q];
        lo = iv.lower;
        hi = iv.upper;
      }
      out << i + 1 << ',' << j + 1 << ',' << c << ',' << est << ',' << lo << ',' << hi << ',' << hi - lo << '\n';
    }
  if (!out) throw Error("failed writing " + path.string());
}

/// Writes estimate, lower, upper, uncertainty (and optionally weights) images
/// plus the bands CSV. Returns the written paths.
inline std::vector<std::filesystem::path> write_artifacts(const Reconstruction& rec, const std::filesystem::path& dir,
                                                          const ArtifactOptions& opts = {}) {
  std::filesystem::create_directories(dir);
  const std::string ext = rec.estimate.channels == 3 ? ".ppm" : ".pgm";
  std::vector<std::filesystem::path> written;
  auto emit = [&](const Image& img, const std::string& name) {
    const auto path = dir / (opts.prefix + name);
    write_netpbm(img, path);
    written.push_back(path);
  };
  emit(rec.estimate, "estimate" + ext);
  emit(rec.lower, "lower" + ext);
  emit(rec.upper, "upper" + ext);
  if (rec.has_bands && !rec.query_pixels.empty()) {
    std::vector<ConfidenceBand> bands;
    for (const ChannelFit& ch : rec.channels) bands.push_back(ch.band);
    emit(render_uncertainty(bands, rec.query_pixels, rec.estimate.height, rec.estimate.width), "uncertainty.pgm");
  }
  if (opts.weights) {
    for (std::size_t c = 0; c < rec.channels.size(); ++c) {
      const std::string name = rec.channels.size() == 1 ? "weights.pgm" : "weights_c" + std::to_string(c) + ".pgm";
      emit(render_weights(rec.channels[c].interp, rec.sample_mask, rec.sample_mask.height, rec.sample_mask.width),
           name);
    }
  }
  const auto csv = dir / (opts.prefix + "bands.csv");
  write_bands_csv(rec, csv);
  written.push_back(csv);
  return written;
}

}  // namespace sgki
