#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sgki/error.hpp"
#include "sgki/interp.hpp"
#include "sgki/kernel.hpp"
#include "sgki/uq.hpp"

namespace sgki {

enum class Encoding { Raw, Normalized };

/// h x w pixels, 1 (gray) or 3 (RGB) interleaved channels, row-major.
/// Raw images hold integers in [0, maxval]; normalized ones hold reals in [-1, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  Encoding encoding = Encoding::Raw;
  int maxval = 255;
  std::vector<double> data;

  static Image zeros(int h, int w, int c, Encoding enc, int maxval = 255) {
    if (h < 1 || w < 1) throw InvalidArgument("image dimensions must be positive");
    if (c != 1 && c != 3) throw InvalidArgument("images have 1 or 3 channels");
    Image img;
    img.height = h;
    img.width = w;
    img.channels = c;
    img.encoding = enc;
    img.maxval = maxval;
    img.data.assign(static_cast<std::size_t>(h) * w * c, 0.0);
    return img;
  }

  std::size_t index(int i, int j, int c = 0) const {
    return (static_cast<std::size_t>(i) * width + j) * channels + c;
  }
  double& at(int i, int j, int c = 0) { return data[index(i, j, c)]; }
  double at(int i, int j, int c = 0) const { return data[index(i, j, c)]; }
  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

/// Observation pattern; true means the pixel is observed.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> observed;

  static Mask filled(int h, int w, bool value) {
    Mask m;
    m.height = h;
    m.width = w;
    m.observed.assign(static_cast<std::size_t>(h) * w, value ? 1 : 0);
    return m;
  }

  bool at(int i, int j) const { return observed[static_cast<std::size_t>(i) * width + j] != 0; }
  void set(int i, int j, bool v) { observed[static_cast<std::size_t>(i) * width + j] = v ? 1 : 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(observed.begin(), observed.end(), 1)); }
};

using PixelIndex = std::pair<int, int>;  // 0-based (row, column)

/// Pixel (i, j), 1-based, sits at (i / (h + 1), j / (w + 1)); row-major order.
inline PointSet grid_coords(int h, int w) {
  if (h < 1 || w < 1) throw InvalidArgument("grid dimensions must be positive");
  PointSet pts(static_cast<Eigen::Index>(h) * w, 2);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * w + j;
      pts(r, 0) = static_cast<double>(i + 1) / static_cast<double>(h + 1);
      pts(r, 1) = static_cast<double>(j + 1) / static_cast<double>(w + 1);
    }
  return pts;
}

inline std::vector<double> pixel_coord(int i, int j, int h, int w) {
  return {static_cast<double>(i + 1) / static_cast<double>(h + 1), static_cast<double>(j + 1) / static_cast<double>(w + 1)};
}

struct ObservedSplit {
  SampleSet samples;
  PointSet queries;
  std::vector<PixelIndex> sample_pixels;
  std::vector<PixelIndex> query_pixels;
};

inline void check_mask(const Image& image, const Mask& mask) {
  if (mask.height != image.height || mask.width != image.width)
    throw ShapeMismatch("mask is " + std::to_string(mask.height) + "x" + std::to_string(mask.width) + " but image is " +
                        std::to_string(image.height) + "x" + std::to_string(image.width));
}

/// Observed pixels become samples, the rest become queries, both row-major.
inline ObservedSplit split_observed(const Image& image, const Mask& mask, int channel) {
  if (image.encoding != Encoding::Normalized) throw InvalidArgument("split_observed needs a normalized image");
  if (channel < 0 || channel >= image.channels) throw InvalidArgument("channel out of range");
  check_mask(image, mask);
  const auto n = static_cast<Eigen::Index>(mask.count());
  if (n == 0) throw NoData("mask has no observed pixels");
  const auto m = static_cast<Eigen::Index>(image.pixels()) - n;
  ObservedSplit out;
  out.samples.points.resize(n, 2);
  out.samples.values.resize(n);
  out.queries.resize(m, 2);
  Eigen::Index s = 0;
  Eigen::Index q = 0;
  for (int i = 0; i < image.height; ++i)
    for (int j = 0; j < image.width; ++j) {
      const auto c = pixel_coord(i, j, image.height, image.width);
      if (mask.at(i, j)) {
        out.samples.points(s, 0) = c[0];
        out.samples.points(s, 1) = c[1];
        out.samples.values[s] = image.at(i, j, channel);
        out.sample_pixels.emplace_back(i, j);
        ++s;
      } else {
        out.queries(q, 0) = c[0];
        out.queries(q, 1) = c[1];
        out.query_pixels.emplace_back(i, j);
        ++q;
      }
    }
  return out;
}

/// Exactly round(fraction * h * w) observed pixels, drawn without replacement
/// by a seeded mt19937_64.
inline Mask random_mask(int h, int w, double fraction, std::uint64_t seed) {
  if (h < 1 || w < 1) throw InvalidArgument("mask dimensions must be positive");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("observed fraction must lie in (0, 1]");
  const std::size_t total = static_cast<std::size_t>(h) * w;
  const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  if (keep == 0) throw InvalidArgument("observed fraction rounds to zero pixels");
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < keep; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, total - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  Mask m = Mask::filled(h, w, false);
  for (std::size_t k = 0; k < keep; ++k) m.observed[idx[k]] = 1;
  return m;
}

/// Pixels strictly inside the disk (0-based pixel coordinates) are missing.
inline Mask circle_mask(int h, int w, double center_i, double center_j, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("radius must be nonnegative");
  Mask m = Mask::filled(h, w, true);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const double di = i - center_i;
      const double dj = j - center_j;
      if (di * di + dj * dj < radius * radius) m.set(i, j, false);
    }
  return m;
}

/// Keeps every stride-th pixel of every stride-th row, starting at the first.
inline Image subsample(const Image& image, int stride) {
  if (stride < 2) throw InvalidArgument("stride must be at least 2");
  if (image.height % stride != 0 || image.width % stride != 0)
    throw InvalidArgument("image dimensions are not divisible by the stride");
  Image out = Image::zeros(image.height / stride, image.width / stride, image.channels, image.encoding, image.maxval);
  for (int i = 0; i < out.height; ++i)
    for (int j = 0; j < out.width; ++j)
      for (int c = 0; c < image.channels; ++c) out.at(i, j, c) = image.at(i * stride, j * stride, c);
  return out;
}

inline Image normalize(const Image& raw) {
  if (raw.encoding == Encoding::Normalized) return raw;
  Image out = raw;
  out.encoding = Encoding::Normalized;
  const double m = raw.maxval;
  for (double& v : out.data) v = 2.0 * v / m - 1.0;
  return out;
}

/// Inverse of normalize, rounding to the nearest level. With clamp, values are
/// clipped to [0, maxval] first; without it, out-of-range values are an error.
inline Image denormalize(const Image& norm, bool clamp) {
  if (norm.encoding == Encoding::Raw) return norm;
  Image out = norm;
  out.encoding = Encoding::Raw;
  const double m = norm.maxval;
  for (double& v : out.data) {
    double r = (v + 1.0) * m / 2.0;
    if (clamp) r = std::clamp(r, 0.0, m);
    r = std::round(r);
    if (!clamp && (r < 0.0 || r > m))
      throw InvalidArgument("normalized value " + std::to_string(v) + " is outside the representable range");
    v = r;
  }
  return out;
}

/// Band-limited ground truth f(x) = sum_k w_k k(x, knot_k) / normalizer.
struct SyntheticTruth {
  KernelSpec spec;
  PointSet knots;
  Eigen::VectorXd weights;
  double normalizer = 1.0;
};

inline double eval_truth(const SyntheticTruth& truth, PointView x) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < truth.knots.rows(); ++k)
    acc += truth.weights[k] * eval_kernel(truth.spec, x, point_at(truth.knots, k));
  return acc / truth.normalizer;
}

// Squared RKHS norm of the truth, w^T K_knots w / normalizer^2.
inline double truth_norm_sq(const SyntheticTruth& truth) {
  return truth.weights.dot(gram(truth.spec, truth.knots) * truth.weights) / (truth.normalizer * truth.normalizer);
}

struct SyntheticImage {
  Image image;  // normalized
  SyntheticTruth truth;
};

/// Evaluates knots/weights on the r x r grid and divides by max |f| when it
/// exceeds 1. The normalizer is stored in the returned truth.
inline SyntheticImage render_truth(const KernelSpec& spec, PointSet knots, Eigen::VectorXd weights, int r) {
  SyntheticImage out;
  out.truth.spec = spec;
  out.truth.knots = std::move(knots);
  out.truth.weights = std::move(weights);
  out.truth.normalizer = 1.0;
  out.image = Image::zeros(r, r, 1, Encoding::Normalized);
  const PointSet grid = grid_coords(r, r);
  double peak = 0.0;
  for (Eigen::Index p = 0; p < grid.rows(); ++p) {
    const double v = eval_truth(out.truth, point_at(grid, p));
    out.image.data[static_cast<std::size_t>(p)] = v;
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 1.0) {
    out.truth.normalizer = peak;
    for (Eigen::Index p = 0; p < grid.rows(); ++p)
      out.image.data[static_cast<std::size_t>(p)] = eval_truth(out.truth, point_at(grid, p));
  }
  return out;
}

/// Random Paley-Wiener image: knots uniform on the unit square, weights
/// uniform on [-1, 1], evaluated on an r x r grid.
inline SyntheticImage synth_pw_image(double eta, int r, int n_knots = 20, std::uint64_t seed = 1) {
  if (r < 1) throw InvalidArgument("resolution must be positive");
  if (n_knots < 1) throw InvalidArgument("need at least one knot");
  const KernelSpec spec = KernelSpec::paley_wiener(eta, 2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  PointSet knots(n_knots, 2);
  for (int k = 0; k < n_knots; ++k) {
    knots(k, 0) = unit(rng);
    knots(k, 1) = unit(rng);
  }
  Eigen::VectorXd weights(n_knots);
  for (int k = 0; k < n_knots; ++k) weights[k] = sym(rng);
  return render_truth(spec, std::move(knots), std::move(weights), r);
}

// Truth sidecar: "key = value" lines, '#' comments.
inline void write_truth(const SyntheticTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "# sgki synthetic truth v1\n";
  out << "kernel = " << (truth.spec.kind == KernelKind::PaleyWiener ? "pw" : "gauss") << "\n";
  out << "eta = " << truth.spec.eta << "\n";
  out << "sigma = " << truth.spec.sigma << "\n";
  out << "normalizer = " << truth.normalizer << "\n";
  out << "knots = " << truth.knots.rows() << "\n";
  for (Eigen::Index k = 0; k < truth.knots.rows(); ++k)
    out << "knot_" << k << " = " << truth.knots(k, 0) << " " << truth.knots(k, 1) << "\n";
  for (Eigen::Index k = 0; k < truth.weights.size(); ++k) out << "weight_" << k << " = " << truth.weights[k] << "\n";
  if (!out) throw Error("failed writing " + path.string());
}

inline SyntheticTruth read_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("malformed truth line: " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error("truth file " + path.string() + " lacks key '" + key + "'");
    return it->second;
  };
  SyntheticTruth t;
  t.spec = get("kernel") == "pw" ? KernelSpec::paley_wiener(std::stod(get("eta")))
                                 : KernelSpec::gaussian(std::stod(get("sigma")));
  t.normalizer = std::stod(get("normalizer"));
  const int n = std::stoi(get("knots"));
  t.knots.resize(n, 2);
  t.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    std::istringstream ks(get("knot_" + std::to_string(k)));
    ks >> t.knots(k, 0) >> t.knots(k, 1);
    if (!ks) throw Error("malformed knot_" + std::to_string(k));
    t.weights[k] = std::stod(get("weight_" + std::to_string(k)));
  }
  return t;
}

/// Relative uncertainty per pixel: 1 - (width / U_max)^(1/4) at queries and 1 at
/// observed pixels. Channels combine with luminance weights 0.3/0.59/0.11.
inline std::vector<double> relative_uncertainty(const std::vector<ConfidenceBand>& bands,
                                                const std::vector<PixelIndex>& query_pixels, int h, int w) {
  if (bands.empty()) throw InvalidArgument("no bands to render");
  static constexpr double kLuma[3] = {0.3, 0.59, 0.11};
  std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
  std::vector<std::uint8_t> is_query(out.size(), 0);
  for (const auto& [i, j] : query_pixels) is_query[static_cast<std::size_t>(i) * w + j] = 1;
  for (std::size_t c = 0; c < bands.size(); ++c) {
    const ConfidenceBand& band = bands[c];
    if (band.intervals.size() != query_pixels.size())
      throw ShapeMismatch("band size does not match the query pixel list");
    double umax = 0.0;
    for (const Interval& iv : band.intervals)
      if (std::isfinite(iv.width())) umax = std::max(umax, std::abs(iv.width()));
    umax = std::max(umax, 1e-12);
    const double weight = bands.size() == 3 ? kLuma[c] : 1.0 / static_cast<double>(bands.size());
    for (std::size_t q = 0; q < query_pixels.size(); ++q) {
      const double width = band.intervals[q].width();
      const double u = std::isfinite(width) ? 1.0 - std::pow(std::abs(width) / umax, 0.25) : 0.0;
      const auto [i, j] = query_pixels[q];
      out[static_cast<std::size_t>(i) * w + j] += weight * u;
    }
  }
  for (std::size_t p = 0; p < out.size(); ++p)
    if (!is_query[p]) out[p] = 1.0;
  return out;
}

inline Image render_uncertainty(const std::vector<ConfidenceBand>& bands, const std::vector<PixelIndex>& query_pixels,
                                int h, int w) {
  const std::vector<double> u = relative_uncertainty(bands, query_pixels, h, w);
  Image img = Image::zeros(h, w, 1, Encoding::Raw);
  for (std::size_t p = 0; p < u.size(); ++p) img.data[p] = std::round(255.0 * std::clamp(u[p], 0.0, 1.0));
  return img;
}

/// Kernel weights scaled by max |alpha| and passed through sign(a)|a|^p.
/// Observed pixels are the mask's true entries in row-major order; the rest stay 0.
inline Image weight_map(const Interpolant& interp, const Mask& mask, int h, int w, double p = 0.25) {
  if (mask.height != h || mask.width != w) throw ShapeMismatch("mask does not match the requested size");
  if (static_cast<Eigen::Index>(mask.count()) != interp.size())
    throw ShapeMismatch("mask has " + std::to_string(mask.count()) + " observed pixels but the interpolant has " +
                        std::to_string(interp.size()) + " samples");
  Image img = Image::zeros(h, w, 1, Encoding::Normalized);
  const double peak = interp.alpha().size() ? interp.alpha().cwiseAbs().maxCoeff() : 0.0;
  if (!(peak > 0.0)) return img;
  Eigen::Index k = 0;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!mask.at(i, j)) continue;
      const double a = interp.alpha()[k++] / peak;
      img.at(i, j) = std::copysign(std::pow(std::abs(a), p), a);
    }
  return img;
}

inline Image render_weights(const Interpolant& interp, const Mask& mask, int h, int w, double p = 0.25) {
  return denormalize(weight_map(interp, mask, h, w, p), true);
}

}  // namespace sgki
