#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "sgki/error.hpp"
#include "sgki/interp.hpp"
#include "sgki/kernel.hpp"

namespace sgki {

enum class KappaMode { EstimatePW, Manual, NormFloor };

/// Upper bound on the squared RKHS norm of the data-generating function,
/// holding with probability at least 1 - gamma.
struct KappaBound {
  double kappa = 0.0;
  KappaMode mode = KappaMode::Manual;
  double gamma = 0.1;
  double delta0 = 0.0;   // tail mass outside the unit square
  double delta_r = 0.0;  // input quantization correction
  bool literal_alg1 = false;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in (0, 1)");
    if (!(delta0 >= 0.0) || !(delta_r >= 0.0)) throw InvalidArgument("delta0 and delta_r must be nonnegative");
    if (mode == KappaMode::NormFloor ? !(kappa >= 0.0) : !(kappa > 0.0))
      throw InvalidArgument("kappa must be positive");
  }
};

/// Band-limited norm bound from the sample itself:
///   kappa = mean(y^2) + sqrt(-ln(gamma) / (2n)) + delta0 + delta_r.
/// Only valid for Paley-Wiener kernels with uniformly drawn inputs.
inline KappaBound estimate_kappa_pw(const SampleSet& samples, double gamma, double delta0 = 0.0,
                                    double delta_r = 0.0) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in (0, 1)");
  const auto n = static_cast<double>(samples.values.size());
  if (n < 1) throw InvalidArgument("kappa estimate needs at least one sample");
  KappaBound b;
  b.mode = KappaMode::EstimatePW;
  b.gamma = gamma;
  b.delta0 = delta0;
  b.delta_r = delta_r;
  b.kappa = samples.values.squaredNorm() / n + std::sqrt(-std::log(gamma) / (2.0 * n)) + delta0 + delta_r;
  b.validate();
  return b;
}

inline KappaBound estimate_kappa_pw(const KernelSpec& spec, const SampleSet& samples, double gamma,
                                    double delta0 = 0.0, double delta_r = 0.0) {
  if (spec.kind != KernelKind::PaleyWiener)
    throw InvalidArgument("the sample-based kappa estimate only holds for Paley-Wiener kernels");
  return estimate_kappa_pw(samples, gamma, delta0, delta_r);
}

struct EffectiveKappa {
  double value = 0.0;
  bool floored = false;  // true when the bound was raised to the interpolant norm
  std::string warning;
};

/// kappa_eff = max(scale * kappa, |f|^2), scale = n_extended when
/// literal_alg1 is set and 1 otherwise. NormFloor mode always yields |f|^2.
inline EffectiveKappa effective_kappa(const KappaBound& bound, const Interpolant& interp, Eigen::Index n_extended) {
  EffectiveKappa out;
  const double norm = interp.norm_sq();
  if (bound.mode == KappaMode::NormFloor) {
    out.value = norm;
    return out;
  }
  const double scale = bound.literal_alg1 ? static_cast<double>(n_extended) : 1.0;
  const double scaled = scale * bound.kappa;
  if (scaled < norm) {
    out.value = norm;
    out.floored = true;
    out.warning = "kappa " + std::to_string(scaled) + " is below the interpolant norm " + std::to_string(norm) +
                  "; using the norm (zero-width band)";
  } else {
    out.value = scaled;
  }
  return out;
}

/// Extension of the fitted system by a query x0:
///   w = K^-1 k0,  g0 = r0 - k0^T w,  mean = w^T y.
/// With jitter lambda the extended matrix is K0 + lambda I, so r0 carries it too.
struct SchurExtension {
  double r0 = 0.0;
  double g0 = 0.0;
  double mean = 0.0;
  Eigen::VectorXd k0;
  Eigen::VectorXd w;
};

inline SchurExtension schur_extend(const Interpolant& interp, PointView x0) {
  CrossKernel ck = cross_kernel(interp.spec(), x0, interp.points());
  SchurExtension ext;
  ext.r0 = ck.r0 + interp.jitter();
  ext.k0 = std::move(ck.k0);
  ext.w = interp.factor().solve(ext.k0);
  ext.g0 = ext.r0 - ext.k0.dot(ext.w);
  ext.mean = ext.w.dot(interp.values());
  if (!(ext.g0 > 1e-12 * ext.r0)) throw NearDuplicateQuery(ext.g0);
  return ext;
}

/// Inverse of K0 = [r0 k0^T; k0 K] assembled from its blocks, query first:
///   [1/g0, -w^T/g0; -w/g0, K^-1 + w w^T / g0].
/// `k_inverse` is the explicit inverse of the fitted (jittered) Gram matrix.
inline Eigen::MatrixXd extended_inverse(const Interpolant& interp, PointView x0, const Eigen::MatrixXd& k_inverse) {
  const SchurExtension ext = schur_extend(interp, x0);
  const Eigen::Index n = interp.size();
  Eigen::MatrixXd out(n + 1, n + 1);
  const double inv_g0 = 1.0 / ext.g0;
  out(0, 0) = inv_g0;
  out.block(1, 0, n, 1) = -ext.w * inv_g0;
  out.block(0, 1, 1, n) = -ext.w.transpose() * inv_g0;
  out.block(1, 1, n, n) = k_inverse;
  out.block(1, 1, n, n).noalias() += (ext.w * inv_g0) * ext.w.transpose();
  return out;
}

inline Eigen::MatrixXd extended_inverse(const Interpolant& interp, PointView x0) {
  return extended_inverse(interp, x0, interp.factor().inverse());
}

/// (y0, y)^T K0^-1 (y0, y) = |f|^2 + (y0 - mean)^2 / g0, without forming K0^-1.
inline double extended_norm_sq(const Interpolant& interp, PointView x0, double y0) {
  const SchurExtension ext = schur_extend(interp, x0);
  const double d = y0 - ext.mean;
  return interp.norm_sq() + d * d / ext.g0;
}

inline bool membership_test(const Interpolant& interp, double kappa_eff, PointView x0, double y0) {
  if (auto k = interp.find_sample(x0)) return std::abs(y0 - interp.values()[*k]) <= 1e-9;
  return extended_norm_sq(interp, x0, y0) <= kappa_eff;
}

/// Confidence interval [lower, upper] for f(x0) with f(x0) = estimate.
struct Interval {
  std::vector<double> query;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double g0 = 0.0;
  bool degenerate = false;

  double width() const { return upper - lower; }
};

namespace detail {

inline Interval degenerate_interval(PointView x0, double value) {
  Interval iv;
  iv.query.assign(x0.begin(), x0.end());
  iv.estimate = iv.lower = iv.upper = value;
  iv.degenerate = true;
  return iv;
}

inline void check_feasible(const Interpolant& interp, double kappa_eff) {
  if (kappa_eff < interp.norm_sq())
    throw Infeasible("kappa " + std::to_string(kappa_eff) + " is below the interpolant norm " +
                     std::to_string(interp.norm_sq()));
}

}  // namespace detail

/// Endpoints of {y0 : (y0, y)^T K0^-1 (y0, y) <= kappa_eff}, in closed form:
/// f(x0) +- sqrt(g0 (kappa_eff - |f|^2)). Coincident queries give the observed value.
inline Interval confidence_interval(const Interpolant& interp, double kappa_eff, PointView x0) {
  if (auto k = interp.find_sample(x0)) return detail::degenerate_interval(x0, interp.values()[*k]);
  detail::check_feasible(interp, kappa_eff);
  const SchurExtension ext = schur_extend(interp, x0);
  const double half = std::sqrt(ext.g0 * (kappa_eff - interp.norm_sq()));
  Interval iv;
  iv.query.assign(x0.begin(), x0.end());
  // Centre on the fitted interpolant rather than w^T y: equal in exact
  // arithmetic, and this keeps the band consistent with predict() bit for bit.
  iv.estimate = interp.predict(x0);
  iv.lower = iv.estimate - half;
  iv.upper = iv.estimate + half;
  iv.g0 = ext.g0;
  return iv;
}

/// The same interval by the printed quadratic: partition K0^-1 = [c b^T; b A],
/// then solve c y0^2 + 2 b^T y y0 + y^T A y - kappa_eff = 0.
inline Interval quadratic_interval(const Interpolant& interp, double kappa_eff, PointView x0,
                                   const Eigen::MatrixXd& k_inverse) {
  if (auto k = interp.find_sample(x0)) return detail::degenerate_interval(x0, interp.values()[*k]);
  detail::check_feasible(interp, kappa_eff);
  const Eigen::MatrixXd inv = extended_inverse(interp, x0, k_inverse);
  const Eigen::Index n = interp.size();
  const Eigen::VectorXd& y = interp.values();
  const double a0 = inv(0, 0);
  const double b0 = 2.0 * inv.block(1, 0, n, 1).col(0).dot(y);
  const double c0 = y.dot(inv.block(1, 1, n, n) * y) - kappa_eff;
  const double disc = std::max(0.0, b0 * b0 - 4.0 * a0 * c0);
  const double q = -0.5 * (b0 + std::copysign(std::sqrt(disc), b0));
  double r1 = q / a0;
  double r2 = q != 0.0 ? c0 / q : r1;
  if (r1 > r2) std::swap(r1, r2);
  Interval iv;
  iv.query.assign(x0.begin(), x0.end());
  iv.estimate = interp.predict(x0);
  iv.lower = r1;
  iv.upper = r2;
  iv.g0 = 1.0 / a0;
  return iv;
}

struct QueryError {
  std::size_t index = 0;
  std::string message;
};

struct ConfidenceBand {
  std::vector<Interval> intervals;
  double kappa_used = 0.0;
  int channel = 0;
  std::vector<QueryError> errors;  // failed queries keep NaN intervals
};

struct BandOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  bool strict = false;   // rethrow the first per-query error
  int channel = 0;
};

/// Confidence intervals for every query. Workers share the factorization
/// read-only; output order follows input order.
inline ConfidenceBand band_over_queries(const Interpolant& interp, double kappa_eff, const PointSet& queries,
                                        const BandOptions& opts = {}) {
  ConfidenceBand band;
  band.kappa_used = kappa_eff;
  band.channel = opts.channel;
  const auto m = static_cast<std::size_t>(queries.rows());
  band.intervals.resize(m);
  if (m == 0) return band;

  std::vector<std::string> failures(m);
  std::vector<std::exception_ptr> raised(m);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q) {
      const PointView x0 = point_at(queries, static_cast<Eigen::Index>(q));
      try {
        band.intervals[q] = confidence_interval(interp, kappa_eff, x0);
      } catch (const Error& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        Interval& iv = band.intervals[q];
        iv.query.assign(x0.begin(), x0.end());
        iv.estimate = iv.lower = iv.upper = iv.g0 = nan;
        failures[q] = e.what();
        raised[q] = std::current_exception();
      }
    }
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, m));
  if (threads <= 1) {
    work(0, m);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (m + threads - 1) / threads;
    for (std::size_t begin = 0; begin < m; begin += chunk) pool.emplace_back(work, begin, std::min(m, begin + chunk));
  }

  for (std::size_t q = 0; q < m; ++q) {
    if (failures[q].empty()) continue;
    if (opts.strict) std::rethrow_exception(raised[q]);
    band.errors.push_back({q, failures[q]});
  }
  return band;
}

/// How to obtain kappa for each fitted channel.
struct KappaPolicy {
  KappaMode mode = KappaMode::EstimatePW;
  double gamma = 0.1;
  double delta0 = 0.0;
  double delta_r = 0.0;
  double manual = 0.0;
  bool literal_alg1 = false;

  KappaBound resolve(const KernelSpec& spec, const Interpolant& interp, const SampleSet& samples) const {
    KappaBound b;
    switch (mode) {
      case KappaMode::EstimatePW:
        b = estimate_kappa_pw(spec, samples, gamma, delta0, delta_r);
        break;
      case KappaMode::Manual:
        b.mode = KappaMode::Manual;
        b.kappa = manual;
        b.gamma = gamma;
        b.delta0 = delta0;
        b.delta_r = delta_r;
        break;
      case KappaMode::NormFloor:
        b.mode = KappaMode::NormFloor;
        b.kappa = interp.norm_sq();
        b.gamma = gamma;
        break;
    }
    b.literal_alg1 = literal_alg1;
    b.validate();
    return b;
  }
};

struct ChannelFit {
  Interpolant interp;
  KappaBound bound;
  EffectiveKappa kappa;
  ConfidenceBand band;
};

/// One band per channel over shared inputs. The Gram factorization is computed
/// once and reused; the per-query confidence region is the box spanned by the
/// channel intervals.
inline std::vector<ChannelFit> multichannel_band(const KernelSpec& spec, const std::vector<SampleSet>& channels,
                                                 const KappaPolicy& policy, const PointSet& queries,
                                                 double jitter = 0.0, BandOptions opts = {}) {
  if (channels.empty()) throw InvalidArgument("no channels given");
  for (std::size_t c = 0; c < channels.size(); ++c) {
    channels[c].validate();
    if (channels[c].points.rows() != channels[0].points.rows() ||
        channels[c].points.cols() != channels[0].points.cols() || channels[c].points != channels[0].points)
      throw InvalidArgument("channel " + std::to_string(c) + " does not share the input points of channel 0");
  }
  auto factor = std::make_shared<const GramFactor>(spec, channels[0].points, jitter);
  std::vector<ChannelFit> out;
  out.reserve(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    Interpolant interp(factor, channels[c].values);
    KappaBound bound = policy.resolve(spec, interp, channels[c]);
    EffectiveKappa keff = effective_kappa(bound, interp, interp.size() + 1);
    opts.channel = static_cast<int>(c);
    ConfidenceBand band = band_over_queries(interp, keff.value, queries, opts);
    out.push_back({std::move(interp), bound, std::move(keff), std::move(band)});
  }
  return out;
}

}  // namespace sgki
