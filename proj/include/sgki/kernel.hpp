#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "sgki/error.hpp"

namespace sgki {

// n points of dimension d, one point per row.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PointView = std::span<const double>;

inline PointView point_at(const PointSet& points, Eigen::Index i) {
  return {points.data() + i * points.cols(), static_cast<std::size_t>(points.cols())};
}

enum class KernelKind { PaleyWiener, Gaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::PaleyWiener;
  double eta = 50.0;    // PW frequency bound
  double sigma = 0.05;  // Gaussian bandwidth, in domain units
  int dim = 2;

  static KernelSpec paley_wiener(double eta, int dim = 2) {
    KernelSpec s;
    s.kind = KernelKind::PaleyWiener;
    s.eta = eta;
    s.dim = dim;
    s.validate();
    return s;
  }

  static KernelSpec gaussian(double sigma, int dim = 2) {
    KernelSpec s;
    s.kind = KernelKind::Gaussian;
    s.sigma = sigma;
    s.dim = dim;
    s.validate();
    return s;
  }

  void validate() const {
    if (dim < 1) throw InvalidArgument("kernel dimension must be positive");
    if (kind == KernelKind::PaleyWiener && !(eta > 0.0))
      throw InvalidArgument("Paley-Wiener kernel needs eta > 0");
    if (kind == KernelKind::Gaussian && !(sigma > 0.0))
      throw InvalidArgument("Gaussian kernel needs sigma > 0");
  }

  // k(u, u); the same for every u since both kernels are translation invariant.
  double diagonal() const {
    if (kind == KernelKind::Gaussian) return 1.0;
    return std::pow(eta / std::numbers::pi, dim);
  }

  std::string describe() const {
    if (kind == KernelKind::Gaussian) return "gauss(sigma=" + std::to_string(sigma) + ")";
    return "pw(eta=" + std::to_string(eta) + ")";
  }
};

namespace detail {

// sin(eta * delta) / delta with its removable singularity filled in.
inline double sinc_factor(double eta, double delta) {
  if (delta == 0.0) return eta;
  if (std::abs(delta) < 1e-8) {
    const double t = eta * delta;
    return eta * (1.0 - t * t / 6.0);
  }
  return std::sin(eta * delta) / delta;
}

inline double eval_unchecked(const KernelSpec& spec, const double* u, const double* v) {
  if (spec.kind == KernelKind::Gaussian) {
    double sq = 0.0;
    for (int j = 0; j < spec.dim; ++j) {
      const double d = u[j] - v[j];
      sq += d * d;
    }
    return std::exp(-sq / (2.0 * spec.sigma * spec.sigma));
  }
  double prod = 1.0;
  for (int j = 0; j < spec.dim; ++j) prod *= sinc_factor(spec.eta, u[j] - v[j]) / std::numbers::pi;
  return prod;
}

inline void check_dim(const KernelSpec& spec, std::size_t d) {
  if (d != static_cast<std::size_t>(spec.dim))
    throw InvalidArgument("point dimension " + std::to_string(d) + " does not match kernel dimension " +
                          std::to_string(spec.dim));
}

}  // namespace detail

/// Evaluates the kernel at (u, v).
///
/// Paley-Wiener: pi^-d * prod_j sin(eta (u_j - v_j)) / (u_j - v_j), each factor
/// taking the value eta at a zero difference.
/// Gaussian: exp(-|u - v|^2 / (2 sigma^2)).
inline double eval_kernel(const KernelSpec& spec, PointView u, PointView v) {
  detail::check_dim(spec, u.size());
  detail::check_dim(spec, v.size());
  return detail::eval_unchecked(spec, u.data(), v.data());
}

/// Gram matrix of the kernel over `points`. The upper triangle is evaluated and
/// mirrored so the result is exactly symmetric.
inline Eigen::MatrixXd gram(const KernelSpec& spec, const PointSet& points) {
  detail::check_dim(spec, static_cast<std::size_t>(points.cols()));
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* pj = points.data() + j * points.cols();
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = detail::eval_unchecked(spec, points.data() + i * points.cols(), pj);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

struct CrossKernel {
  double r0 = 0.0;     // k(x0, x0)
  Eigen::VectorXd k0;  // k(x0, x_i)
};

inline CrossKernel cross_kernel(const KernelSpec& spec, PointView x0, const PointSet& points) {
  detail::check_dim(spec, x0.size());
  detail::check_dim(spec, static_cast<std::size_t>(points.cols()));
  CrossKernel out;
  out.r0 = detail::eval_unchecked(spec, x0.data(), x0.data());
  out.k0.resize(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    out.k0[i] = detail::eval_unchecked(spec, x0.data(), points.data() + i * points.cols());
  return out;
}

}  // namespace sgki
