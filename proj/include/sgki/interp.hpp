#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sgki/error.hpp"
#include "sgki/kernel.hpp"

namespace sgki {

/// Observed (input, value) pairs. Inputs live in [0,1]^d and must be pairwise
/// distinct; values are scaled intensities in [-1,1].
struct SampleSet {
  PointSet points;
  Eigen::VectorXd values;

  Eigen::Index size() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }

  void validate() const {
    if (points.rows() == 0) throw InvalidArgument("sample set is empty");
    if (values.size() != points.rows())
      throw ShapeMismatch("sample set has " + std::to_string(points.rows()) + " points but " +
                          std::to_string(values.size()) + " values");
    for (Eigen::Index i = 0; i < values.size(); ++i)
      if (!(std::abs(values[i]) <= 1.0 + 1e-9))
        throw InvalidArgument("sample value " + std::to_string(values[i]) + " at index " + std::to_string(i) +
                              " lies outside [-1, 1]");
    for (Eigen::Index i = 0; i < points.size(); ++i) {
      const double c = points.data()[i];
      if (!(c >= -1e-12 && c <= 1.0 + 1e-12))
        throw InvalidArgument("sample coordinate " + std::to_string(c) + " lies outside [0, 1]");
    }
  }
};

/// Input-only state of a fit: the points, a lexicographic index for exact
/// coincidence lookups, and the Cholesky factor of K + jitter * I. Shared by
/// every interpolant fitted on the same inputs.
class GramFactor {
 public:
  GramFactor(const KernelSpec& spec, PointSet points, double jitter)
      : spec_(spec), points_(std::move(points)), jitter_(jitter) {
    spec_.validate();
    detail::check_dim(spec_, static_cast<std::size_t>(points_.cols()));
    if (points_.rows() == 0) throw InvalidArgument("cannot fit on zero samples");
    if (!(jitter_ >= 0.0)) throw InvalidArgument("jitter must be nonnegative");
    build_index();
    factorize();
  }

  const KernelSpec& spec() const { return spec_; }
  const PointSet& points() const { return points_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return points_.rows(); }

  // Lower-triangular L with L L^T = K + jitter * I.
  const Eigen::MatrixXd& lower() const { return lower_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = b;
    solve_in_place(x);
    return x;
  }

  void solve_in_place(Eigen::VectorXd& b) const {
    lower_.triangularView<Eigen::Lower>().solveInPlace(b);
    lower_.triangularView<Eigen::Lower>().transpose().solveInPlace(b);
  }

  // Explicit (K + jitter I)^-1. O(n^3); only the Schur-inverse path needs it.
  Eigen::MatrixXd inverse() const {
    Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(size(), size());
    lower_.triangularView<Eigen::Lower>().solveInPlace(inv);
    lower_.triangularView<Eigen::Lower>().transpose().solveInPlace(inv);
    return inv;
  }

  // Index of the sample whose coordinates equal x0 exactly.
  std::optional<Eigen::Index> find(PointView x0) const {
    if (x0.size() != static_cast<std::size_t>(points_.cols())) return std::nullopt;
    auto it = std::lower_bound(order_.begin(), order_.end(), x0, [this](Eigen::Index a, PointView b) {
      return lex_less(point_at(points_, a), b);
    });
    if (it != order_.end() && lex_equal(point_at(points_, *it), x0)) return *it;
    return std::nullopt;
  }

 private:
  static bool lex_less(PointView a, PointView b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
  static bool lex_equal(PointView a, PointView b) { return std::equal(a.begin(), a.end(), b.begin(), b.end()); }

  void build_index() {
    order_.resize(static_cast<std::size_t>(points_.rows()));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    std::stable_sort(order_.begin(), order_.end(), [this](Eigen::Index a, Eigen::Index b) {
      return lex_less(point_at(points_, a), point_at(points_, b));
    });
    for (std::size_t k = 1; k < order_.size(); ++k) {
      if (lex_equal(point_at(points_, order_[k - 1]), point_at(points_, order_[k]))) {
        const auto a = static_cast<std::size_t>(std::min(order_[k - 1], order_[k]));
        const auto b = static_cast<std::size_t>(std::max(order_[k - 1], order_[k]));
        throw DuplicateInput(a, b);
      }
    }
  }

  void factorize() {
    lower_ = gram(spec_, points_);
    if (jitter_ > 0.0) lower_.diagonal().array() += jitter_;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(lower_);
    if (llt.info() != Eigen::Success) throw ConditioningError(failing_pivot(), jitter_);
    lower_.triangularView<Eigen::StrictlyUpper>().setZero();
  }

  // Unblocked rerun to name the first non-positive pivot. Failure path only.
  std::size_t failing_pivot() const {
    Eigen::MatrixXd a = gram(spec_, points_);
    if (jitter_ > 0.0) a.diagonal().array() += jitter_;
    const Eigen::Index n = a.rows();
    for (Eigen::Index k = 0; k < n; ++k) {
      double d = a(k, k) - a.row(k).head(k).squaredNorm();
      if (!(d > 0.0)) return static_cast<std::size_t>(k);
      d = std::sqrt(d);
      a(k, k) = d;
      for (Eigen::Index i = k + 1; i < n; ++i) a(i, k) = (a(i, k) - a.row(i).head(k).dot(a.row(k).head(k))) / d;
    }
    return static_cast<std::size_t>(n - 1);
  }

  KernelSpec spec_;
  PointSet points_;
  double jitter_;
  Eigen::MatrixXd lower_;
  std::vector<Eigen::Index> order_;
};

/// Minimum-norm interpolant f(x) = sum_k alpha_k k(x, x_k) with alpha = K^-1 y.
/// Immutable after construction; all queries are const and thread-safe.
class Interpolant {
 public:
  Interpolant(std::shared_ptr<const GramFactor> factor, Eigen::VectorXd values)
      : factor_(std::move(factor)), values_(std::move(values)) {
    if (values_.size() != factor_->size())
      throw ShapeMismatch("value count " + std::to_string(values_.size()) + " does not match " +
                          std::to_string(factor_->size()) + " fitted inputs");
    alpha_ = factor_->solve(values_);
    norm_sq_ = std::max(0.0, values_.dot(alpha_));
  }

  /// Same inputs, new outputs; reuses the factorization.
  Interpolant with_values(Eigen::VectorXd values) const { return Interpolant(factor_, std::move(values)); }

  double predict(PointView x0) const {
    const KernelSpec& spec = factor_->spec();
    detail::check_dim(spec, x0.size());
    const PointSet& pts = factor_->points();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < pts.rows(); ++k)
      acc += alpha_[k] * detail::eval_unchecked(spec, x0.data(), pts.data() + k * pts.cols());
    return acc;
  }

  // y^T K^-1 y, the squared RKHS norm of the interpolant.
  double norm_sq() const { return norm_sq_; }

  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::VectorXd& values() const { return values_; }
  const PointSet& points() const { return factor_->points(); }
  const KernelSpec& spec() const { return factor_->spec(); }
  double jitter() const { return factor_->jitter(); }
  Eigen::Index size() const { return factor_->size(); }
  const GramFactor& factor() const { return *factor_; }
  std::shared_ptr<const GramFactor> shared_factor() const { return factor_; }

  std::optional<Eigen::Index> find_sample(PointView x0) const { return factor_->find(x0); }

 private:
  std::shared_ptr<const GramFactor> factor_;
  Eigen::VectorXd values_;
  Eigen::VectorXd alpha_;
  double norm_sq_ = 0.0;
};

inline Interpolant fit(const KernelSpec& spec, const SampleSet& samples, double jitter = 0.0) {
  samples.validate();
  auto factor = std::make_shared<const GramFactor>(spec, samples.points, jitter);
  return Interpolant(std::move(factor), samples.values);
}

}  // namespace sgki
