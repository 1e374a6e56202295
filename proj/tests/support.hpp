#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "sgki/imaging.hpp"
#include "sgki/interp.hpp"
#include "sgki/kernel.hpp"

namespace sgki::test {

// Random distinct points in [0,1]^d, rejecting pairs closer than min_sep.
inline PointSet random_points(std::mt19937_64& rng, Eigen::Index n, int d = 2, double min_sep = 0.02) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointSet pts(n, d);
  Eigen::Index filled = 0;
  while (filled < n) {
    for (int j = 0; j < d; ++j) pts(filled, j) = unit(rng);
    bool ok = true;
    for (Eigen::Index k = 0; k < filled && ok; ++k) ok = (pts.row(k) - pts.row(filled)).norm() >= min_sep;
    if (ok) ++filled;
  }
  return pts;
}

inline SampleSet random_samples(std::mt19937_64& rng, Eigen::Index n, int d = 2, double min_sep = 0.02) {
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  SampleSet s;
  s.points = random_points(rng, n, d, min_sep);
  s.values.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) s.values[k] = sym(rng);
  return s;
}

// Well-conditioned default kernels for random instances.
inline KernelSpec test_pw() { return KernelSpec::paley_wiener(20.0); }
inline KernelSpec test_gauss() { return KernelSpec::gaussian(0.1); }

inline std::vector<double> point(double a, double b) { return {a, b}; }

}  // namespace sgki::test
