#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sgki/uq.hpp"
#include "support.hpp"

namespace sgki {
namespace {

using test::point;

SampleSet single(double a, double b, double y) {
  SampleSet s;
  s.points.resize(1, 2);
  s.points << a, b;
  s.values.resize(1);
  s.values << y;
  return s;
}

KappaBound manual(double kappa, bool literal = false) {
  KappaBound b;
  b.mode = KappaMode::Manual;
  b.kappa = kappa;
  b.literal_alg1 = literal;
  return b;
}

// ---- kappa ---------------------------------------------------------------

TEST(Kappa, WorkedExample) {
  SampleSet s;
  s.points = PointSet::Zero(100, 2);
  s.values = Eigen::VectorXd::Constant(100, 0.5);  // mean y^2 = 0.25
  const KappaBound b = estimate_kappa_pw(s, 0.05, 0.01, 0.0);
  const double expected = 0.25 + std::sqrt(-std::log(0.05) / 200.0) + 0.01;
  EXPECT_NEAR(b.kappa, expected, 1e-15);
  EXPECT_NEAR(b.kappa, 0.3823873, 1e-7);
  EXPECT_EQ(b.mode, KappaMode::EstimatePW);
}

TEST(Kappa, ConcentrationTerm) {
  SampleSet s;
  s.points = PointSet::Zero(50, 2);
  s.values = Eigen::VectorXd::Zero(50);
  EXPECT_NEAR(estimate_kappa_pw(s, std::exp(-1.0)).kappa, 0.1, 1e-15);
  EXPECT_NEAR(estimate_kappa_pw(s, std::exp(-1.0), 0.0, 0.2).kappa, 0.3, 1e-15);
  // gamma close to 1 drives the bound to zero for zero data.
  EXPECT_LT(estimate_kappa_pw(s, 1.0 - 1e-12).kappa, 1e-6);
}

TEST(Kappa, RejectsBadArguments) {
  SampleSet s = single(0.5, 0.5, 0.2);
  EXPECT_THROW(estimate_kappa_pw(s, 0.0), InvalidArgument);
  EXPECT_THROW(estimate_kappa_pw(s, 1.0), InvalidArgument);
  EXPECT_THROW(estimate_kappa_pw(s, 0.1, -0.1), InvalidArgument);
  EXPECT_THROW(estimate_kappa_pw(KernelSpec::gaussian(0.1), s, 0.1), InvalidArgument);
  EXPECT_NO_THROW(estimate_kappa_pw(KernelSpec::paley_wiener(5.0), s, 0.1));
}

TEST(EffectiveKappa, ManualAboveNorm) {
  const Interpolant f = fit(KernelSpec::gaussian(0.05), single(0.5, 0.5, 0.8));
  const EffectiveKappa k = effective_kappa(manual(1.0), f, 2);
  EXPECT_EQ(k.value, 1.0);
  EXPECT_FALSE(k.floored);
}

TEST(EffectiveKappa, FloorsAtNormWithWarning) {
  const Interpolant f = fit(KernelSpec::gaussian(0.05), single(0.5, 0.5, 0.8));
  const EffectiveKappa k = effective_kappa(manual(0.1), f, 2);
  EXPECT_DOUBLE_EQ(k.value, 0.64);
  EXPECT_TRUE(k.floored);
  EXPECT_FALSE(k.warning.empty());
}

TEST(EffectiveKappa, LiteralAlgorithmScaling) {
  const Interpolant f = fit(KernelSpec::gaussian(0.05), single(0.5, 0.5, 0.1));
  EXPECT_NEAR(effective_kappa(manual(0.38, true), f, 101).value, 38.38, 1e-12);
  EXPECT_NEAR(effective_kappa(manual(0.38, false), f, 101).value, 0.38, 1e-15);
}

TEST(EffectiveKappa, NormFloorMode) {
  const Interpolant f = fit(KernelSpec::gaussian(0.05), single(0.5, 0.5, 0.8));
  KappaBound b;
  b.mode = KappaMode::NormFloor;
  b.kappa = 0.0;
  EXPECT_NO_THROW(b.validate());
  EXPECT_DOUBLE_EQ(effective_kappa(b, f, 2).value, 0.64);
}

// ---- Schur extension -----------------------------------------------------

TEST(Schur, SingleGaussianSampleByHand) {
  const double y1 = 0.6;
  const Interpolant f = fit(KernelSpec::gaussian(0.05), single(0.3, 0.3, y1));
  const auto x0 = point(0.33, 0.34);
  const double c = std::exp(-(0.03 * 0.03 + 0.04 * 0.04) / (2 * 0.05 * 0.05));
  const SchurExtension ext = schur_extend(f, x0);
  EXPECT_NEAR(ext.g0, 1.0 - c * c, 1e-14);
  EXPECT_NEAR(ext.mean, c * y1, 1e-14);
  // Extended norm for the 2x2 system.
  const double y0 = -0.2;
  const double by_hand = y1 * y1 + (y0 - c * y1) * (y0 - c * y1) / (1.0 - c * c);
  EXPECT_NEAR(extended_norm_sq(f, x0, y0), by_hand, 1e-12);
}

TEST(Schur, DecoupledQuery) {
  const Interpolant f = fit(KernelSpec::gaussian(0.01), single(0.0, 0.0, 0.7));
  const SchurExtension ext = schur_extend(f, point(1.0, 1.0));
  EXPECT_NEAR(ext.g0, 1.0, 1e-15);
  EXPECT_NEAR(ext.mean, 0.0, 1e-15);
  const Eigen::MatrixXd inv = extended_inverse(f, point(1.0, 1.0));
  EXPECT_NEAR(inv(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(inv(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(inv(1, 1), 1.0, 1e-15);
}

TEST(Schur, DeterminantRatioOracle) {
  std::mt19937_64 rng(31);
  for (const KernelSpec& spec : {test::test_pw(), test::test_gauss()}) {
    const SampleSet s = test::random_samples(rng, 20);
    const Interpolant f = fit(spec, s);
    const auto x0 = point(0.41, 0.59);
    PointSet ext(21, 2);
    ext.row(0) << 0.41, 0.59;
    ext.bottomRows(20) = s.points;
    // log-determinants via LDLT keep the ratio accurate.
    const auto logdet = [](const Eigen::MatrixXd& m) {
      return m.ldlt().vectorD().array().log().sum();
    };
    const double ratio = std::exp(logdet(gram(spec, ext)) - logdet(gram(spec, s.points)));
    EXPECT_NEAR(schur_extend(f, x0).g0 / ratio, 1.0, 1e-8);
  }
}

TEST(Schur, ExtendedInverseMatchesDenseInverse) {
  std::mt19937_64 rng(37);
  for (Eigen::Index n : {5, 20, 40}) {
    const SampleSet s = test::random_samples(rng, n);
    const Interpolant f = fit(test::test_pw(), s);
    const auto x0 = point(0.123, 0.456);
    PointSet ext(n + 1, 2);
    ext.row(0) << 0.123, 0.456;
    ext.bottomRows(n) = s.points;
    const Eigen::MatrixXd k0 = gram(test::test_pw(), ext);
    const Eigen::MatrixXd dense = k0.inverse();
    const Eigen::MatrixXd schur = extended_inverse(f, x0);
    EXPECT_LE((schur - dense).cwiseAbs().maxCoeff(), 1e-8 * dense.cwiseAbs().maxCoeff()) << n;
    EXPECT_LE((k0 * schur - Eigen::MatrixXd::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff(), 1e-8) << n;
    EXPECT_NEAR(schur(0, 0), 1.0 / schur_extend(f, x0).g0, 1e-12 * schur(0, 0));
  }
}

TEST(Schur, ExtendedNormMatchesExplicitQuadraticForm) {
  std::mt19937_64 rng(41);
  const SampleSet s = test::random_samples(rng, 30);
  const Interpolant f = fit(test::test_gauss(), s);
  const auto x0 = point(0.71, 0.18);
  const Eigen::MatrixXd inv = extended_inverse(f, x0);
  for (double y0 : {-0.9, 0.0, 0.35}) {
    Eigen::VectorXd yt(31);
    yt << y0, s.values;
    EXPECT_NEAR(extended_norm_sq(f, x0, y0) / yt.dot(inv * yt), 1.0, 1e-9);
  }
  // The minimum over y0 is the interpolant norm, attained at the prediction.
  EXPECT_NEAR(extended_norm_sq(f, x0, f.predict(x0)), f.norm_sq(), 1e-12 * f.norm_sq());
}

TEST(Schur, CoincidentQueryIsRejected) {
  std::mt19937_64 rng(43);
  const SampleSet s = test::random_samples(rng, 10);
  const Interpolant f = fit(test::test_pw(), s);
  EXPECT_THROW(schur_extend(f, point_at(s.points, 2)), NearDuplicateQuery);
}

// ---- intervals -----------------------------------------------------------

TEST(Interval, CoincidentQueryIsDegenerate) {
  std::mt19937_64 rng(47);
  const SampleSet s = test::random_samples(rng, 10);
  const Interpolant f = fit(test::test_pw(), s);
  const Interval iv = confidence_interval(f, f.norm_sq() + 1.0, point_at(s.points, 7));
  EXPECT_TRUE(iv.degenerate);
  EXPECT_EQ(iv.lower, s.values[7]);
  EXPECT_EQ(iv.upper, s.values[7]);
  EXPECT_EQ(iv.estimate, s.values[7]);
}

TEST(Interval, KappaAtNormGivesZeroWidth) {
  std::mt19937_64 rng(53);
  const SampleSet s = test::random_samples(rng, 15);
  const Interpolant f = fit(test::test_gauss(), s);
  const Interval iv = confidence_interval(f, f.norm_sq(), point(0.5, 0.52));
  EXPECT_EQ(iv.width(), 0.0);
  EXPECT_NEAR(iv.estimate, f.predict(point(0.5, 0.52)), 1e-12);
}

TEST(Interval, DecoupledGaussianByHand) {
  const Interpolant f = fit(KernelSpec::gaussian(0.05), single(0.0, 0.0, 0.5));
  const Interval iv = confidence_interval(f, 1.0, point(0.5, 0.5));
  EXPECT_NEAR(iv.lower, -std::sqrt(0.75), 1e-12);
  EXPECT_NEAR(iv.upper, std::sqrt(0.75), 1e-12);
  EXPECT_NEAR(iv.lower, -0.8660, 1e-4);
}

TEST(Interval, InfeasibleKappaThrows) {
  const Interpolant f = fit(KernelSpec::gaussian(0.05), single(0.0, 0.0, 0.5));
  EXPECT_THROW(confidence_interval(f, 0.1, point(0.5, 0.5)), Infeasible);
}

TEST(Interval, QuadraticRootsMatchClosedForm) {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const SampleSet s = test::random_samples(rng, 25);
    const Interpolant f = fit(trial % 2 ? test::test_pw() : test::test_gauss(), s);
    const double kappa = f.norm_sq() * (1.0 + 3.0 * unit(rng)) + 0.1;
    const Eigen::MatrixXd kinv = f.factor().inverse();
    const auto x0 = point(unit(rng), unit(rng));
    const Interval a = confidence_interval(f, kappa, x0);
    const Interval b = quadratic_interval(f, kappa, x0, kinv);
    const double scale = std::max(1.0, a.width());
    EXPECT_NEAR(a.lower, b.lower, 1e-9 * scale);
    EXPECT_NEAR(a.upper, b.upper, 1e-9 * scale);
  }
}

TEST(Interval, MembershipMatchesEndpoints) {
  std::mt19937_64 rng(61);
  const SampleSet s = test::random_samples(rng, 20);
  const Interpolant f = fit(test::test_pw(), s);
  const double kappa = 2.0 * f.norm_sq() + 0.5;
  const auto x0 = point(0.25, 0.8);
  const Interval iv = confidence_interval(f, kappa, x0);
  const double half = 0.5 * iv.width();
  EXPECT_TRUE(membership_test(f, kappa, x0, iv.estimate));
  EXPECT_TRUE(membership_test(f, kappa, x0, iv.estimate + (1 - 1e-6) * half));
  EXPECT_TRUE(membership_test(f, kappa, x0, iv.estimate - (1 - 1e-6) * half));
  EXPECT_FALSE(membership_test(f, kappa, x0, iv.estimate + (1 + 1e-6) * half));
  EXPECT_FALSE(membership_test(f, kappa, x0, iv.estimate - (1 + 1e-6) * half));
  // Sample points accept only their observed value.
  EXPECT_TRUE(membership_test(f, kappa, point_at(s.points, 0), s.values[0]));
  EXPECT_FALSE(membership_test(f, kappa, point_at(s.points, 0), s.values[0] + 1e-6));
}

TEST(Interval, MonotoneInKappa) {
  std::mt19937_64 rng(67);
  const SampleSet s = test::random_samples(rng, 20);
  const Interpolant f = fit(test::test_gauss(), s);
  const PointSet q = test::random_points(rng, 30, 2, 0.0);
  const ConfidenceBand narrow = band_over_queries(f, f.norm_sq() + 0.1, q);
  const ConfidenceBand wide = band_over_queries(f, f.norm_sq() + 0.5, q);
  for (std::size_t k = 0; k < 30; ++k) {
    EXPECT_LE(wide.intervals[k].lower, narrow.intervals[k].lower);
    EXPECT_GE(wide.intervals[k].upper, narrow.intervals[k].upper);
  }
}

// ---- bands ---------------------------------------------------------------

TEST(Band, EmptyQueries) {
  std::mt19937_64 rng(71);
  const Interpolant f = fit(test::test_pw(), test::random_samples(rng, 5));
  const ConfidenceBand band = band_over_queries(f, f.norm_sq() + 1.0, PointSet(0, 2));
  EXPECT_TRUE(band.intervals.empty());
  EXPECT_TRUE(band.errors.empty());
}

TEST(Band, SamplePointsAreDegenerate) {
  std::mt19937_64 rng(73);
  const SampleSet s = test::random_samples(rng, 12);
  const Interpolant f = fit(test::test_pw(), s);
  const ConfidenceBand band = band_over_queries(f, f.norm_sq() + 1.0, s.points);
  for (std::size_t k = 0; k < 12; ++k) {
    EXPECT_TRUE(band.intervals[k].degenerate);
    EXPECT_EQ(band.intervals[k].estimate, s.values[static_cast<Eigen::Index>(k)]);
  }
}

TEST(Band, ParallelEqualsSequential) {
  std::mt19937_64 rng(79);
  const SampleSet s = test::random_samples(rng, 30);
  const Interpolant f = fit(test::test_pw(), s);
  PointSet grid(100, 2);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) grid.row(i * 10 + j) << (i + 1) / 11.0, (j + 1) / 11.0;
  const double kappa = f.norm_sq() + 0.3;
  BandOptions opts;
  opts.threads = 4;
  const ConfidenceBand band = band_over_queries(f, kappa, grid, opts);
  ASSERT_EQ(band.intervals.size(), 100u);
  for (Eigen::Index q = 0; q < 100; ++q) {
    const Interval seq = confidence_interval(f, kappa, point_at(grid, q));
    EXPECT_EQ(band.intervals[q].lower, seq.lower);
    EXPECT_EQ(band.intervals[q].upper, seq.upper);
    EXPECT_EQ(band.intervals[q].estimate, seq.estimate);
  }
}

TEST(Band, WidthLawAndContainment) {
  std::mt19937_64 rng(83);
  const SampleSet s = test::random_samples(rng, 40);
  const Interpolant f = fit(test::test_pw(), s);
  const double kappa = f.norm_sq() + 0.7;
  const ConfidenceBand band = band_over_queries(f, kappa, test::random_points(rng, 50, 2, 0.0));
  for (const Interval& iv : band.intervals) {
    EXPECT_LE(iv.lower, iv.estimate);
    EXPECT_LE(iv.estimate, iv.upper);
    EXPECT_NEAR(0.5 * (iv.lower + iv.upper), iv.estimate, 1e-9 * std::max(1.0, std::abs(iv.estimate)));
    const double c = iv.width() * iv.width() / (4.0 * iv.g0);
    EXPECT_NEAR(c / (kappa - f.norm_sq()), 1.0, 1e-8);
  }
}

TEST(Band, ErrorsAreCollectedUnlessStrict) {
  const Interpolant f = fit(KernelSpec::gaussian(0.05), single(0.5, 0.5, 0.5));
  PointSet q(2, 2);
  q << 0.1, 0.1, 0.5 + 1e-10, 0.5;  // second query nearly coincides with the sample
  const ConfidenceBand band = band_over_queries(f, 1.0, q);
  ASSERT_EQ(band.errors.size(), 1u);
  EXPECT_EQ(band.errors[0].index, 1u);
  EXPECT_TRUE(std::isnan(band.intervals[1].lower));
  EXPECT_TRUE(std::isfinite(band.intervals[0].lower));
  BandOptions strict;
  strict.strict = true;
  EXPECT_THROW(band_over_queries(f, 1.0, q, strict), NearDuplicateQuery);
}

TEST(Multichannel, GrayscaleMatchesSingleBand) {
  std::mt19937_64 rng(89);
  const SampleSet s = test::random_samples(rng, 25);
  const PointSet q = test::random_points(rng, 20, 2, 0.0);
  KappaPolicy policy;
  const auto fits = multichannel_band(test::test_pw(), {s}, policy, q);
  ASSERT_EQ(fits.size(), 1u);
  const Interpolant f = fit(test::test_pw(), s);
  const double keff = effective_kappa(estimate_kappa_pw(s, 0.1), f, 26).value;
  const ConfidenceBand band = band_over_queries(f, keff, q);
  EXPECT_EQ(fits[0].band.kappa_used, keff);
  for (std::size_t k = 0; k < 20; ++k) {
    EXPECT_EQ(fits[0].band.intervals[k].lower, band.intervals[k].lower);
    EXPECT_EQ(fits[0].band.intervals[k].upper, band.intervals[k].upper);
  }
}

TEST(Multichannel, ChannelsMatchIndependentFits) {
  std::mt19937_64 rng(97);
  const SampleSet r = test::random_samples(rng, 30);
  SampleSet g = r;
  SampleSet b = r;
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  for (Eigen::Index k = 0; k < 30; ++k) {
    g.values[k] = sym(rng);
    b.values[k] = sym(rng);
  }
  const PointSet q = test::random_points(rng, 15, 2, 0.0);
  const auto fits = multichannel_band(test::test_pw(), {r, g, b, r}, KappaPolicy{}, q);
  ASSERT_EQ(fits.size(), 4u);
  EXPECT_EQ(&fits[0].interp.factor(), &fits[2].interp.factor());
  const SampleSet* channels[] = {&r, &g, &b};
  for (int c = 0; c < 3; ++c) {
    const auto solo = multichannel_band(test::test_pw(), {*channels[c]}, KappaPolicy{}, q);
    for (std::size_t k = 0; k < 15; ++k) {
      EXPECT_NEAR(fits[c].band.intervals[k].lower, solo[0].band.intervals[k].lower, 1e-12);
      EXPECT_NEAR(fits[c].band.intervals[k].upper, solo[0].band.intervals[k].upper, 1e-12);
    }
  }
  // Identical channels give identical bands.
  for (std::size_t k = 0; k < 15; ++k) EXPECT_EQ(fits[0].band.intervals[k].lower, fits[3].band.intervals[k].lower);
}

TEST(Multichannel, RejectsMismatchedInputs) {
  std::mt19937_64 rng(101);
  const SampleSet a = test::random_samples(rng, 10);
  const SampleSet b = test::random_samples(rng, 10);
  EXPECT_THROW(multichannel_band(test::test_pw(), {a, b}, KappaPolicy{}, PointSet(0, 2)), InvalidArgument);
  EXPECT_THROW(multichannel_band(test::test_pw(), {}, KappaPolicy{}, PointSet(0, 2)), InvalidArgument);
}

TEST(KappaPolicy, ManualAndNormFloor) {
  std::mt19937_64 rng(103);
  const SampleSet s = test::random_samples(rng, 10);
  const Interpolant f = fit(test::test_gauss(), s);
  KappaPolicy p;
  p.mode = KappaMode::Manual;
  p.manual = 42.0;
  EXPECT_EQ(p.resolve(test::test_gauss(), f, s).kappa, 42.0);
  p.manual = 0.0;
  EXPECT_THROW(p.resolve(test::test_gauss(), f, s), InvalidArgument);
  p.mode = KappaMode::NormFloor;
  EXPECT_EQ(p.resolve(test::test_gauss(), f, s).kappa, f.norm_sq());
  p.mode = KappaMode::EstimatePW;
  EXPECT_THROW(p.resolve(test::test_gauss(), f, s), InvalidArgument);
}

}  // namespace
}  // namespace sgki
