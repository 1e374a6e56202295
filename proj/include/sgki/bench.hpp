#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgki/baselines.hpp"
#include "sgki/imaging.hpp"
#include "sgki/interp.hpp"
#include "sgki/metrics.hpp"
#include "sgki/pipeline.hpp"
#include "sgki/uq.hpp"

namespace sgki {

/// A rectangular table of preformatted cells. CSV and markdown renderings
/// carry exactly the same cells.
struct Table {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw InvalidArgument("table row has the wrong number of cells");
    rows.push_back(std::move(row));
  }

  std::string to_csv() const {
    std::string out = "# schema: " + schema + "\n";
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) out += (k ? "," : "") + cells[k];
      out += '\n';
    };
    line(columns);
    for (const auto& r : rows) line(r);
    return out;
  }

  std::string to_markdown() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      out += '|';
      for (const auto& c : cells) out += ' ' + c + " |";
      out += '\n';
    };
    line(columns);
    out += '|';
    for (std::size_t k = 0; k < columns.size(); ++k) out += " --- |";
    out += '\n';
    for (const auto& r : rows) line(r);
    return out;
  }
};

inline std::string format_cell(double v, int digits = 4) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct BenchOptions {
  int count = 0;  // corpus size; 0 picks the suite default
  std::uint64_t seed = 1;
  unsigned threads = 0;
  MetricScale scale = MetricScale::Raw;
  double eta_truth = 50.0;
  double eta_fit = 50.0;
  double gamma = 0.1;
  // Absolute jitter. When unset, jitter_rel times the kernel diagonal is used.
  std::optional<double> jitter;
  double jitter_rel = 1e-10;
  // Round synthetic images to 8 bits before fitting, as a synth -> PGM -> fit
  // pipeline would. Truth comparisons are always against the unrounded truth.
  bool quantize_inputs = false;

  double jitter_for(const KernelSpec& spec) const { return jitter.value_or(jitter_rel * spec.diagonal()); }
};

/// Averages of one method over a corpus. Averages include infinite PSNR
/// values, so a single exact reconstruction makes the PSNR average infinite.
struct MethodSummary {
  std::string method;
  int runs = 0;
  double psnr = 0.0;
  double ssim = 0.0;
  double nrmse = 0.0;
  int infinite_psnr = 0;

  void add(const MetricReport& r) {
    psnr += r.psnr;
    ssim += r.ssim;
    nrmse += r.nrmse;
    infinite_psnr += r.psnr_infinite ? 1 : 0;
    ++runs;
  }

  MethodSummary averaged() const {
    MethodSummary m = *this;
    if (runs > 0) {
      m.psnr /= runs;
      m.ssim /= runs;
      m.nrmse /= runs;
    }
    return m;
  }
};

namespace detail {

// SplitMix64 finalizer; gives each corpus item an independent seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline Image maybe_quantize(const Image& norm, bool quantize) {
  return quantize ? normalize(denormalize(norm, true)) : norm;
}

inline Table method_table(const std::vector<MethodSummary>& methods, MetricScale scale, const std::string& schema) {
  Table t;
  t.schema = schema;
  t.columns = {"method", "runs", "psnr", "ssim", "nrmse", "infinite_psnr", "scale"};
  for (const MethodSummary& m : methods)
    t.add({m.method, std::to_string(m.runs), format_cell(m.psnr), format_cell(m.ssim), format_cell(m.nrmse),
           std::to_string(m.infinite_psnr), to_string(scale)});
  return t;
}

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Inpainting on synthetic band-limited images.

struct InpaintSynthResult {
  MethodSummary sgki;
  int covered_runs = 0;  // runs whose band contains the truth at every missing pixel
  double mean_width = 0.0;
  Table table;
};

inline InpaintSynthResult bench_inpaint_synth(const BenchOptions& opts, int r = 50, double observed = 0.1) {
  const int count = opts.count > 0 ? opts.count : 100;
  RunConfig config;
  config.kernel = KernelSpec::paley_wiener(opts.eta_fit);
  config.gamma = opts.gamma;
  config.jitter = opts.jitter_for(config.kernel);
  config.threads = opts.threads;

  InpaintSynthResult res;
  res.sgki.method = "sgki-pw";
  double width_sum = 0.0;
  std::size_t width_n = 0;
  for (int k = 0; k < count; ++k) {
    const std::uint64_t s = detail::mix_seed(opts.seed, static_cast<std::uint64_t>(k));
    const SyntheticImage synth = synth_pw_image(opts.eta_truth, r, 20, s);
    const Mask mask = random_mask(r, r, observed, detail::mix_seed(s, 1));
    const Reconstruction rec = inpaint(config, detail::maybe_quantize(synth.image, opts.quantize_inputs), mask);
    res.sgki.add(evaluate(synth.image, rec.estimate, opts.scale));

    bool covered = true;
    const ConfidenceBand& band = rec.channels[0].band;
    for (std::size_t q = 0; q < rec.query_pixels.size(); ++q) {
      const auto [i, j] = rec.query_pixels[q];
      const double truth = synth.image.at(i, j);
      const Interval& iv = band.intervals[q];
      if (!(iv.lower <= truth && truth <= iv.upper)) covered = false;
      width_sum += iv.width();
      ++width_n;
    }
    res.covered_runs += covered ? 1 : 0;
  }
  res.sgki = res.sgki.averaged();
  res.mean_width = width_n ? width_sum / static_cast<double>(width_n) : 0.0;
  res.table = detail::method_table({res.sgki}, opts.scale, "sgki.bench.inpaint.v1");
  res.table.columns.push_back("coverage");
  res.table.columns.push_back("mean_width");
  res.table.rows[0].push_back(format_cell(static_cast<double>(res.covered_runs) / count));
  res.table.rows[0].push_back(format_cell(res.mean_width, 6));
  return res;
}

// ---------------------------------------------------------------------------
// Super-resolution: synthesize at full size, subsample, upsample back.

struct SuperresSynthResult {
  MethodSummary aligned;
  MethodSummary own_grid;
  MethodSummary nearest;
  MethodSummary bilinear;
  MethodSummary bicubic;
  Table table;
};

inline SuperresSynthResult bench_superres_synth(const BenchOptions& opts, int r = 100, int scale = 2,
                                                bool with_own_grid = true) {
  const int count = opts.count > 0 ? opts.count : 20;
  if (r % scale != 0) throw InvalidArgument("resolution must be divisible by the scale");
  RunConfig config;
  config.kernel = KernelSpec::paley_wiener(opts.eta_fit);
  config.gamma = opts.gamma;
  config.jitter = opts.jitter_for(config.kernel);
  config.threads = opts.threads;
  config.scale = scale;
  config.with_bands = false;

  SuperresSynthResult res;
  res.aligned.method = "sgki-pw-aligned";
  res.own_grid.method = "sgki-pw-own-grid";
  res.nearest.method = "nearest";
  res.bilinear.method = "bilinear";
  res.bicubic.method = "bicubic";
  for (int k = 0; k < count; ++k) {
    const std::uint64_t s = detail::mix_seed(opts.seed, static_cast<std::uint64_t>(k));
    const SyntheticImage synth = synth_pw_image(opts.eta_truth, r, 20, s);
    const Image low = detail::maybe_quantize(subsample(synth.image, scale), opts.quantize_inputs);

    config.placement = Placement::Aligned;
    res.aligned.add(evaluate(synth.image, superres(config, low).estimate, opts.scale));
    if (with_own_grid) {
      config.placement = Placement::OwnGrid;
      res.own_grid.add(evaluate(synth.image, superres(config, low).estimate, opts.scale));
    }
    // Classical upsamplers work on 8-bit data.
    const Image low_raw = denormalize(low, true);
    res.nearest.add(evaluate(synth.image, upsample_nearest(low_raw, scale), opts.scale));
    res.bilinear.add(evaluate(synth.image, upsample_bilinear(low_raw, scale), opts.scale));
    res.bicubic.add(evaluate(synth.image, upsample_bicubic(low_raw, scale), opts.scale));
  }
  std::vector<MethodSummary> rows = {res.aligned.averaged()};
  if (with_own_grid) rows.push_back(res.own_grid.averaged());
  rows.push_back(res.nearest.averaged());
  rows.push_back(res.bilinear.averaged());
  rows.push_back(res.bicubic.averaged());
  res.aligned = res.aligned.averaged();
  res.own_grid = res.own_grid.averaged();
  res.nearest = res.nearest.averaged();
  res.bilinear = res.bilinear.averaged();
  res.bicubic = res.bicubic.averaged();
  res.table = detail::method_table(rows, opts.scale, "sgki.bench.superres.v1");
  return res;
}

// ---------------------------------------------------------------------------
// Robustness of the fitted bandwidth against the truth's bandwidth.

struct EtaSweepResult {
  std::vector<double> etas;
  std::vector<MethodSummary> summaries;  // one per eta, in order
  Table table;
};

inline EtaSweepResult bench_eta_sweep(const BenchOptions& opts,
                                      const std::vector<double>& etas = {10, 25, 50, 75, 100, 150}, int r = 50,
                                      double observed = 0.1) {
  const int count = opts.count > 0 ? opts.count : 20;
  EtaSweepResult res;
  res.etas = etas;
  for (double eta : etas) {
    RunConfig config;
    config.kernel = KernelSpec::paley_wiener(eta);
    config.gamma = opts.gamma;
    config.jitter = opts.jitter_for(config.kernel);
    config.with_bands = false;
    MethodSummary m;
    m.method = "sgki-pw eta=" + format_cell(eta, 0);
    for (int k = 0; k < count; ++k) {
      // Same corpus and masks for every eta.
      const std::uint64_t s = detail::mix_seed(opts.seed, static_cast<std::uint64_t>(k));
      const SyntheticImage synth = synth_pw_image(opts.eta_truth, r, 20, s);
      const Mask mask = random_mask(r, r, observed, detail::mix_seed(s, 1));
      const Reconstruction rec = inpaint(config, detail::maybe_quantize(synth.image, opts.quantize_inputs), mask);
      m.add(evaluate(synth.image, rec.estimate, opts.scale));
    }
    res.summaries.push_back(m.averaged());
  }
  res.table = detail::method_table(res.summaries, opts.scale, "sgki.bench.eta_sweep.v1");
  return res;
}

// ---------------------------------------------------------------------------
// Timing: factorization reuse against a dense inverse of K0 per query.

struct TimingRow {
  double removed = 0.0;
  Eigen::Index observed = 0;
  std::size_t queries = 0;
  double fit_s = 0.0;            // Gram matrix and Cholesky factorization
  double dense_per_query_s = 0.0;  // build K0 and invert it densely
  double schur_per_query_s = 0.0;  // block inverse from a precomputed K^-1
  double interval_per_query_s = 0.0;  // closed-form interval via the factorization
  double point_total_s = 0.0;    // fit plus point estimates at every query
  double band_total_s = 0.0;     // fit plus bands at every query
  double speedup_schur = 0.0;    // dense_per_query / schur_per_query
  // Whole-run comparison over all queries: dense inversion per query versus
  // one factorization plus a closed-form interval per query.
  double speedup_reuse = 0.0;
};

struct TimingOptions {
  int size = 64;
  std::vector<double> removed = {0.05, 0.10, 0.15, 0.20, 0.25};
  std::size_t dense_samples = 3;   // dense inversions timed per row, then extrapolated
  std::size_t schur_samples = 3;   // block-inverse reconstructions timed per row
  bool schur_inverse = true;       // time the explicit block inverse (needs K^-1, O(n^3))
};

struct TimingResult {
  std::vector<TimingRow> rows;
  Table table;
};

inline TimingRow time_removal(const BenchOptions& opts, const TimingOptions& topts, double removed,
                              std::uint64_t seed) {
  using detail::Clock;
  using detail::seconds_since;
  const int r = topts.size;
  const SyntheticImage synth = synth_pw_image(opts.eta_truth, r, 20, seed);
  const Mask mask = random_mask(r, r, 1.0 - removed, detail::mix_seed(seed, 1));
  const ObservedSplit split = split_observed(synth.image, mask, 0);
  const KernelSpec spec = KernelSpec::paley_wiener(opts.eta_fit);
  const double jitter = opts.jitter_for(spec);

  TimingRow row;
  row.removed = removed;
  row.observed = split.samples.size();
  row.queries = static_cast<std::size_t>(split.queries.rows());

  auto t0 = Clock::now();
  const Interpolant interp = fit(spec, split.samples, jitter);
  row.fit_s = seconds_since(t0);
  const double kappa =
      effective_kappa(estimate_kappa_pw(spec, split.samples, opts.gamma), interp, interp.size() + 1).value;

  t0 = Clock::now();
  double sink = 0.0;
  for (Eigen::Index q = 0; q < split.queries.rows(); ++q) sink += interp.predict(point_at(split.queries, q));
  row.point_total_s = row.fit_s + seconds_since(t0);

  t0 = Clock::now();
  for (Eigen::Index q = 0; q < split.queries.rows(); ++q)
    sink += confidence_interval(interp, kappa, point_at(split.queries, q)).width();
  const double intervals_s = seconds_since(t0);
  row.interval_per_query_s = row.queries ? intervals_s / static_cast<double>(row.queries) : 0.0;
  row.band_total_s = row.fit_s + intervals_s;

  // Dense reference: assemble K0 for the query and invert it from scratch.
  const std::size_t dense_n = std::min(topts.dense_samples, row.queries);
  if (dense_n > 0) {
    const Eigen::Index n = interp.size();
    t0 = Clock::now();
    for (std::size_t q = 0; q < dense_n; ++q) {
      PointSet ext(n + 1, 2);
      ext.row(0) = split.queries.row(static_cast<Eigen::Index>(q));
      ext.bottomRows(n) = split.samples.points;
      Eigen::MatrixXd k0 = gram(spec, ext);
      k0.diagonal().array() += jitter;
      const Eigen::MatrixXd inv = k0.partialPivLu().inverse();
      sink += inv(0, 0);
    }
    row.dense_per_query_s = seconds_since(t0) / static_cast<double>(dense_n);
  }

  const std::size_t schur_n = std::min(topts.schur_samples, row.queries);
  if (topts.schur_inverse && schur_n > 0) {
    const Eigen::MatrixXd k_inverse = interp.factor().inverse();
    t0 = Clock::now();
    for (std::size_t q = 0; q < schur_n; ++q)
      sink += extended_inverse(interp, point_at(split.queries, static_cast<Eigen::Index>(q)), k_inverse)(0, 0);
    row.schur_per_query_s = seconds_since(t0) / static_cast<double>(schur_n);
    row.speedup_schur = row.dense_per_query_s / row.schur_per_query_s;
  }
  if (row.queries > 0)
    row.speedup_reuse = row.dense_per_query_s * static_cast<double>(row.queries) / row.band_total_s;
  if (std::isnan(sink)) row.speedup_reuse = std::numeric_limits<double>::quiet_NaN();
  return row;
}

inline TimingResult bench_timing(const BenchOptions& opts, const TimingOptions& topts = {}) {
  TimingResult res;
  res.table.schema = "sgki.bench.timing.v1";
  res.table.columns = {"removed",          "observed",          "queries",       "fit_s",
                       "dense_per_query_s", "schur_per_query_s", "interval_per_query_s",
                       "point_total_s",    "band_total_s",      "speedup_schur", "speedup_reuse"};
  for (std::size_t k = 0; k < topts.removed.size(); ++k) {
    const TimingRow row = time_removal(opts, topts, topts.removed[k], detail::mix_seed(opts.seed, k));
    res.rows.push_back(row);
    res.table.add({format_cell(row.removed, 2), std::to_string(row.observed), std::to_string(row.queries),
                   format_cell(row.fit_s, 4), format_cell(row.dense_per_query_s, 4),
                   format_cell(row.schur_per_query_s, 4), format_cell(row.interval_per_query_s, 6),
                   format_cell(row.point_total_s, 4), format_cell(row.band_total_s, 4),
                   format_cell(row.speedup_schur, 2), format_cell(row.speedup_reuse, 2)});
  }
  return res;
}

}  // namespace sgki
