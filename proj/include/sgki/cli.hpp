#pragma once

// Command implementations behind the sgki executable. Argument parsing lives
// in tools/sgki.cpp; everything here takes already-validated values so the
// commands can be driven from tests.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sgki/baselines.hpp"
#include "sgki/bench.hpp"
#include "sgki/error.hpp"
#include "sgki/imaging.hpp"
#include "sgki/metrics.hpp"
#include "sgki/netpbm.hpp"
#include "sgki/pipeline.hpp"

namespace sgki::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,          // bad flags or configuration
  kShape = 3,          // shape mismatch between inputs
  kInput = 4,          // unreadable or malformed files
  kNumerical = 5,      // factorization or feasibility failure
  kPartial = 6,        // artifacts written, but some queries failed
};

struct CommandResult {
  std::vector<fs::path> written;
  std::vector<std::string> warnings;
  std::string report;  // printed to stdout
  int exit_code = kOk;
};

inline void write_text(const fs::path& path, const std::string& text, CommandResult& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path.string());
  out.written.push_back(path);
}

inline void write_table(const Table& table, const fs::path& dir, const std::string& stem, CommandResult& out) {
  write_text(dir / (stem + ".csv"), table.to_csv(), out);
  write_text(dir / (stem + ".md"), table.to_markdown(), out);
}

inline Table metric_table() {
  Table t;
  t.schema = "sgki.metrics.v1";
  t.columns = {"candidate", "psnr", "ssim", "nrmse", "mse", "scale"};
  return t;
}

inline void add_metric_row(Table& t, const std::string& name, const MetricReport& r) {
  t.add({name, format_cell(r.psnr), format_cell(r.ssim), format_cell(r.nrmse), format_cell(r.mse, 6),
         to_string(r.scale)});
}

namespace detail {

inline void finish_run(const Reconstruction& rec, CommandResult& out) {
  out.warnings.insert(out.warnings.end(), rec.warnings.begin(), rec.warnings.end());
  std::size_t failed = 0;
  for (const ChannelFit& ch : rec.channels) failed += ch.band.errors.size();
  if (failed > 0) out.exit_code = kPartial;
  char buf[160];
  std::snprintf(buf, sizeof buf, "estimated %zu pixels x %zu channels, %zu failed queries\n",
                rec.query_pixels.size(), rec.channels.size(), failed);
  out.report += buf;
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    const ChannelFit& ch = rec.channels[c];
    std::snprintf(buf, sizeof buf, "channel %zu: n=%ld norm_sq=%.6g kappa_eff=%.6g%s\n", c,
                  static_cast<long>(ch.interp.size()), ch.interp.norm_sq(), ch.kappa.value,
                  ch.kappa.floored ? " (floored)" : "");
    out.report += buf;
  }
}

}  // namespace detail

/// Inpaints `image` where `mask` is zero and writes the artifact set to out_dir.
inline CommandResult cmd_inpaint(const RunConfig& config, const Image& image, const Mask& mask, const fs::path& out_dir,
                                 bool weights = false, const std::optional<Image>& reference = std::nullopt,
                                 MetricScale scale = MetricScale::Raw) {
  config.validate();
  CommandResult out;
  const Reconstruction rec = inpaint(config, image, mask);
  out.written = write_artifacts(rec, out_dir, {weights, ""});
  detail::finish_run(rec, out);
  if (reference) {
    Table t = metric_table();
    add_metric_row(t, "sgki", evaluate(*reference, rec.estimate, scale));
    write_table(t, out_dir, "metrics", out);
    out.report += t.to_markdown();
  }
  return out;
}

/// Upsamples `image` by config.scale, optionally alongside the classical
/// baselines, and scores everything against `reference` when given.
inline CommandResult cmd_superres(const RunConfig& config, const Image& image, const fs::path& out_dir,
                                  bool weights = false, bool baselines = false,
                                  const std::optional<Image>& reference = std::nullopt,
                                  MetricScale scale = MetricScale::Raw) {
  config.validate();
  CommandResult out;
  const Reconstruction rec = superres(config, image);
  if (reference && !reference->same_shape(rec.estimate))
    throw ShapeMismatch("reference is " + std::to_string(reference->height) + "x" + std::to_string(reference->width) +
                        " but the upsampled image is " + std::to_string(rec.estimate.height) + "x" +
                        std::to_string(rec.estimate.width));
  out.written = write_artifacts(rec, out_dir, {weights, ""});
  detail::finish_run(rec, out);

  Table t = metric_table();
  if (reference) add_metric_row(t, "sgki", evaluate(*reference, rec.estimate, scale));
  if (baselines) {
    const Image raw = image.encoding == Encoding::Raw ? image : denormalize(image, true);
    const std::string ext = raw.channels == 3 ? ".ppm" : ".pgm";
    const std::pair<const char*, Image> ups[] = {{"nearest", upsample_nearest(raw, config.scale)},
                                                 {"bilinear", upsample_bilinear(raw, config.scale)},
                                                 {"bicubic", upsample_bicubic(raw, config.scale)}};
    for (const auto& [name, img] : ups) {
      const fs::path p = out_dir / (std::string(name) + ext);
      write_netpbm(img, p);
      out.written.push_back(p);
      if (reference) add_metric_row(t, name, evaluate(*reference, img, scale));
    }
  }
  if (reference) {
    write_table(t, out_dir, "metrics", out);
    out.report += t.to_markdown();
  }
  return out;
}

/// Writes `count` synthetic Paley-Wiener images (synth_NNN.pgm) with truth
/// sidecars. With stride > 1 the subsampled image is written as well.
inline CommandResult cmd_synth(double eta, int count, int r, std::uint64_t seed, const fs::path& out_dir,
                               int stride = 1, int knots = 20) {
  if (count < 1) throw InvalidArgument("count must be positive");
  if (stride < 1) throw InvalidArgument("stride must be positive");
  fs::create_directories(out_dir);
  CommandResult out;
  for (int k = 0; k < count; ++k) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "synth_%03d", k);
    const SyntheticImage s = synth_pw_image(eta, r, knots, sgki::detail::mix_seed(seed, static_cast<std::uint64_t>(k)));
    const fs::path img = out_dir / (std::string(stem) + ".pgm");
    const fs::path truth = out_dir / (std::string(stem) + ".truth");
    write_netpbm(s.image, img);
    write_truth(s.truth, truth);
    out.written.push_back(img);
    out.written.push_back(truth);
    if (stride > 1) {
      const fs::path low = out_dir / (std::string(stem) + "_low.pgm");
      write_netpbm(subsample(s.image, stride), low);
      out.written.push_back(low);
    }
  }
  out.report = "wrote " + std::to_string(count) + " images to " + out_dir.string() + "\n";
  return out;
}

/// Scores `candidate` against `reference`; writes CSV and markdown when out_dir is set.
inline CommandResult cmd_metrics(const Image& reference, const Image& candidate, MetricScale scale,
                                 const std::optional<fs::path>& out_dir = std::nullopt) {
  CommandResult out;
  Table t = metric_table();
  add_metric_row(t, "candidate", evaluate(reference, candidate, scale));
  out.report = t.to_markdown();
  if (out_dir) {
    fs::create_directories(*out_dir);
    write_table(t, *out_dir, "metrics", out);
  }
  return out;
}

inline CommandResult cmd_bench(const std::string& suite, const BenchOptions& opts, const TimingOptions& topts,
                               const fs::path& out_dir) {
  fs::create_directories(out_dir);
  CommandResult out;
  Table table;
  if (suite == "inpaint-synth") {
    table = bench_inpaint_synth(opts).table;
  } else if (suite == "superres-synth") {
    table = bench_superres_synth(opts).table;
  } else if (suite == "eta-sweep") {
    table = bench_eta_sweep(opts).table;
  } else if (suite == "timing") {
    table = bench_timing(opts, topts).table;
  } else {
    throw InvalidArgument("unknown bench suite '" + suite + "'");
  }
  write_table(table, out_dir, suite, out);
  out.report = table.to_markdown();
  return out;
}

}  // namespace sgki::cli
