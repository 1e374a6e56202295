#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "sgki/sgki.hpp"

namespace {

using sgki::cli::CommandResult;
namespace cli = sgki::cli;

// Flags shared by the fitting verbs. Parsed into plain fields first so that
// the kappa-mode default can depend on the kernel.
struct FitFlags {
  std::string kernel = "pw";
  double eta = 50.0;
  double sigma = 0.05;
  double gamma = 0.1;
  std::string kappa_mode;
  std::optional<double> kappa;
  bool literal_alg1 = false;
  double delta0 = 0.0;
  double delta_r = 0.0;
  double jitter = 0.0;
  unsigned threads = 0;
  std::uint64_t seed = 1;
  bool strict = false;

  void attach(CLI::App* app) {
    app->add_option("--kernel", kernel, "Kernel family")->check(CLI::IsMember({"pw", "gauss"}));
    app->add_option("--eta", eta, "Paley-Wiener bandwidth")->check(CLI::PositiveNumber);
    app->add_option("--sigma", sigma, "Gaussian length scale")->check(CLI::PositiveNumber);
    app->add_option("--gamma", gamma, "Risk level in (0, 1)");
    app->add_option("--kappa-mode", kappa_mode, "estimate-pw, manual or norm-floor")
        ->check(CLI::IsMember({"estimate-pw", "manual", "norm-floor"}));
    app->add_option("--kappa", kappa, "Norm bound for manual mode");
    app->add_flag("--literal-alg1", literal_alg1, "Scale kappa by n + 1 before use");
    app->add_option("--delta0", delta0, "Additive kappa slack");
    app->add_option("--delta-r", delta_r, "Quantization correction added to kappa");
    app->add_option("--jitter", jitter, "Diagonal added to the Gram matrix");
    app->add_option("--threads", threads, "Worker threads for bands (0 = all cores)");
    app->add_option("--seed", seed, "Random seed");
    app->add_flag("--strict", strict, "Abort on the first failing query");
  }

  sgki::RunConfig config() const {
    sgki::RunConfig c;
    c.kernel = kernel == "pw" ? sgki::KernelSpec::paley_wiener(eta) : sgki::KernelSpec::gaussian(sigma);
    c.gamma = gamma;
    c.kappa_manual = kappa;
    if (kappa_mode.empty()) {
      if (kappa) {
        c.kappa_mode = sgki::KappaMode::Manual;
      } else if (kernel == "pw") {
        c.kappa_mode = sgki::KappaMode::EstimatePW;
      } else {
        throw sgki::InvalidArgument("the Gaussian kernel needs --kappa (or --kappa-mode norm-floor)");
      }
    } else {
      static const std::map<std::string, sgki::KappaMode> modes = {{"estimate-pw", sgki::KappaMode::EstimatePW},
                                                                  {"manual", sgki::KappaMode::Manual},
                                                                  {"norm-floor", sgki::KappaMode::NormFloor}};
      c.kappa_mode = modes.at(kappa_mode);
    }
    c.literal_alg1 = literal_alg1;
    c.delta0 = delta0;
    c.delta_r = delta_r;
    c.jitter = jitter;
    c.threads = threads;
    c.seed = seed;
    c.strict = strict;
    return c;
  }
};

sgki::MetricScale parse_scale(const std::string& s) {
  return s == "normalized" ? sgki::MetricScale::Normalized : sgki::MetricScale::Raw;
}

int emit(const CommandResult& r) {
  std::cout << r.report;
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& p : r.written) std::cerr << "wrote " << p.string() << '\n';
  if (r.exit_code == cli::kPartial) std::cerr << "error: some queries failed; see warnings above\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel interpolation with simultaneous confidence bands for inpainting and super-resolution"};
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.require_subcommand(1);

  std::string metric_scale = "raw";
  std::string out_dir = "out";

  // inpaint
  FitFlags inpaint_flags;
  std::string inpaint_image;
  std::string inpaint_mask;
  std::string inpaint_reference;
  bool inpaint_weights = false;
  auto* inpaint = app.add_subcommand("inpaint", "Fill pixels where the mask is zero");
  inpaint_flags.attach(inpaint);
  inpaint->add_option("image", inpaint_image, "Input PGM/PPM")->required()->check(CLI::ExistingFile);
  inpaint->add_option("--mask", inpaint_mask, "Mask PGM, 0 = missing")->required()->check(CLI::ExistingFile);
  inpaint->add_option("--out-dir", out_dir, "Output directory");
  inpaint->add_option("--reference", inpaint_reference, "Ground truth for metrics")->check(CLI::ExistingFile);
  inpaint->add_option("--metric-scale", metric_scale)->check(CLI::IsMember({"raw", "normalized"}));
  inpaint->add_flag("--weights", inpaint_weights, "Also render the kernel weight map");

  // superres
  FitFlags sr_flags;
  std::string sr_image;
  std::string sr_reference;
  std::string sr_placement = "aligned";
  int sr_scale = 2;
  bool sr_weights = false;
  bool sr_baselines = false;
  auto* superres = app.add_subcommand("superres", "Upsample an image with confidence bands");
  sr_flags.attach(superres);
  superres->add_option("image", sr_image, "Low-resolution PGM/PPM")->required()->check(CLI::ExistingFile);
  superres->add_option("--scale", sr_scale, "Upsampling factor (2 and 4 are tested)")->check(CLI::Range(2, 64));
  superres->add_option("--placement", sr_placement, "Where low-res pixels sit on the fine grid")
      ->check(CLI::IsMember({"aligned", "own-grid"}));
  superres->add_option("--out-dir", out_dir, "Output directory");
  superres->add_option("--reference", sr_reference, "High-resolution ground truth for metrics")
      ->check(CLI::ExistingFile);
  superres->add_option("--metric-scale", metric_scale)->check(CLI::IsMember({"raw", "normalized"}));
  superres->add_flag("--baselines", sr_baselines, "Also write nearest, bilinear and bicubic upsamplings");
  superres->add_flag("--weights", sr_weights, "Also render the kernel weight map");

  // synth
  double synth_eta = 50.0;
  int synth_count = 1;
  int synth_r = 50;
  int synth_stride = 1;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Generate band-limited test images with truth sidecars");
  synth->add_option("--eta", synth_eta, "Bandwidth of the generating kernel")->check(CLI::PositiveNumber);
  synth->add_option("--count", synth_count, "Number of images")->check(CLI::PositiveNumber);
  synth->add_option("--r", synth_r, "Image side length")->check(CLI::PositiveNumber);
  synth->add_option("--stride", synth_stride, "Also write a subsampled copy")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out-dir", out_dir, "Output directory");

  // metrics
  std::string m_reference;
  std::string m_candidate;
  std::string m_out;
  auto* metrics = app.add_subcommand("metrics", "Compare a candidate image against a reference");
  metrics->add_option("reference", m_reference)->required()->check(CLI::ExistingFile);
  metrics->add_option("candidate", m_candidate)->required()->check(CLI::ExistingFile);
  metrics->add_option("--metric-scale", metric_scale)->check(CLI::IsMember({"raw", "normalized"}));
  metrics->add_option("--out-dir", m_out, "Also write metrics.csv and metrics.md here");

  // bench
  std::string suite;
  sgki::BenchOptions bench_opts;
  sgki::TimingOptions timing_opts;
  std::optional<double> bench_jitter;
  auto* bench = app.add_subcommand("bench", "Run a seeded synthetic benchmark suite");
  bench->add_option("--suite", suite)
      ->required()
      ->check(CLI::IsMember({"inpaint-synth", "superres-synth", "eta-sweep", "timing"}));
  bench->add_option("--count", bench_opts.count, "Corpus size (0 = suite default)");
  bench->add_option("--seed", bench_opts.seed, "Random seed");
  bench->add_option("--threads", bench_opts.threads, "Worker threads for bands");
  bench->add_option("--eta", bench_opts.eta_fit, "Bandwidth used for fitting");
  bench->add_option("--eta-truth", bench_opts.eta_truth, "Bandwidth of the synthetic truth");
  bench->add_option("--gamma", bench_opts.gamma, "Risk level");
  bench->add_option("--jitter", bench_jitter, "Absolute jitter (default 1e-10 times the kernel diagonal)");
  bench->add_flag("--quantize", bench_opts.quantize_inputs, "Round inputs to 8 bits before fitting");
  bench->add_option("--metric-scale", metric_scale)->check(CLI::IsMember({"raw", "normalized"}));
  bench->add_option("--size", timing_opts.size, "Timing suite image side length");
  bench->add_option("--removed", timing_opts.removed, "Timing suite removal fractions");
  bench->add_option("--out-dir", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const sgki::MetricScale scale = parse_scale(metric_scale);
    if (*inpaint) {
      const sgki::RunConfig config = inpaint_flags.config();
      std::optional<sgki::Image> reference;
      if (!inpaint_reference.empty()) reference = sgki::read_netpbm(inpaint_reference);
      return emit(cli::cmd_inpaint(config, sgki::read_netpbm(inpaint_image), sgki::read_mask(inpaint_mask), out_dir,
                                   inpaint_weights, reference, scale));
    }
    if (*superres) {
      sgki::RunConfig config = sr_flags.config();
      config.scale = sr_scale;
      config.placement = sr_placement == "own-grid" ? sgki::Placement::OwnGrid : sgki::Placement::Aligned;
      std::optional<sgki::Image> reference;
      if (!sr_reference.empty()) reference = sgki::read_netpbm(sr_reference);
      return emit(cli::cmd_superres(config, sgki::read_netpbm(sr_image), out_dir, sr_weights, sr_baselines,
                                    reference, scale));
    }
    if (*synth) return emit(cli::cmd_synth(synth_eta, synth_count, synth_r, synth_seed, out_dir, synth_stride));
    if (*metrics) {
      std::optional<std::filesystem::path> dir;
      if (!m_out.empty()) dir = m_out;
      return emit(cli::cmd_metrics(sgki::read_netpbm(m_reference), sgki::read_netpbm(m_candidate), scale, dir));
    }
    if (*bench) {
      bench_opts.scale = scale;
      bench_opts.jitter = bench_jitter;
      return emit(cli::cmd_bench(suite, bench_opts, timing_opts, out_dir));
    }
  } catch (const sgki::ShapeMismatch& e) {
    std::cerr << "error: shape mismatch: " << e.what() << '\n';
    return cli::kShape;
  } catch (const sgki::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kInput;
  } catch (const sgki::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const sgki::ConditioningError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kNumerical;
  } catch (const sgki::Infeasible& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kNumerical;
  } catch (const sgki::NearDuplicateQuery& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kInput;
  }
  return cli::kUsage;
}
