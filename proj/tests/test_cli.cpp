#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sgki/cli.hpp"

namespace sgki::cli {
namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sgki_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the built binary and returns its exit status.
  int run(const std::string& args) const {
    const std::string cmd = std::string(SGKI_CLI_PATH) + " " + args + " >" + (dir_ / "stdout.txt").string() + " 2>" +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST_F(CliTest, InpaintWritesArtifactSet) {
  const SyntheticImage s = synth_pw_image(50.0, 20, 20, 3);
  const Image raw = denormalize(s.image, true);
  const CommandResult r = cmd_inpaint(RunConfig{}, raw, random_mask(20, 20, 0.3, 4), dir_ / "out", true, raw);
  EXPECT_EQ(r.exit_code, kOk);
  for (const char* f : {"estimate.pgm", "lower.pgm", "upper.pgm", "uncertainty.pgm", "weights.pgm", "bands.csv",
                        "metrics.csv", "metrics.md"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  EXPECT_NE(r.report.find("norm_sq="), std::string::npos);
  EXPECT_EQ(slurp(dir_ / "out" / "metrics.csv").rfind("# schema: sgki.metrics.v1\n", 0), 0u);
}

TEST_F(CliTest, SuperresWithBaselinesAndReference) {
  const SyntheticImage s = synth_pw_image(50.0, 20, 20, 5);
  RunConfig c;
  c.jitter = 1e-10 * c.kernel.diagonal();
  const CommandResult r =
      cmd_superres(c, subsample(s.image, 2), dir_ / "sr", false, true, denormalize(s.image, true));
  EXPECT_EQ(r.exit_code, kOk);
  for (const char* f : {"nearest.pgm", "bilinear.pgm", "bicubic.pgm", "estimate.pgm", "metrics.csv"})
    EXPECT_TRUE(fs::exists(dir_ / "sr" / f)) << f;
  const std::string csv = slurp(dir_ / "sr" / "metrics.csv");
  for (const char* name : {"sgki", "nearest", "bilinear", "bicubic"}) EXPECT_NE(csv.find(name), std::string::npos);
}

TEST_F(CliTest, SuperresReferenceShapeMismatch) {
  const SyntheticImage s = synth_pw_image(50.0, 10, 20, 6);
  EXPECT_THROW(cmd_superres(RunConfig{}, s.image, dir_, false, false, s.image), ShapeMismatch);
}

TEST_F(CliTest, SynthIsDeterministic) {
  cmd_synth(50.0, 2, 12, 9, dir_ / "a", 2);
  cmd_synth(50.0, 2, 12, 9, dir_ / "b", 2);
  for (const char* f : {"synth_000.pgm", "synth_001.pgm", "synth_001.truth", "synth_001_low.pgm"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  EXPECT_NE(slurp(dir_ / "a" / "synth_000.pgm"), slurp(dir_ / "a" / "synth_001.pgm"));
  EXPECT_EQ(read_netpbm(dir_ / "a" / "synth_000_low.pgm").height, 6);
}

TEST_F(CliTest, MetricsFixture) {
  Image a = Image::zeros(4, 4, 1, Encoding::Raw);
  Image b = a;
  std::fill(a.data.begin(), a.data.end(), 100.0);
  std::fill(b.data.begin(), b.data.end(), 101.0);
  const CommandResult r = cmd_metrics(a, b, MetricScale::Raw, dir_);
  const std::string csv = slurp(dir_ / "metrics.csv");
  EXPECT_NE(csv.find("candidate,48.1308,"), std::string::npos) << csv;
  EXPECT_NE(r.report.find("| candidate | 48.1308 |"), std::string::npos) << r.report;
}

TEST_F(CliTest, BenchUnknownSuite) {
  EXPECT_THROW(cmd_bench("nope", BenchOptions{}, TimingOptions{}, dir_), InvalidArgument);
}

TEST_F(CliTest, BinaryInpaintRoundTrip) {
  const SyntheticImage s = synth_pw_image(50.0, 16, 20, 7);
  write_netpbm(s.image, dir_ / "img.pgm");
  write_mask(random_mask(16, 16, 0.4, 8), dir_ / "mask.pgm");
  const std::string args = "inpaint " + (dir_ / "img.pgm").string() + " --mask " + (dir_ / "mask.pgm").string() +
                           " --out-dir " + (dir_ / "out").string();
  EXPECT_EQ(run(args), kOk) << slurp(dir_ / "stderr.txt");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "estimate.pgm"));
}

TEST_F(CliTest, BinaryMaskShapeMismatchExitsThree) {
  write_netpbm(synth_pw_image(50.0, 8, 20, 1).image, dir_ / "img.pgm");
  write_mask(Mask::filled(8, 9, true), dir_ / "mask.pgm");
  EXPECT_EQ(run("inpaint " + (dir_ / "img.pgm").string() + " --mask " + (dir_ / "mask.pgm").string() + " --out-dir " +
                (dir_ / "out").string()),
            kShape);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("shape mismatch"), std::string::npos);
}

TEST_F(CliTest, BinaryGaussianWithoutKappaIsUsageError) {
  write_netpbm(synth_pw_image(50.0, 8, 20, 1).image, dir_ / "img.pgm");
  write_mask(random_mask(8, 8, 0.5, 2), dir_ / "mask.pgm");
  EXPECT_EQ(run("inpaint " + (dir_ / "img.pgm").string() + " --mask " + (dir_ / "mask.pgm").string() +
                " --kernel gauss --out-dir " + (dir_ / "out").string()),
            kUsage);
}

TEST_F(CliTest, BinaryMalformedInputExitsFour) {
  {
    std::ofstream bad(dir_ / "bad.pgm", std::ios::binary);
    bad << "P5\n4 4\n255\nxx";
  }
  write_mask(Mask::filled(4, 4, true), dir_ / "mask.pgm");
  EXPECT_EQ(run("inpaint " + (dir_ / "bad.pgm").string() + " --mask " + (dir_ / "mask.pgm").string()), kInput);
}

TEST_F(CliTest, BinaryConfigFileAndFlagPrecedence) {
  const fs::path cfg = dir_ / "run.ini";
  {
    std::ofstream f(cfg);
    f << "[synth]\ncount=2\nr=8\nout-dir=" << (dir_ / "from_config").string() << "\n";
  }
  EXPECT_EQ(run("--config " + cfg.string() + " synth"), kOk) << slurp(dir_ / "stderr.txt");
  EXPECT_TRUE(fs::exists(dir_ / "from_config" / "synth_001.pgm"));
  EXPECT_EQ(read_netpbm(dir_ / "from_config" / "synth_000.pgm").height, 8);

  EXPECT_EQ(run("--config " + cfg.string() + " synth --out-dir " + (dir_ / "from_flag").string()), kOk);
  EXPECT_TRUE(fs::exists(dir_ / "from_flag" / "synth_001.pgm"));
  EXPECT_FALSE(fs::exists(dir_ / "from_flag" / "synth_002.pgm"));
}

TEST_F(CliTest, BinaryMetricsPrintsTable) {
  Image a = Image::zeros(3, 3, 1, Encoding::Raw);
  std::fill(a.data.begin(), a.data.end(), 50.0);
  Image b = a;
  b.data[0] = 53;
  write_netpbm(a, dir_ / "a.pgm");
  write_netpbm(b, dir_ / "b.pgm");
  EXPECT_EQ(run("metrics " + (dir_ / "a.pgm").string() + " " + (dir_ / "b.pgm").string()), kOk);
  EXPECT_NE(slurp(dir_ / "stdout.txt").find("| candidate |"), std::string::npos);
  // NRMSE is undefined against an all-zero reference.
  write_netpbm(Image::zeros(3, 3, 1, Encoding::Raw), dir_ / "zero.pgm");
  EXPECT_EQ(run("metrics " + (dir_ / "zero.pgm").string() + " " + (dir_ / "b.pgm").string()), kUsage);
}

}  // namespace
}  // namespace sgki::cli
