#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrccs/errors.hpp"
#include "mrccs/metrics.hpp"
#include "mrccs/rng.hpp"
#include "oracles.hpp"

using namespace mrccs;

namespace {

Tensor3 constant_image(int h, int w, float v) {
  Tensor3 t(1, h, w);
  for (auto& x : t.data) x = v;
  return t;
}

}  // namespace

TEST_CASE("psnr of identical images is positive infinity") {
  Rng rng(101);
  Tensor3 a = oracles::random_tensor(1, 32, 32, rng, 0.0f, 1.0f);
  double v = psnr(a, a);
  CHECK(std::isinf(v));
  CHECK(v > 0);
}

TEST_CASE("psnr closed forms: uniform offsets") {
  // MSE 0.25 against peak 1 -> 10*log10(4) = 6.0206 dB.
  Tensor3 zeros = constant_image(16, 16, 0.0f);
  Tensor3 halves = constant_image(16, 16, 0.5f);
  CHECK(psnr(zeros, halves) == doctest::Approx(6.0205999).epsilon(1e-6));

  // A flat +/-0.01 error has MSE 1e-4 -> 40 dB.
  Rng rng(102);
  Tensor3 a = oracles::random_tensor(1, 64, 64, rng, 0.2f, 0.8f);
  Tensor3 b = a;
  for (size_t i = 0; i < b.data.size(); ++i)
    b.data[i] += (i % 2 == 0) ? 0.01f : -0.01f;
  CHECK(psnr(a, b) == doctest::Approx(40.0).epsilon(0.002));
}

TEST_CASE("psnr honors the peak argument") {
  Tensor3 zeros = constant_image(8, 8, 0.0f);
  Tensor3 ones = constant_image(8, 8, 1.0f);
  CHECK(psnr(zeros, ones, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
  // Peak 2 quadruples peak^2 -> +6.0206 dB.
  CHECK(psnr(zeros, ones, 2.0) == doctest::Approx(6.0205999).epsilon(1e-6));
}

TEST_CASE("psnr is symmetric and strictly decreasing in noise amplitude") {
  Rng rng(103);
  Tensor3 a = oracles::random_tensor(1, 48, 48, rng, 0.0f, 1.0f);
  double prev = std::numeric_limits<double>::infinity();
  for (float amp : {0.01f, 0.03f, 0.1f}) {
    Tensor3 b = a;
    Rng noise(104);
    for (auto& v : b.data) v += noise.uniform(-amp, amp);
    const double fwd = psnr(a, b);
    CHECK(fwd == doctest::Approx(psnr(b, a)).epsilon(1e-12));
    CHECK(fwd < prev);
    prev = fwd;
  }
}

TEST_CASE("psnr rejects shape mismatches") {
  Tensor3 a(1, 8, 8), b(1, 8, 9);
  CHECK_THROWS_AS(psnr(a, b), ConfigError);
}

TEST_CASE("ssim of an image with itself is exactly one") {
  Rng rng(105);
  Tensor3 a = oracles::random_tensor(1, 24, 24, rng, 0.0f, 1.0f);
  CHECK(ssim(a, a) == 1.0);
}

TEST_CASE("ssim closed form on constant images") {
  // Zero variances collapse the index to the luminance term
  // (2*mu1*mu2 + C1) / (mu1^2 + mu2^2 + C1).
  const double mu1 = 0.25, mu2 = 0.75, c1 = 1e-4;
  Tensor3 a = constant_image(32, 32, static_cast<float>(mu1));
  Tensor3 b = constant_image(32, 32, static_cast<float>(mu2));
  const double expected = (2.0 * mu1 * mu2 + c1) / (mu1 * mu1 + mu2 * mu2 + c1);
  CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("separable ssim matches the per-window brute force") {
  Rng rng(106);
  for (int trial = 0; trial < 4; ++trial) {
    Tensor3 a = oracles::random_tensor(1, 64, 64, rng, 0.0f, 1.0f);
    Tensor3 b = oracles::random_tensor(1, 64, 64, rng, 0.0f, 1.0f);
    const double fast = ssim(a, b);
    const double slow = oracles::ssim_brute(a, b);
    CHECK(std::fabs(fast - slow) <= 1e-6);
  }
}

TEST_CASE("ssim is symmetric and penalizes noise") {
  Rng rng(107);
  Tensor3 a = oracles::random_tensor(1, 32, 32, rng, 0.0f, 1.0f);
  Tensor3 b = a;
  for (auto& v : b.data) v += rng.uniform(-0.05f, 0.05f);
  const double fwd = ssim(a, b);
  CHECK(fwd == doctest::Approx(ssim(b, a)).epsilon(1e-12));
  CHECK(fwd < 1.0);
  CHECK(fwd > 0.0);
}

TEST_CASE("ssim rejects mismatched or undersized inputs") {
  Tensor3 a(1, 32, 32), b(1, 32, 33);
  CHECK_THROWS_AS(ssim(a, b), ConfigError);
  Tensor3 tiny(1, 10, 10);
  CHECK_THROWS_AS(ssim(tiny, tiny), ConfigError);
}

TEST_CASE("report CSV carries header, 4-decimal rows, and a mean row") {
  MetricsReport report;
  MetricRow r;
  r.dataset = "Set5";
  r.ratio_percent = 6.25;
  r.variant = "gsm_plus";
  r.image = "baby.png";
  r.psnr_db = 30.125;
  r.ssim = 0.9;
  report.rows.push_back(r);
  r.image = "bird.png";
  r.psnr_db = 33.5;
  r.ssim = 0.95;
  report.rows.push_back(r);
  r.image = "woman.png";
  r.psnr_db = 28.0;
  r.ssim = 0.85;
  report.rows.push_back(r);

  const std::string csv = report.to_csv();
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "dataset,image,ratio,variant,psnr_db,ssim");
  REQUIRE(std::getline(lines, line));
  CHECK(line == "Set5,baby.png,6.2500,gsm_plus,30.1250,0.9000");
  REQUIRE(std::getline(lines, line));
  CHECK(line == "Set5,bird.png,6.2500,gsm_plus,33.5000,0.9500");
  REQUIRE(std::getline(lines, line));
  CHECK(line == "Set5,woman.png,6.2500,gsm_plus,28.0000,0.8500");
  REQUIRE(std::getline(lines, line));
  CHECK(line == "Set5,mean,6.2500,gsm_plus,30.5417,0.9000");
  CHECK_FALSE(std::getline(lines, line));

  CHECK(report.mean_psnr() ==
        doctest::Approx((30.125 + 33.5 + 28.0) / 3.0).epsilon(1e-9));
  CHECK(report.mean_ssim() ==
        doctest::Approx((0.9 + 0.95 + 0.85) / 3.0).epsilon(1e-9));
}

TEST_CASE("report CSV writes infinite psnr as inf") {
  MetricsReport report;
  MetricRow r;
  r.dataset = "d";
  r.image = "i";
  r.ratio_percent = 50.0;
  r.variant = "v";
  r.psnr_db = std::numeric_limits<double>::infinity();
  r.ssim = 1.0;
  report.rows.push_back(r);
  CHECK(report.to_csv().find("inf") != std::string::npos);
}

TEST_CASE("write_csv puts the exact CSV bytes on disk") {
  MetricsReport report;
  MetricRow r;
  r.dataset = "d";
  r.image = "a.png";
  r.ratio_percent = 25.0;
  r.variant = "gsm";
  r.psnr_db = 31.25;
  r.ssim = 0.8918;
  report.rows.push_back(r);

  const auto path =
      std::filesystem::temp_directory_path() / "mrccs_metrics_report.csv";
  report.write_csv(path.string());
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == report.to_csv());
  std::filesystem::remove(path);
}
