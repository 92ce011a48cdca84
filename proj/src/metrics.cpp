#include "mrccs/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "mrccs/errors.hpp"

namespace mrccs {

double psnr(const Tensor3& a, const Tensor3& b, double peak) {
  if (!a.same_shape(b)) {
    throw ConfigError("psnr shape mismatch: " + a.shape_string() + " vs " +
                      b.shape_string());
  }
  double se = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

constexpr int kWindow = 11;
constexpr int kRadius = kWindow / 2;

const double* gaussian_taps() {
  static double taps[kWindow];
  static bool ready = false;
  if (!ready) {
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      const double d = i - kRadius;
      taps[i] = std::exp(-d * d / (2.0 * sigma * sigma));
      sum += taps[i];
    }
    for (auto& t : taps) t /= sum;
    ready = true;
  }
  return taps;
}

// Valid-mode separable Gaussian filtering of a HxW double plane:
// horizontal pass to H x (W-10), then vertical to (H-10) x (W-10).
std::vector<double> gauss_valid(const std::vector<double>& img, int h, int w, int& oh,
                                int& ow) {
  const double* taps = gaussian_taps();
  ow = w - 2 * kRadius;
  oh = h - 2 * kRadius;
  std::vector<double> mid(static_cast<size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += taps[t] * img[y * static_cast<size_t>(w) + x + t];
      mid[y * static_cast<size_t>(ow) + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += taps[t] * mid[(y + t) * static_cast<size_t>(ow) + x];
      out[y * static_cast<size_t>(ow) + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const Tensor3& a, const Tensor3& b, double peak) {
  if (!a.same_shape(b)) {
    throw ConfigError("ssim shape mismatch: " + a.shape_string() + " vs " +
                      b.shape_string());
  }
  if (a.height < kWindow || a.width < kWindow) {
    throw ConfigError("ssim needs at least " + std::to_string(kWindow) + "x" +
                      std::to_string(kWindow) + ", got " + a.shape_string());
  }
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  const int h = a.height, w = a.width;
  const size_t plane = static_cast<size_t>(h) * w;
  std::vector<double> xa(plane), xb(plane), xaa(plane), xbb(plane), xab(plane);
  double acc_total = 0.0;
  long count_total = 0;
  for (int c = 0; c < a.channels; ++c) {
    const float* pa = a.plane(c);
    const float* pb = b.plane(c);
    for (size_t i = 0; i < plane; ++i) {
      const double va = pa[i], vb = pb[i];
      xa[i] = va;
      xb[i] = vb;
      xaa[i] = va * va;
      xbb[i] = vb * vb;
      xab[i] = va * vb;
    }
    int oh = 0, ow = 0;
    auto mu_a = gauss_valid(xa, h, w, oh, ow);
    auto mu_b = gauss_valid(xb, h, w, oh, ow);
    auto s_aa = gauss_valid(xaa, h, w, oh, ow);
    auto s_bb = gauss_valid(xbb, h, w, oh, ow);
    auto s_ab = gauss_valid(xab, h, w, oh, ow);
    for (size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i], mb = mu_b[i];
      const double va = s_aa[i] - ma * ma;
      const double vb = s_bb[i] - mb * mb;
      const double vab = s_ab[i] - ma * mb;
      const double num = (2.0 * ma * mb + c1) * (2.0 * vab + c2);
      const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
      acc_total += num / den;
    }
    count_total += static_cast<long>(mu_a.size());
  }
  return acc_total / static_cast<double>(count_total);
}

double MetricsReport::mean_psnr() const {
  double acc = 0.0;
  for (const auto& r : rows) acc += r.psnr_db;
  return rows.empty() ? 0.0 : acc / static_cast<double>(rows.size());
}

double MetricsReport::mean_ssim() const {
  double acc = 0.0;
  for (const auto& r : rows) acc += r.ssim;
  return rows.empty() ? 0.0 : acc / static_cast<double>(rows.size());
}

namespace {

std::string fixed4(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string MetricsReport::to_csv() const {
  std::string out = "dataset,image,ratio,variant,psnr_db,ssim\n";
  for (const auto& r : rows) {
    out += r.dataset + "," + r.image + "," + fixed4(r.ratio_percent) + "," + r.variant +
           "," + fixed4(r.psnr_db) + "," + fixed4(r.ssim) + "\n";
  }
  if (!rows.empty()) {
    out += rows.front().dataset + ",mean," + fixed4(rows.front().ratio_percent) + "," +
           rows.front().variant + "," + fixed4(mean_psnr()) + "," + fixed4(mean_ssim()) +
           "\n";
  }
  return out;
}

void MetricsReport::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write report: " + path);
  f << to_csv();
}

}  // namespace mrccs
