#pragma once

#include <string>
#include <vector>

#include "mrccs/tensor.hpp"

namespace mrccs {

// 10*log10(peak^2 / MSE); identical images give +infinity.
double psnr(const Tensor3& a, const Tensor3& b, double peak = 1.0);

// Single-scale structural similarity: 11x11 Gaussian window (sigma 1.5),
// C1=(0.01*peak)^2, C2=(0.03*peak)^2, valid windows only, mean of the local
// map. Images must be at least 11x11.
double ssim(const Tensor3& a, const Tensor3& b, double peak = 1.0);

struct MetricRow {
  std::string dataset;
  std::string image;
  double ratio_percent = 0.0;
  std::string variant;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricsReport {
  std::vector<MetricRow> rows;

  double mean_psnr() const;
  double mean_ssim() const;

  // "dataset,image,ratio,variant,psnr_db,ssim", 4 decimals, one row per
  // image plus a trailing "mean" row.
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

}  // namespace mrccs
