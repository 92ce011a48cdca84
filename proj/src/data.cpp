#include "mrccs/data.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "mrccs/errors.hpp"
#include "mrccs/rng.hpp"

namespace fs = std::filesystem;

namespace mrccs {

Tensor3 to_luma(const unsigned char* rgb, int height, int width) {
  if (height < 1 || width < 1) throw DataError("empty image");
  Tensor3 out(1, height, width);
  for (int i = 0; i < height * width; ++i) {
    const double r = rgb[3 * i];
    const double g = rgb[3 * i + 1];
    const double b = rgb[3 * i + 2];
    const double y = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
    out.data[i] = static_cast<float>(std::clamp(y, 0.0, 1.0));
  }
  return out;
}

Tensor3 load_luma(const std::string& path) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw DataError("cannot decode image: " + path);
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  if (!rgb.isContinuous()) rgb = rgb.clone();
  return to_luma(rgb.ptr<unsigned char>(0), rgb.rows, rgb.cols);
}

Tensor3 resize_bicubic(const Tensor3& luma, int out_height, int out_width) {
  if (luma.channels != 1) {
    throw DataError("resize expects a luma image, got " + luma.shape_string());
  }
  if (out_height < 1 || out_width < 1) throw DataError("resize target must be positive");
  if (out_height == luma.height && out_width == luma.width) return luma;
  cv::Mat src(luma.height, luma.width, CV_32FC1, const_cast<float*>(luma.data.data()));
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(out_width, out_height), 0, 0, cv::INTER_CUBIC);
  Tensor3 out(1, out_height, out_width);
  for (int y = 0; y < out_height; ++y) {
    const float* row = dst.ptr<float>(y);
    for (int x = 0; x < out_width; ++x) {
      out.at(0, y, x) = std::clamp(row[x], 0.0f, 1.0f);
    }
  }
  return out;
}

Tensor3 resize_for_eval(const Tensor3& luma, const std::string& set_name) {
  if (set_name == "Set5" || set_name == "Set14") {
    return resize_bicubic(luma, 256, 256);
  }
  if (set_name == "BSDS100") {
    if (luma.width >= luma.height) return resize_bicubic(luma, 320, 480);
    return resize_bicubic(luma, 480, 320);
  }
  throw ConfigError("no evaluation resize policy for set \"" + set_name + "\"");
}

Tensor3 pad_to_multiple(const Tensor3& image, int factor, CropRecord* record) {
  if (factor < 1) throw ConfigError("pad factor must be >= 1");
  if (record) *record = CropRecord{image.height, image.width};
  const int h = (image.height + factor - 1) / factor * factor;
  const int w = (image.width + factor - 1) / factor * factor;
  if (h == image.height && w == image.width) return image;
  if (image.height == 1 && h > 1) {
    throw DataError("cannot reflect-pad a 1-pixel-tall image");
  }
  if (image.width == 1 && w > 1) {
    throw DataError("cannot reflect-pad a 1-pixel-wide image");
  }
  Tensor3 out(image.channels, h, w);
  auto reflect = [](int i, int n) {
    // reflect without repeating the border pixel: n, n+1 -> n-2, n-3, ...
    return i < n ? i : 2 * n - 2 - i;
  };
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      const int sy = reflect(y, image.height);
      for (int x = 0; x < w; ++x) {
        out.at(c, y, x) = image.at(c, sy, reflect(x, image.width));
      }
    }
  }
  return out;
}

Tensor3 crop_to(const Tensor3& image, const CropRecord& record) {
  if (record.height > image.height || record.width > image.width) {
    throw ConfigError("crop record " + std::to_string(record.height) + "x" +
                      std::to_string(record.width) + " exceeds image " +
                      image.shape_string());
  }
  if (record.height == image.height && record.width == image.width) return image;
  Tensor3 out(image.channels, record.height, record.width);
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < record.height; ++y) {
      for (int x = 0; x < record.width; ++x) {
        out.at(c, y, x) = image.at(c, y, x);
      }
    }
  }
  return out;
}

PatchBatch sample_patches(const std::vector<Tensor3>& images, uint64_t seed, int count,
                          int patch) {
  if (count < 1) throw ConfigError("patch count must be >= 1");
  if (patch < 1) throw ConfigError("patch size must be >= 1");
  std::vector<const Tensor3*> usable;
  for (size_t i = 0; i < images.size(); ++i) {
    const Tensor3& img = images[i];
    if (img.height < patch || img.width < patch) {
      std::cerr << "warning: image " << i << " (" << img.shape_string()
                << ") is smaller than the " << patch << "x" << patch << " patch; skipped\n";
      continue;
    }
    usable.push_back(&img);
  }
  if (usable.empty()) throw DataError("no image is large enough for patch sampling");

  Rng rng(seed);
  PatchBatch batch;
  batch.seed = seed;
  for (int n = 0; n < count; ++n) {
    const Tensor3& img = *usable[rng.uniform_int(static_cast<int>(usable.size()))];
    const int y0 = rng.uniform_int(img.height - patch + 1);
    const int x0 = rng.uniform_int(img.width - patch + 1);
    const bool flip = rng.bernoulli();
    Tensor3 p(1, patch, patch);
    for (int y = 0; y < patch; ++y) {
      for (int x = 0; x < patch; ++x) {
        const int sx = flip ? x0 + patch - 1 - x : x0 + x;
        p.at(0, y, x) = img.at(0, y0 + y, sx);
      }
    }
    batch.patches.push_back(std::move(p));
  }
  return batch;
}

int DatasetSpec::expected_count() const {
  if (set == "BSDS500-train400") return 400;
  if (set == "Set5") return 5;
  if (set == "Set14") return 14;
  if (set == "BSDS100") return 100;
  throw ConfigError("unknown dataset set \"" + set +
                    "\" (expected BSDS500-train400, Set5, Set14 or BSDS100)");
}

void DatasetSpec::validate_name() const { (void)expected_count(); }

std::vector<std::string> list_image_files(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw DataError("image directory not found: " + dir);
  }
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp") {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<std::string> list_images(const DatasetSpec& spec) {
  spec.validate_name();
  return list_image_files(spec.dir());
}

std::vector<std::string> write_manifest(const DatasetSpec& spec) {
  auto names = list_images(spec);
  if (static_cast<int>(names.size()) != spec.expected_count()) {
    throw DataError("set " + spec.set + " should contain " +
                    std::to_string(spec.expected_count()) + " images, found " +
                    std::to_string(names.size()) + " in " + spec.dir());
  }
  std::ofstream out(spec.dir() + "/manifest.txt", std::ios::binary);
  if (!out) throw DataError("cannot write manifest in " + spec.dir());
  for (const auto& n : names) out << n << "\n";
  return names;
}

std::vector<NamedImage> load_set(const DatasetSpec& spec) {
  auto names = list_images(spec);
  if (names.empty()) throw DataError("no images in " + spec.dir());
  std::vector<NamedImage> images;
  images.reserve(names.size());
  for (const auto& n : names) {
    Tensor3 luma = load_luma(spec.dir() + "/" + n);
    if (!spec.is_train()) luma = resize_for_eval(luma, spec.set);
    images.push_back(NamedImage{n, std::move(luma)});
  }
  return images;
}

void save_gray_png(const std::string& path, const Tensor3& image) {
  if (image.channels != 1) {
    throw DataError("grayscale save expects 1xHxW, got " + image.shape_string());
  }
  cv::Mat gray(image.height, image.width, CV_8UC1);
  for (int y = 0; y < image.height; ++y) {
    unsigned char* row = gray.ptr<unsigned char>(y);
    for (int x = 0; x < image.width; ++x) {
      const float v = std::clamp(image.at(0, y, x), 0.0f, 1.0f);
      row[x] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
  }
  if (!cv::imwrite(path, gray)) throw DataError("cannot write image: " + path);
}

}  // namespace mrccs
