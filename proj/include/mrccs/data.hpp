#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrccs/tensor.hpp"

namespace mrccs {

// Full-range luma from interleaved 8-bit RGB rows:
// Y = (0.299 R + 0.587 G + 0.114 B)/255, clamped to [0,1].
Tensor3 to_luma(const unsigned char* rgb, int height, int width);

// Decode any supported image file (png/jpg/bmp) and convert to luma.
Tensor3 load_luma(const std::string& path);

Tensor3 resize_bicubic(const Tensor3& luma, int out_height, int out_width);

// Evaluation-protocol sizes: Set5/Set14 go to 256x256; BSDS100 goes to
// 480-wide by 320-tall, transposed for portrait inputs so aspect is kept.
Tensor3 resize_for_eval(const Tensor3& luma, const std::string& set_name);

struct CropRecord {
  int height = 0;
  int width = 0;
};

// Reflect-pad right/bottom up to the next multiple of factor. The record
// holds the original size so crop_to inverts exactly.
Tensor3 pad_to_multiple(const Tensor3& image, int factor, CropRecord* record = nullptr);
Tensor3 crop_to(const Tensor3& image, const CropRecord& record);

struct PatchBatch {
  std::vector<Tensor3> patches;  // each 1 x patch x patch, values in [0,1]
  uint64_t seed = 0;
};

// Uniform random crops with independent 50% horizontal flips, reproducible
// from the seed. Images smaller than the patch are skipped with a warning on
// stderr; sampling with no usable image is a data error.
PatchBatch sample_patches(const std::vector<Tensor3>& images, uint64_t seed, int count,
                          int patch = 96);

struct DatasetSpec {
  std::string root;
  std::string set;  // BSDS500-train400 | Set5 | Set14 | BSDS100

  // Images live at <root>/<set>/*.{png,jpg,jpeg,bmp}.
  std::string dir() const { return root + "/" + set; }
  bool is_train() const { return set == "BSDS500-train400"; }
  int expected_count() const;
  void validate_name() const;
};

// Lexicographically sorted image file names (png/jpg/jpeg/bmp) in a
// directory, relative to it.
std::vector<std::string> list_image_files(const std::string& dir);

// The same listing for a dataset directory, after name validation.
std::vector<std::string> list_images(const DatasetSpec& spec);

// The prepare-data body: list, check the expected count, write
// <root>/<set>/manifest.txt (one name per line), return the listing.
std::vector<std::string> write_manifest(const DatasetSpec& spec);

// All images of the set as luma tensors, in manifest order; evaluation sets
// are resized per protocol, the training set is left at native size.
struct NamedImage {
  std::string name;
  Tensor3 luma;
};
std::vector<NamedImage> load_set(const DatasetSpec& spec);

// 8-bit grayscale PNG of a 1xHxW tensor; values clamped to [0,1].
void save_gray_png(const std::string& path, const Tensor3& image);

}  // namespace mrccs
