#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mrccs/checkpoint.hpp"
#include "mrccs/data.hpp"
#include "mrccs/kv.hpp"
#include "mrccs/metrics.hpp"
#include "mrccs/optim.hpp"
#include "mrccs/reconstruction.hpp"
#include "mrccs/tape.hpp"

namespace mrccs {

// "ratio" accepts a fraction ("1/16") or a decimal percent ("6.25").
void parse_ratio(const std::string& text, long* num, long* den);

// Percent with trailing zeros trimmed: 1/16 -> "6.25", 1/8 -> "12.5".
std::string ratio_percent_text(const SensingPlan& plan);

struct TrainConfig {
  ModelConfig model;
  int epochs = 200;
  int steps_per_epoch = 400;
  int batch_size = 4;
  int patch = 96;
  int checkpoint_every = 20;  // epochs between periodic checkpoints
  uint64_t seed = 1;

  void validate() const;
  KvMap to_kv() const;
  // Consumes this type's keys from the reader; caller may pull its own keys
  // from the same reader before finish().
  static TrainConfig from_kv(KvReader& reader);
  static TrainConfig from_kv(const KvMap& kv);  // rejects unknown keys
};

// One joint objective over a batch: summed squared error of the initial
// reconstruction plus summed squared error of the refined output, accumulated
// sample by sample in batch order. total is the node add(deep, initial), so
// its value equals deep + initial in float arithmetic.
struct BatchLoss {
  Tape::NodeId initial = -1;
  Tape::NodeId deep = -1;
  Tape::NodeId total = -1;
};

BatchLoss build_batch_loss(Tape& tape, const Model& model,
                           const std::vector<Tensor3>& batch,
                           ParamStore& store);

float loss_initial(const Model& model, const std::vector<Tensor3>& batch,
                   ParamStore& store);
float loss_deep(const Model& model, const std::vector<Tensor3>& batch,
                ParamStore& store);
float loss_total(const Model& model, const std::vector<Tensor3>& batch,
                 ParamStore& store);

struct TrainResult {
  std::string final_checkpoint;
  std::string log_path;
  double last_epoch_mean_loss = 0.0;
};

// Full loop: for each epoch, steps Adam updates on freshly sampled augmented
// patches at lr_at_epoch(epoch), logging every step as CSV `epoch,step,loss,lr`
// and checkpointing every `checkpoint_every` epochs plus at the end. Entirely
// deterministic for a fixed seed. A non-finite loss aborts with a NumericError
// naming the last checkpoint that was written.
TrainResult train(const TrainConfig& cfg, const std::vector<Tensor3>& images,
                  const std::string& out_dir, std::ostream* progress = nullptr);

// Runs the model over a set, padding each image to the model's size multiple
// and cropping the outputs back. Produces one row per image; when out_dir is
// nonempty also writes `<stem>_recon.png` and `<stem>_residual.png` (the
// absolute error map). expected_ratio, when nonempty, must match the model's
// sensing ratio ("1/16" or "6.25") or a ConfigError is thrown.
MetricsReport evaluate(const Model& model, ParamStore& store,
                       const std::vector<NamedImage>& images,
                       const std::string& dataset_name,
                       const std::string& out_dir = "",
                       const std::string& expected_ratio = "");

// Trains each sensing configuration (plain stacked-conv sensing vs. the
// residual multi-scale sampler, each with measurements reuse off and on) at
// every requested ratio under one short fixed budget, evaluates on the given
// set, and writes rows `sensing,reuse,ratio,psnr_db,ssim,checkpoint`. Each
// trained model's checkpoint lands in out_dir so every cell is traceable.
// Returns the CSV path.
struct AblationBudget {
  int steps = 200;          // optimizer steps per cell
  int batch_size = 4;
  int patch = 96;
  int deep_channels = 16;
  int mrb_count = 1;
  int feature_width = 16;
  uint64_t seed = 1;
};

std::string ablation_matrix(const std::vector<Tensor3>& train_images,
                            const std::vector<NamedImage>& eval_images,
                            const std::string& eval_set_name,
                            const std::vector<std::string>& ratios,
                            const AblationBudget& budget,
                            const std::string& out_dir,
                            std::ostream* progress = nullptr);

}  // namespace mrccs
