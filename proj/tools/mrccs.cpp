#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mrccs/checkpoint.hpp"
#include "mrccs/data.hpp"
#include "mrccs/errors.hpp"
#include "mrccs/train.hpp"

namespace fs = std::filesystem;
using namespace mrccs;

namespace {

// Exit codes: 0 ok, 1 usage, 2 data validation, 3 config/shape mismatch,
// 4 numeric failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumeric = 4;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw DataError("cannot write " + path);
}

std::vector<Tensor3> load_images_dir(const std::string& dir) {
  std::vector<std::string> names = list_image_files(dir);
  if (names.empty()) throw DataError("no images in " + dir);
  std::vector<Tensor3> images;
  images.reserve(names.size());
  for (const auto& n : names) images.push_back(load_luma(dir + "/" + n));
  return images;
}

// seed precedence: --seed flag, then the config file, then MRCCS_SEED.
void resolve_seed(KvMap& kv, bool seed_given, uint64_t seed_flag) {
  if (seed_given) {
    kv["seed"] = std::to_string(seed_flag);
  } else if (!kv.count("seed")) {
    if (const char* env = std::getenv("MRCCS_SEED")) kv["seed"] = env;
  }
}

struct ModelBundle {
  TrainConfig config;
  Model model;
  ParamStore params;
};

ModelBundle load_model(const std::string& ckpt_path) {
  ParamContainer ckpt = load_checkpoint(ckpt_path);
  TrainConfig cfg = TrainConfig::from_kv(ckpt.config);
  return ModelBundle{cfg, Model(cfg.model), std::move(ckpt.params)};
}

void run_prepare_data(const std::string& root, const std::string& set) {
  DatasetSpec spec{root, set};
  std::vector<std::string> names = write_manifest(spec);
  std::cout << "wrote " << spec.dir() << "/manifest.txt (" << names.size()
            << " images)\n";
}

void run_train(const std::string& config_path, const std::string& out_dir,
               bool seed_given, uint64_t seed_flag) {
  KvMap kv = parse_kv_file(config_path);
  resolve_seed(kv, seed_given, seed_flag);
  KvReader reader(kv);
  const std::string train_dir = reader.get_string("train_dir");
  TrainConfig cfg = TrainConfig::from_kv(reader);
  reader.finish();

  std::vector<Tensor3> images = load_images_dir(train_dir);
  TrainResult result = train(cfg, images, out_dir, &std::cout);
  // Re-echo with the data path so the run is reproducible from the echo alone.
  KvMap effective = cfg.to_kv();
  effective["train_dir"] = train_dir;
  write_text_file(out_dir + "/config.txt", serialize_kv(effective));
  std::cout << "final checkpoint: " << result.final_checkpoint << "\n"
            << "training log: " << result.log_path << "\n";
}

void run_eval(const std::string& ckpt_path, const std::string& set,
              const std::string& root, const std::string& out_dir,
              const std::string& ratio) {
  ModelBundle bundle = load_model(ckpt_path);
  std::vector<NamedImage> images = load_set(DatasetSpec{root, set});
  MetricsReport report = evaluate(bundle.model, bundle.params, images, set,
                                  out_dir, ratio);
  const std::string csv_path = out_dir + "/report.csv";
  report.write_csv(csv_path);
  KvMap effective = bundle.config.to_kv();
  effective["checkpoint"] = ckpt_path;
  effective["set"] = set;
  effective["data_root"] = root;
  write_text_file(out_dir + "/config.txt", serialize_kv(effective));
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mean_psnr %.4f mean_ssim %.4f\n",
                report.mean_psnr(), report.mean_ssim());
  std::cout << "report: " << csv_path << "\n" << buf;
}

void run_sense(const std::string& ckpt_path, const std::string& image_path,
               const std::string& out_path) {
  ModelBundle bundle = load_model(ckpt_path);
  Tensor3 luma = load_luma(image_path);
  CropRecord record;
  Tensor3 padded =
      pad_to_multiple(luma, bundle.model.size_multiple(), &record);
  Measurements y = bundle.model.sensor().sense(padded, bundle.params);
  save_measurements(out_path, y, record.height, record.width);
  std::cout << "wrote " << out_path << " (" << y.tensor.data.size()
            << " measurements from " << record.height << "x" << record.width
            << ")\n";
}

void run_reconstruct(const std::string& ckpt_path,
                     const std::string& measurements_path,
                     const std::string& out_path) {
  ModelBundle bundle = load_model(ckpt_path);
  MeasurementsFile mf = load_measurements(measurements_path);
  const SensingPlan& want = bundle.model.config().plan;
  const SensingPlan& got = mf.measurements.plan;
  if (got.variant != want.variant || got.k != want.k || got.m != want.m ||
      got.feature_width != want.feature_width)
    throw ConfigError("measurements were sensed with " +
                      std::string(variant_name(got.variant)) + " at " +
                      got.ratio_string() + ", checkpoint expects " +
                      std::string(variant_name(want.variant)) + " at " +
                      want.ratio_string());
  Tensor3 initial =
      bundle.model.initial_reconstruct(mf.measurements, bundle.params);
  Tensor3 refined =
      bundle.model.deep_reconstruct(initial, mf.measurements, bundle.params);
  CropRecord record{static_cast<int>(mf.source_height),
                    static_cast<int>(mf.source_width)};
  save_gray_png(out_path, crop_to(refined, record));
  std::cout << "wrote " << out_path << " (" << record.height << "x"
            << record.width << ")\n";
}

void run_bench(const std::string& ckpt_path, int size, int repeats) {
  if (size < 1) throw ConfigError("--size must be positive");
  if (repeats < 1) throw ConfigError("--repeats must be positive");
  ModelBundle bundle = load_model(ckpt_path);
  const int mult = bundle.model.size_multiple();
  const int side = (size + mult - 1) / mult * mult;
  if (side != size)
    std::cout << "note: padding " << size << " up to " << side
              << " (model needs multiples of " << mult << ")\n";
  Rng rng(20240915);
  Tensor3 x(1, side, side);
  for (auto& v : x.data) v = rng.uniform(0.0f, 1.0f);

  bundle.model.forward(x, bundle.params);  // warm-up, excluded
  std::vector<double> seconds;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    bundle.model.forward(x, bundle.params);
    const auto t1 = std::chrono::steady_clock::now();
    seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    std::printf("run %d: %.4f s\n", r + 1, seconds.back());
  }
  std::vector<double> sorted = seconds;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::printf("median: %.4f s over %d runs at %dx%d\n", median, repeats, side,
              side);
}

void run_ablate(const std::string& config_path, const std::string& out_dir,
                bool seed_given, uint64_t seed_flag) {
  KvMap kv = parse_kv_file(config_path);
  resolve_seed(kv, seed_given, seed_flag);
  KvReader reader(kv);
  const std::string train_dir = reader.get_string("train_dir");
  const std::string eval_root = reader.get_string("eval_root");
  const std::string eval_set = reader.get_string("eval_set");
  const std::string ratio_list = reader.get_string("ratios");
  AblationBudget budget;
  budget.steps = static_cast<int>(reader.get_int("steps", budget.steps));
  budget.batch_size =
      static_cast<int>(reader.get_int("batch_size", budget.batch_size));
  budget.patch = static_cast<int>(reader.get_int("patch", budget.patch));
  budget.deep_channels = static_cast<int>(
      reader.get_int("deep_channels", budget.deep_channels));
  budget.mrb_count =
      static_cast<int>(reader.get_int("mrb_count", budget.mrb_count));
  budget.feature_width = static_cast<int>(
      reader.get_int("feature_width", budget.feature_width));
  budget.seed = reader.get_u64("seed", budget.seed);
  reader.finish();

  std::vector<std::string> ratios;
  std::string token;
  for (char c : ratio_list + ",") {
    if (c == ',') {
      if (!token.empty()) ratios.push_back(token);
      token.clear();
    } else if (c != ' ') {
      token += c;
    }
  }

  std::vector<Tensor3> train_images = load_images_dir(train_dir);
  std::vector<NamedImage> eval_images =
      load_set(DatasetSpec{eval_root, eval_set});
  const std::string csv = ablation_matrix(train_images, eval_images, eval_set,
                                          ratios, budget, out_dir, &std::cout);
  write_text_file(out_dir + "/config.txt", serialize_kv(kv));
  std::cout << "ablation report: " << csv << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressed-sensing image pipeline: learned sensing, linear "
               "initial reconstruction, deep refinement"};
  app.require_subcommand(1);

  std::string root, set_name, config_path, out_path, ckpt_path, image_path,
      measurements_path, ratio;
  uint64_t seed_flag = 0;
  int size = 256, repeats = 5;

  auto* prepare = app.add_subcommand("prepare-data",
                                     "validate a dataset directory and write "
                                     "its manifest");
  prepare->add_option("--root", root, "dataset root directory")->required();
  prepare->add_option("--set", set_name,
                      "BSDS500-train400 | Set5 | Set14 | BSDS100")
      ->required();
  prepare->callback([&] { run_prepare_data(root, set_name); });

  auto* train_cmd =
      app.add_subcommand("train", "train a model from a key=value config");
  train_cmd->add_option("--config", config_path, "config file")->required();
  train_cmd->add_option("--out", out_path, "output directory")->required();
  auto* train_seed =
      train_cmd->add_option("--seed", seed_flag, "override the config seed");
  train_cmd->callback([&] {
    run_train(config_path, out_path, train_seed->count() > 0, seed_flag);
  });

  auto* eval_cmd = app.add_subcommand(
      "eval", "evaluate a checkpoint over a test set, writing report + PNGs");
  eval_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  eval_cmd->add_option("--set", set_name, "test set name")->required();
  eval_cmd->add_option("--root", root, "dataset root directory")->required();
  eval_cmd->add_option("--out", out_path, "output directory")->required();
  eval_cmd->add_option("--ratio", ratio,
                       "expected sensing ratio (cross-checked)");
  eval_cmd->callback(
      [&] { run_eval(ckpt_path, set_name, root, out_path, ratio); });

  auto* sense_cmd = app.add_subcommand(
      "sense", "compress one image into a measurements file");
  sense_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  sense_cmd->add_option("--image", image_path, "input image")->required();
  sense_cmd->add_option("--out", out_path, "measurements file to write")
      ->required();
  sense_cmd->callback([&] { run_sense(ckpt_path, image_path, out_path); });

  auto* recon_cmd = app.add_subcommand(
      "reconstruct", "reconstruct a PNG from a measurements file");
  recon_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  recon_cmd->add_option("--measurements", measurements_path,
                        "measurements file")
      ->required();
  recon_cmd->add_option("--out", out_path, "PNG to write")->required();
  recon_cmd->callback(
      [&] { run_reconstruct(ckpt_path, measurements_path, out_path); });

  auto* bench_cmd = app.add_subcommand(
      "bench", "time end-to-end forward passes on a random image");
  bench_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  bench_cmd->add_option("--size", size, "square image side (default 256)");
  bench_cmd->add_option("--repeats", repeats, "timed runs (default 5)");
  bench_cmd->callback([&] { run_bench(ckpt_path, size, repeats); });

  auto* ablate_cmd = app.add_subcommand(
      "ablate", "train the sensing/reuse ablation grid and emit one CSV");
  ablate_cmd->add_option("--config", config_path, "config file")->required();
  ablate_cmd->add_option("--out", out_path, "output directory")->required();
  auto* ablate_seed =
      ablate_cmd->add_option("--seed", seed_flag, "override the config seed");
  ablate_cmd->callback([&] {
    run_ablate(config_path, out_path, ablate_seed->count() > 0, seed_flag);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
